use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_depth, optim, LayerRecord, OptimizerSettings, TrainingTrace};
use crate::error::{Error, Result};
use crate::symcore::{evolve, LayerAngles, MixerGenerator, SymmetricState};

fn to_schedule(x: &[f64]) -> Vec<LayerAngles> {
    x.chunks_exact(2)
        .map(|p| LayerAngles::new(p[0], p[1]).unwrap_or_else(|_| LayerAngles::zero()))
        .collect()
}

fn flatten(schedule: &[LayerAngles]) -> Vec<f64> {
    schedule.iter().flat_map(|l| [l.gamma, l.beta]).collect()
}

fn neg_overlap(gen: &MixerGenerator, x: &[f64]) -> f64 {
    if x.iter().any(|v| !v.is_finite()) {
        return 0.0;
    }
    let mut state = match SymmetricState::plus(gen.n()) {
        Ok(s) => s,
        Err(_) => return 0.0,
    };
    for p in x.chunks_exact(2) {
        state = match gen.apply(&state.apply_phase_separator(p[0]), p[1]) {
            Ok(s) => s,
            Err(_) => return 0.0,
        };
    }
    -state.overlap()
}

/// Global training over all `2p` angles with randomly initialized restarts.
pub fn train_global(n: usize, depth: usize, settings: &OptimizerSettings) -> Result<TrainingTrace> {
    train_global_seeded(n, depth, settings, &[])
}

/// Global training where each schedule in `seeds` is used as an extra restart,
/// ahead of the `global_restarts` random ones.
///
/// The reported trace is the per-depth overlap profile of the best schedule
/// found; that schedule is a best-of-restarts, not a certified optimum.
pub fn train_global_seeded(
    n: usize,
    depth: usize,
    settings: &OptimizerSettings,
    seeds: &[Vec<LayerAngles>],
) -> Result<TrainingTrace> {
    check_depth(n, depth)?;
    settings.validate()?;
    if let Some(bad) = seeds.iter().find(|s| s.len() != depth) {
        return Err(Error::InvalidArgument(format!(
            "seed schedule has {} layers, expected {depth}",
            bad.len()
        )));
    }
    let start = Instant::now();
    let gen = MixerGenerator::new(n)?;

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut starts: Vec<Vec<f64>> = seeds.iter().map(|s| flatten(s)).collect();
    for _ in 0..settings.global_restarts {
        let x: Vec<f64> = (0..depth)
            .flat_map(|_| [rng.random::<f64>() * TAU, rng.random::<f64>() * PI])
            .collect();
        starts.push(x);
    }

    let results: Vec<optim::SimplexResult> = starts
        .par_iter()
        .map(|x0| {
            let first = optim::nelder_mead_min(
                |x| neg_overlap(&gen, x),
                x0,
                0.5,
                settings.global_max_iterations,
                1e-15,
            );
            // Restarting from the best vertex with a fresh, smaller simplex
            // escapes collapsed simplices.
            let polished = optim::nelder_mead_min(
                |x| neg_overlap(&gen, x),
                &first.x,
                0.05,
                settings.global_max_iterations,
                1e-15,
            );
            let evaluations = first.evaluations + polished.evaluations;
            let mut best = if polished.value <= first.value {
                polished
            } else {
                first
            };
            best.evaluations = evaluations;
            best
        })
        .collect();

    let total_evals: usize = results.iter().map(|r| r.evaluations).sum();
    let winner = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .map(|(_, r)| r)
        .ok_or_else(|| Error::InvalidArgument("no restarts to run".into()))?;

    let schedule = to_schedule(&winner.x);
    let mut trace = TrainingTrace::new(n, SymmetricState::plus(n)?.overlap());
    let elapsed = start.elapsed().as_secs_f64();
    for c in 1..=depth {
        let overlap = evolve(&gen, SymmetricState::plus(n)?, &schedule[..c])?.overlap();
        trace.layers.push(LayerRecord {
            angles: schedule[c - 1],
            overlap,
            amplitude: overlap.sqrt(),
            wall_seconds: if c == depth { elapsed } else { 0.0 },
            evaluations: if c == depth { total_evals } else { 0 },
        });
    }
    trace.finish();
    Ok(trace)
}
