//! Trainers maximizing the target overlap.
//!
//! * [`train_layerwise`]: greedy, one layer at a time, β searched on a grid
//!   and refined, γ recovered in closed form.
//! * [`train_global`]: multistart Nelder–Mead over all `2p` angles.
//! * [`train_cutoff`]: greedy, but each layer only realizes a fraction of the
//!   best available gain.
//! * [`train_layerwise_noisy`]: greedy on the dense simulator with frozen
//!   coherent noise per layer.

mod global;
mod noisy;
pub mod optim;

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{
    gamma_eliminated_overlap, reduce_angle, LayerAngles, MixerGenerator, SymmetricState,
};

pub use global::{train_global, train_global_seeded};
pub use noisy::train_layerwise_noisy;

/// Improvement at or below which an extra layer counts as no gain.
pub const DEFAULT_EPS_SAT: f64 = 1e-8;
/// Distance from 1 below which the overlap counts as perfect.
pub const DEFAULT_EPS_ONE: f64 = 1e-9;

/// Amplitude difference treated as a tie between candidate layers.
const TIE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub beta_grid_points: usize,
    pub refine_tolerance: f64,
    pub global_restarts: usize,
    pub global_max_iterations: usize,
    /// Per-axis grid size of the coarse (γ, β) scan used by the noisy trainer.
    pub noisy_grid_points: usize,
    /// Number of coarse-scan local maxima the noisy trainer refines.
    pub noisy_starts: usize,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            beta_grid_points: 2048,
            refine_tolerance: 1e-10,
            global_restarts: 32,
            global_max_iterations: 2000,
            noisy_grid_points: 32,
            noisy_starts: 6,
            seed: 0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = self.beta_grid_points > 0
            && self.refine_tolerance > 0.0
            && self.global_restarts > 0
            && self.global_max_iterations > 0
            && self.noisy_grid_points > 0
            && self.noisy_starts > 0;
        if !positive {
            return Err(Error::InvalidArgument(
                "optimizer settings must all be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingStatus {
    DepthLimit,
    Saturated,
    Converged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub angles: LayerAngles,
    /// Target overlap after this layer.
    pub overlap: f64,
    /// Target amplitude modulus `√overlap` reached by the chosen angles.
    pub amplitude: f64,
    pub wall_seconds: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub n: usize,
    /// Overlap of `|+⟩^⊗n`, i.e. depth 0.
    pub initial_overlap: f64,
    pub layers: Vec<LayerRecord>,
    pub status: TrainingStatus,
}

impl TrainingTrace {
    fn new(n: usize, initial_overlap: f64) -> Self {
        Self {
            n,
            initial_overlap,
            layers: Vec::new(),
            status: TrainingStatus::DepthLimit,
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn schedule(&self) -> Vec<LayerAngles> {
        self.layers.iter().map(|l| l.angles).collect()
    }

    /// Overlaps at depths `1..=depth`.
    pub fn overlaps(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.overlap).collect()
    }

    pub fn final_overlap(&self) -> f64 {
        self.layers
            .last()
            .map_or(self.initial_overlap, |l| l.overlap)
    }

    pub fn total_evaluations(&self) -> usize {
        self.layers.iter().map(|l| l.evaluations).sum()
    }

    fn finish(&mut self) {
        let overlaps = self.overlaps();
        self.status = match overlaps.as_slice() {
            [.., last] if *last >= 1.0 - DEFAULT_EPS_ONE => TrainingStatus::Converged,
            [.., prev, last] if last - prev <= DEFAULT_EPS_SAT => TrainingStatus::Saturated,
            _ => TrainingStatus::DepthLimit,
        };
    }
}

/// Best single extra layer for a symmetric state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerChoice {
    pub angles: LayerAngles,
    /// `g(β*)`, the γ-eliminated target amplitude.
    pub amplitude: f64,
    pub evaluations: usize,
}

/// Maximizes `g(β)` over `β ∈ [0, π)`.
///
/// Every local maximum of the periodic grid is refined by golden section
/// within its neighbouring grid cells. Ties within `1e-14` go to the smallest β,
/// and `β = 0` is always a candidate.
pub fn optimize_layer(state: &SymmetricState, settings: &OptimizerSettings) -> LayerChoice {
    let m = settings.beta_grid_points.max(3);
    let spacing = PI / m as f64;
    let g = |beta: f64| gamma_eliminated_overlap(state, beta).amplitude;
    let grid: Vec<f64> = (0..m).map(|i| g(i as f64 * spacing)).collect();
    let mut evals = m;

    let mut candidates: Vec<(f64, f64)> = vec![(0.0, grid[0])];
    for i in 0..m {
        let prev = grid[(i + m - 1) % m];
        let next = grid[(i + 1) % m];
        if grid[i] >= prev && grid[i] >= next {
            let centre = i as f64 * spacing;
            let (b, v, e) = optim::golden_section_max(
                g,
                centre - spacing,
                centre + spacing,
                settings.refine_tolerance,
            );
            evals += e;
            let (beta, value) = if v > grid[i] {
                (b, v)
            } else {
                (centre, grid[i])
            };
            candidates.push((reduce_angle(beta, PI), value));
        }
    }

    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let beta = candidates
        .iter()
        .filter(|c| c.1 >= best - TIE_TOLERANCE)
        .map(|c| c.0)
        .fold(f64::INFINITY, f64::min);
    let ge = gamma_eliminated_overlap(state, beta);
    LayerChoice {
        angles: LayerAngles {
            gamma: ge.gamma_star,
            beta,
        },
        amplitude: ge.amplitude,
        evaluations: evals + 1,
    }
}

fn check_depth(n: usize, max_depth: usize) -> Result<()> {
    if n == 0 || max_depth == 0 {
        return Err(Error::InvalidArgument(
            "n and max_depth must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Greedy layerwise training to `max_depth`, freezing all earlier layers.
pub fn train_layerwise(
    n: usize,
    max_depth: usize,
    settings: &OptimizerSettings,
) -> Result<TrainingTrace> {
    check_depth(n, max_depth)?;
    settings.validate()?;
    let gen = MixerGenerator::new(n)?;
    let mut state = SymmetricState::plus(n)?;
    let mut trace = TrainingTrace::new(n, state.overlap());
    for _ in 0..max_depth {
        let start = Instant::now();
        let choice = optimize_layer(&state, settings);
        state = gen.apply(
            &state.apply_phase_separator(choice.angles.gamma),
            choice.angles.beta,
        )?;
        trace.layers.push(LayerRecord {
            angles: choice.angles,
            overlap: state.overlap(),
            amplitude: choice.amplitude,
            wall_seconds: start.elapsed().as_secs_f64(),
            evaluations: choice.evaluations,
        });
    }
    trace.finish();
    Ok(trace)
}

/// Layerwise training where each layer realizes only the fraction `fraction`
/// of the best available overlap gain.
///
/// The target `O_prev + f (O_max − O_prev)` is hit by bisecting `g(β)² = O_t`
/// on both sides of the optimal β; one of the two roots is picked by a fair
/// coin from `rng`. `fraction = 1` never touches `rng` and matches
/// [`train_layerwise`].
pub fn train_cutoff<R: Rng + ?Sized>(
    n: usize,
    max_depth: usize,
    fraction: f64,
    settings: &OptimizerSettings,
    rng: &mut R,
) -> Result<TrainingTrace> {
    check_depth(n, max_depth)?;
    settings.validate()?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let gen = MixerGenerator::new(n)?;
    let mut state = SymmetricState::plus(n)?;
    let mut trace = TrainingTrace::new(n, state.overlap());
    for _ in 0..max_depth {
        let start = Instant::now();
        let best = optimize_layer(&state, settings);
        let mut evaluations = best.evaluations;
        let prev = state.overlap();
        let max = best.amplitude * best.amplitude;
        let angles = if fraction >= 1.0 || max - prev <= 1e-15 {
            best.angles
        } else {
            let target = prev + fraction * (max - prev);
            let mut calls = 0usize;
            let excess = |beta: f64| {
                calls += 1;
                let g = gamma_eliminated_overlap(&state, beta).amplitude;
                g * g - target
            };
            let beta_star = best.angles.beta;
            let beta = if rng.random_bool(0.5) {
                optim::bisect(excess, 0.0, beta_star, 1e-15)
            } else {
                optim::bisect(excess, beta_star, PI, 1e-15)
            };
            evaluations += calls;
            LayerAngles {
                gamma: gamma_eliminated_overlap(&state, beta).gamma_star,
                beta,
            }
        };
        state = gen.apply(&state.apply_phase_separator(angles.gamma), angles.beta)?;
        let overlap = state.overlap();
        trace.layers.push(LayerRecord {
            angles,
            overlap,
            amplitude: overlap.sqrt(),
            wall_seconds: start.elapsed().as_secs_f64(),
            evaluations,
        });
    }
    trace.finish();
    Ok(trace)
}
