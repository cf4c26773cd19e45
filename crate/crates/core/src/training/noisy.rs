use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::Rng;

use super::{check_depth, optim, LayerRecord, OptimizerSettings, TrainingTrace, TIE_TOLERANCE};
use crate::densecore::{apply_noisy_layer, sample_layer_noise, DenseState, NoiseConfig};
use crate::error::Result;
use crate::symcore::LayerAngles;

/// Evaluation budget of one compass-search refinement.
const MAX_PATTERN_EVALS: usize = 4000;

/// Greedy layerwise training on the dense simulator under coherent noise.
///
/// Each new layer draws its noise realization from `rng` once, when the layer
/// is appended; that realization stays fixed while the layer's `(γ, β)` is
/// optimized and for all later layers. Without permutation symmetry γ cannot
/// be eliminated, so both angles are searched: a coarse `(γ, β)` scan picks
/// the best few local maxima, each refined by compass search.
pub fn train_layerwise_noisy<R: Rng + ?Sized>(
    n: usize,
    max_depth: usize,
    noise: &NoiseConfig,
    settings: &OptimizerSettings,
    rng: &mut R,
) -> Result<TrainingTrace> {
    check_depth(n, max_depth)?;
    settings.validate()?;
    noise.validate()?;
    let mut state = DenseState::plus(n)?;
    let mut trace = TrainingTrace::new(n, state.overlap());

    let g = settings.noisy_grid_points.max(2);
    let (dg, db) = (TAU / g as f64, PI / g as f64);

    for _ in 0..max_depth {
        let start = Instant::now();
        let realization = sample_layer_noise(n, noise, rng)?;
        let mut evaluations = 0usize;
        let mut objective = |x: &[f64]| {
            evaluations += 1;
            let mut s = state.clone();
            apply_noisy_layer(
                &mut s,
                LayerAngles {
                    gamma: x[0],
                    beta: x[1],
                },
                &realization,
            );
            s.overlap()
        };

        let mut grid = vec![0.0; g * g];
        for i in 0..g {
            for j in 0..g {
                grid[i * g + j] = objective(&[i as f64 * dg, j as f64 * db]);
            }
        }
        let at = |i: usize, j: usize| grid[(i % g) * g + (j % g)];
        let mut peaks: Vec<(usize, usize)> = Vec::new();
        for i in 0..g {
            for j in 0..g {
                let v = at(i, j);
                let is_peak = [(g - 1, 0), (1, 0), (0, g - 1), (0, 1)]
                    .iter()
                    .all(|&(di, dj)| v >= at(i + di, j + dj));
                if is_peak {
                    peaks.push((i, j));
                }
            }
        }
        peaks.sort_by(|a, b| {
            at(b.0, b.1)
                .total_cmp(&at(a.0, a.1))
                .then(a.1.cmp(&b.1))
                .then(a.0.cmp(&b.0))
        });
        peaks.truncate(settings.noisy_starts);

        let mut candidates: Vec<(LayerAngles, f64)> = vec![(LayerAngles::zero(), grid[0])];
        for (i, j) in peaks {
            let (x, v, _) = optim::pattern_search_max(
                &mut objective,
                &[i as f64 * dg, j as f64 * db],
                0.5 * db,
                settings.refine_tolerance,
                MAX_PATTERN_EVALS,
            );
            let angles = LayerAngles::new(x[0], x[1]).unwrap_or_else(|_| LayerAngles::zero());
            candidates.push((angles, v));
        }

        let best = candidates
            .iter()
            .map(|c| c.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let angles = candidates
            .iter()
            .filter(|c| c.1 >= best - TIE_TOLERANCE)
            .map(|c| c.0)
            .min_by(|a, b| a.beta.total_cmp(&b.beta).then(a.gamma.total_cmp(&b.gamma)))
            .unwrap_or_else(LayerAngles::zero);

        apply_noisy_layer(&mut state, angles, &realization);
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
