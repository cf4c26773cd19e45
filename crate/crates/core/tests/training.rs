mod common;

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satlab::densecore::NoiseConfig;
use satlab::symcore::{layer_target_amplitude, run_schedule, MixerGenerator, SymmetricState};
use satlab::training::{
    optimize_layer, train_cutoff, train_global_seeded, train_layerwise, train_layerwise_noisy,
    OptimizerSettings,
};

fn circular_gap(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

#[test]
fn doubling_the_beta_grid_keeps_the_schedule() {
    let coarse = OptimizerSettings::default();
    let fine = OptimizerSettings {
        beta_grid_points: 2 * coarse.beta_grid_points,
        ..coarse
    };
    for n in 2..=8 {
        let a = train_layerwise(n, n, &coarse).unwrap();
        let b = train_layerwise(n, n, &fine).unwrap();
        for (x, y) in a.layers.iter().zip(&b.layers) {
            assert!(
                circular_gap(x.angles.beta, y.angles.beta, PI) < 1e-6,
                "n = {n}"
            );
            assert!((x.overlap - y.overlap).abs() < 1e-7);
        }
    }
}

#[test]
fn first_layer_matches_exhaustive_grid() {
    let settings = OptimizerSettings::default();
    for (n, points) in [(2, 1024), (4, 4096), (6, 1024), (8, 1024)] {
        let plus = SymmetricState::plus(n).unwrap();
        let choice = optimize_layer(&plus, &settings);
        let mut grid_best = 0.0f64;
        for i in 0..points {
            let gamma = TAU * i as f64 / points as f64;
            for j in 0..points {
                let beta = PI * j as f64 / points as f64;
                grid_best = grid_best.max(layer_target_amplitude(&plus, gamma, beta).norm_sqr());
            }
        }
        let trained = choice.amplitude * choice.amplitude;
        assert!(trained >= grid_best - 1e-12, "n = {n}");
        assert!(
            trained - grid_best < 1e-4,
            "n = {n}: {trained} vs {grid_best}"
        );
        let replay = run_schedule(n, &[choice.angles]).unwrap().overlap();
        assert!((replay - trained).abs() < 1e-12);
    }
}

#[test]
fn noiseless_dense_trainer_ties_layerwise() {
    let settings = OptimizerSettings::default();
    for n in 4..=7 {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let dense =
            train_layerwise_noisy(n, n, &NoiseConfig::noiseless(), &settings, &mut rng).unwrap();
        let exact = train_layerwise(n, n, &settings).unwrap();
        assert!(
            (dense.final_overlap() - exact.final_overlap()).abs() < 1e-8,
            "n = {n}: {} vs {}",
            dense.final_overlap(),
            exact.final_overlap()
        );
    }
}

#[test]
fn cutoff_layers_hit_their_targets() {
    let settings = OptimizerSettings::default();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = train_cutoff(5, 6, 0.7, &settings, &mut rng).unwrap();
        let gen = MixerGenerator::new(5).unwrap();
        let mut state = SymmetricState::plus(5).unwrap();
        for layer in &trace.layers {
            let best = optimize_layer(&state, &settings);
            let prev = state.overlap();
            let target = prev + 0.7 * (best.amplitude.powi(2) - prev);
            state = gen
                .apply(
                    &state.apply_phase_separator(layer.angles.gamma),
                    layer.angles.beta,
                )
                .unwrap();
            assert!((state.overlap() - target).abs() < 1e-8);
            assert!((state.overlap() - layer.overlap).abs() < 1e-12);
        }
    }
}

#[test]
fn seeded_global_never_loses_to_its_seed() {
    let settings = OptimizerSettings {
        global_restarts: 4,
        ..OptimizerSettings::default()
    };
    for n in 2..=5 {
        let lw = train_layerwise(n, n + 1, &settings).unwrap();
        let gl = train_global_seeded(n, n + 1, &settings, &[lw.schedule()]).unwrap();
        assert!(gl.final_overlap() >= lw.final_overlap() - 1e-12, "n = {n}");
        let replay = run_schedule(n, &gl.schedule()).unwrap().overlap();
        assert!((replay - gl.final_overlap()).abs() < 1e-12);
    }
}
