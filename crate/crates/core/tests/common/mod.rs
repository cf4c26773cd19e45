#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use satlab::densecore::DenseState;
use satlab::symcore::{binomial, LayerAngles, SymmetricState};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Haar-like random symmetric state from Gaussian amplitudes.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> SymmetricState {
    let amps = (0..=n)
        .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    SymmetricState::normalized(amps).unwrap()
}

pub fn random_schedule<R: Rng>(depth: usize, rng: &mut R) -> Vec<LayerAngles> {
    (0..depth)
        .map(|_| LayerAngles {
            gamma: rng.random_range(0.0..TAU),
            beta: rng.random_range(0.0..PI),
        })
        .collect()
}

/// Reference dense evolution built from the dense primitives only.
pub fn dense_run(n: usize, schedule: &[LayerAngles]) -> DenseState {
    let mut s = DenseState::plus(n).unwrap();
    for l in schedule {
        s.apply_phase_separator(l.gamma);
        s.apply_mixer(l.beta);
    }
    s
}

/// Normalized Dicke vector `|D_k⟩` in the computational basis.
pub fn dense_dicke(n: usize, k: usize) -> Vec<f64> {
    let norm = binomial(n, k).sqrt();
    (0..1usize << n)
        .map(|x| {
            if x.count_ones() as usize == k {
                1.0 / norm
            } else {
                0.0
            }
        })
        .collect()
}

/// `Σ_q X_q` applied to a real vector.
pub fn apply_hx(n: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (x, &a) in v.iter().enumerate() {
        for q in 0..n {
            out[x ^ (1 << q)] += a;
        }
    }
    out
}

/// Next-layer target amplitude split into `(A, B)`, evaluated straight from
/// the binomial expansion of the mixer.
pub fn expansion_terms(state: &SymmetricState, beta: f64) -> (Complex64, Complex64) {
    let n = state.n();
    let (cb, sb) = (beta.cos(), beta.sin());
    let mis = c(0.0, -sb);
    let a = state.amp(0) * cb.powi(n as i32);
    let mut b = c(0.0, 0.0);
    for k in 1..=n {
        b += state.amp(k) * cb.powi((n - k) as i32) * mis.powi(k as i32) * binomial(n, k).sqrt();
    }
    (a, b)
}

/// `max_γ |A e^{-iγ} + B| = |A| + |B|`.
pub fn g(state: &SymmetricState, beta: f64) -> f64 {
    let (a, b) = expansion_terms(state, beta);
    a.norm() + b.norm()
}

/// Branch of `g` that is smooth through `β = 0`; equals `g` for `β ≥ 0`.
pub fn g_smooth(state: &SymmetricState, beta: f64) -> f64 {
    let (a, b) = expansion_terms(state, beta);
    if state.amp(1).norm() > 0.0 {
        a.norm() + beta.signum() * b.norm()
    } else {
        a.norm() + b.norm()
    }
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
