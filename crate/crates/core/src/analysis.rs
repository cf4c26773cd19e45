//! Saturation detection and diagnostics of saturated states.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{binomial, gamma_eliminated_overlap, run_schedule, SymmetricState};
use crate::training::{optimize_layer, OptimizerSettings, TrainingTrace};

pub use crate::training::{DEFAULT_EPS_ONE, DEFAULT_EPS_SAT};

/// Necessary conditions for a symmetric state to be untrainable toward `|0…0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub a1_magnitude: f64,
    pub a2_magnitude: f64,
    /// `√(2n/(n−1)) |A_0|`.
    pub a2_bound: f64,
    /// `|A_1| ≤ tol`.
    pub condition1_pass: bool,
    /// `|A_2| ≤ a2_bound + tol`.
    pub condition2_pass: bool,
    /// `√(n/(2(n−1))) |A_0|`, the bound implied by `g''(0) ≤ 0` once `A_1 = 0`.
    pub a2_curvature_bound: f64,
    pub curvature_pass: bool,
    pub tolerance: f64,
}

pub fn check_conditions(state: &SymmetricState, tol: f64) -> ConditionCheck {
    let n = state.n();
    let a0 = state.amp(0).norm();
    let a1 = state.amp(1).norm();
    let a2 = if n >= 2 { state.amp(2).norm() } else { 0.0 };
    let (a2_bound, a2_curvature_bound) = if n >= 2 {
        let nf = n as f64;
        (
            (2.0 * nf / (nf - 1.0)).sqrt() * a0,
            (nf / (2.0 * (nf - 1.0))).sqrt() * a0,
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    ConditionCheck {
        a1_magnitude: a1,
        a2_magnitude: a2,
        a2_bound,
        condition1_pass: a1 <= tol,
        condition2_pass: a2 <= a2_bound + tol,
        a2_curvature_bound,
        curvature_pass: a2 <= a2_curvature_bound + tol,
        tolerance: tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub p_star: Option<usize>,
    pub overlap_at_p_star: Option<f64>,
    pub improvement_at_p_star_plus_1: Option<f64>,
    pub beta_at_p_star_plus_1: Option<f64>,
    /// Conditions evaluated on the noiseless replay of the first `p*` layers.
    pub conditions: Option<ConditionCheck>,
}

/// Finds the smallest depth `p ≥ 1` whose successor layer gains at most
/// `eps_sat` while the overlap at `p` is still below `1 − eps_one`.
///
/// Condition diagnostics replay the schedule on the symmetric simulator, so
/// they describe noiseless traces only.
pub fn detect_saturation(
    trace: &TrainingTrace,
    eps_sat: f64,
    eps_one: f64,
) -> Result<SaturationReport> {
    if trace.depth() < 2 {
        return Err(Error::InvalidArgument(
            "saturation detection needs a trace of depth >= 2".into(),
        ));
    }
    let overlaps = trace.overlaps();
    let p_star = (0..overlaps.len() - 1)
        .find(|&i| overlaps[i + 1] - overlaps[i] <= eps_sat && overlaps[i] < 1.0 - eps_one)
        .map(|i| i + 1);
    let Some(p) = p_star else {
        return Ok(SaturationReport {
            p_star: None,
            overlap_at_p_star: None,
            improvement_at_p_star_plus_1: None,
            beta_at_p_star_plus_1: None,
            conditions: None,
        });
    };
    let state = run_schedule(trace.n, &trace.schedule()[..p])?;
    Ok(SaturationReport {
        p_star: Some(p),
        overlap_at_p_star: Some(overlaps[p - 1]),
        improvement_at_p_star_plus_1: Some(overlaps[p] - overlaps[p - 1]),
        beta_at_p_star_plus_1: Some(trace.layers[p].angles.beta),
        conditions: Some(check_conditions(&state, 1e-6)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainabilityProbe {
    /// Best overlap gain from one more optimized layer.
    pub max_gain: f64,
    pub argmax_beta: f64,
    pub argmax_gamma: f64,
}

pub fn trainability_probe(
    state: &SymmetricState,
    settings: &OptimizerSettings,
) -> TrainabilityProbe {
    let choice = optimize_layer(state, settings);
    let base = gamma_eliminated_overlap(state, 0.0).amplitude;
    TrainabilityProbe {
        max_gain: choice.amplitude * choice.amplitude - base * base,
        argmax_beta: choice.angles.beta,
        argmax_gamma: choice.angles.gamma,
    }
}

/// `A_0|e_0⟩ + A_2|e_2⟩` with `|A_0| = a0`, `|A_2| = a2` and the given phases.
///
/// Requires `a0² + a2² = 1` and `a2 ≤ a0 / √C(n,2)`, which places the maximum
/// of the next-layer amplitude at `β = 0`.
pub fn make_nontrainable_state(
    n: usize,
    a0: f64,
    a2: f64,
    phases: (f64, f64),
) -> Result<SymmetricState> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "non-trainable family needs n >= 2".into(),
        ));
    }
    if a0 < 0.0 || a2 < 0.0 || ((a0 * a0 + a2 * a2) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "moduli must be non-negative with a0² + a2² = 1 (a0 = {a0}, a2 = {a2})"
        )));
    }
    let limit = a0 / binomial(n, 2).sqrt();
    if a2 > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "a2 = {a2} exceeds a0 / sqrt(C(n,2)) = {limit}"
        )));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    amps[0] = Complex64::from_polar(a0, phases.0);
    amps[2] = Complex64::from_polar(a2, phases.1);
    SymmetricState::normalized(amps)
}

/// Closed form of `g(β)` on the non-trainable family:
/// `(a0 − √C(n,2) a2)|cosβ|ⁿ + √C(n,2) a2 |cosβ|^{n−2}`.
pub fn nontrainable_amplitude(n: usize, a0: f64, a2: f64, beta: f64) -> f64 {
    let c2 = binomial(n, 2).sqrt() * a2;
    let c = beta.cos().abs();
    (a0 - c2) * c.powi(n as i32) + c2 * c.powi(n as i32 - 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaStats {
    pub beta1: f64,
    /// `π/n`.
    pub beta1_reference: f64,
    /// `|β₁ − π/n| / (π/n)`.
    pub beta1_relative_deviation: f64,
    /// Number of consecutive layers with `β_{c+1} > β_c`.
    pub decrease_violations: usize,
    pub final_beta: f64,
}

pub fn beta_schedule_stats(trace: &TrainingTrace) -> Result<BetaStats> {
    let n = trace.n;
    if trace.depth() < n + 1 {
        return Err(Error::InvalidArgument(format!(
            "beta statistics need depth >= n + 1 = {}, got {}",
            n + 1,
            trace.depth()
        )));
    }
    let betas: Vec<f64> = trace.layers.iter().map(|l| l.angles.beta).collect();
    let reference = PI / n as f64;
    Ok(BetaStats {
        beta1: betas[0],
        beta1_reference: reference,
        beta1_relative_deviation: (betas[0] - reference).abs() / reference,
        decrease_violations: betas.windows(2).filter(|w| w[1] > w[0]).count(),
        final_beta: betas[betas.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::LayerAngles;
    use crate::training::{LayerRecord, TrainingStatus};

    fn synthetic(n: usize, overlaps: &[f64], beta: f64) -> TrainingTrace {
        TrainingTrace {
            n,
            initial_overlap: 0.5f64.powi(n as i32),
            layers: overlaps
                .iter()
                .map(|&overlap| LayerRecord {
                    angles: LayerAngles { gamma: 0.0, beta },
                    overlap,
                    amplitude: overlap.sqrt(),
                    wall_seconds: 0.0,
                    evaluations: 0,
                })
                .collect(),
            status: TrainingStatus::DepthLimit,
        }
    }

    #[test]
    fn increasing_trace_has_no_saturation() {
        let t = synthetic(3, &[0.2, 0.4, 0.6, 0.8], 0.1);
        assert_eq!(detect_saturation(&t, 1e-8, 1e-9).unwrap().p_star, None);
        assert!(detect_saturation(&synthetic(3, &[0.2], 0.1), 1e-8, 1e-9).is_err());
    }

    #[test]
    fn constant_betas_have_no_violations() {
        let t = synthetic(3, &[0.2, 0.4, 0.6, 0.8], 0.3);
        let s = beta_schedule_stats(&t).unwrap();
        assert_eq!(s.decrease_violations, 0);
        assert_eq!(s.final_beta, 0.3);
        assert!(beta_schedule_stats(&synthetic(3, &[0.2, 0.4], 0.3)).is_err());
    }

    #[test]
    fn conditions_on_simple_states() {
        let e1 = SymmetricState::dicke(4, 1).unwrap();
        assert!(!check_conditions(&e1, 1e-6).condition1_pass);
        for n in 2..8 {
            let plus = SymmetricState::plus(n).unwrap();
            let c = check_conditions(&plus, 1e-6);
            assert!(!c.condition1_pass);
            assert!((c.a1_magnitude - (n as f64 / 2f64.powi(n as i32)).sqrt()).abs() < 1e-14);
        }
        let e0 = SymmetricState::dicke(1, 0).unwrap();
        let c = check_conditions(&e0, 1e-6);
        assert!(c.condition1_pass && c.condition2_pass);
    }

    #[test]
    fn nontrainable_family_constructor() {
        let s = make_nontrainable_state(4, 1.0, 0.0, (0.0, 0.0)).unwrap();
        assert_eq!(s, SymmetricState::dicke(4, 0).unwrap());
        let a0 = (6.0f64 / 7.0).sqrt();
        let a2 = a0 / 6f64.sqrt();
        let boundary = make_nontrainable_state(4, a0, a2, (0.4, 1.9)).unwrap();
        let probe = trainability_probe(&boundary, &OptimizerSettings::default());
        assert!(probe.max_gain <= 1e-9);
        assert!(probe.argmax_beta < 1e-4);

        // a2 = 1.5 a0 / √6 with a0² + a2² = 1.
        let a0 = (1.0f64 / 1.375).sqrt();
        let a2 = 1.5 * a0 / 6f64.sqrt();
        assert!(make_nontrainable_state(4, a0, a2, (0.0, 0.0)).is_err());
        assert!(make_nontrainable_state(1, 1.0, 0.0, (0.0, 0.0)).is_err());
        assert!(make_nontrainable_state(4, 0.5, 0.1, (0.0, 0.0)).is_err());
    }

    #[test]
    fn target_state_cannot_gain() {
        let e0 = SymmetricState::dicke(5, 0).unwrap();
        let probe = trainability_probe(&e0, &OptimizerSettings::default());
        assert_eq!(probe.max_gain, 0.0);
    }
}
