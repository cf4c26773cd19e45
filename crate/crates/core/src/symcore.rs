//! QAOA evolution restricted to the permutation-symmetric subspace.
//!
//! With target `|0…0⟩` and initial state `|+⟩^⊗n`, every ansatz state is
//! invariant under qubit permutations, so it is fully described by its
//! `n + 1` amplitudes on the Dicke basis `|e_0⟩ … |e_n⟩`. The phase separator
//! only touches `A_0`; the mixer `e^{-iβH_x}` acts through the tridiagonal
//! representation of `H_x = Σ X_i` in that basis.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance every state must satisfy.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Below this modulus `A_1` is treated as exactly zero when evaluating the
/// curvature of the γ-eliminated overlap at β = 0.
pub const A1_ZERO_CUTOFF: f64 = 1e-8;

/// Largest n for which binomials are computed with exact integer arithmetic.
const EXACT_BINOMIAL_MAX_N: usize = 50;

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_MAX_N {
        let mut c: u64 = 1;
        for i in 0..k {
            // c * (n - i) is divisible by (i + 1) at every step.
            c = c * (n - i) as u64 / (i + 1) as u64;
        }
        c as f64
    } else {
        let ln = libm::lgamma((n + 1) as f64)
            - libm::lgamma((k + 1) as f64)
            - libm::lgamma((n - k + 1) as f64);
        ln.exp()
    }
}

/// One QAOA layer: phase-separator angle γ and mixer angle β.
///
/// Angles are reduced to `γ ∈ [0, 2π)` and `β ∈ [0, π)`. Shifting β by π
/// multiplies the state by the global phase `(-1)^n`, which no objective sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerAngles {
    pub gamma: f64,
    pub beta: f64,
}

impl LayerAngles {
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        if !gamma.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "layer angles must be finite (gamma = {gamma}, beta = {beta})"
            )));
        }
        Ok(Self {
            gamma: reduce_angle(gamma, TAU),
            beta: reduce_angle(beta, PI),
        })
    }

    /// The identity layer.
    pub fn zero() -> Self {
        Self {
            gamma: 0.0,
            beta: 0.0,
        }
    }
}

pub(crate) fn reduce_angle(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs.
    if r >= period {
        0.0
    } else {
        r
    }
}

/// A state of the symmetric subspace, stored as Dicke amplitudes `A_0..A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState {
    n: usize,
    amps: Vec<Complex64>,
}

impl SymmetricState {
    /// Builds a state from `n + 1` amplitudes that must already be normalized.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidArgument(
                "a symmetric state needs at least 2 amplitudes (n >= 1)".into(),
            ));
        }
        let norm = norm_sqr(&amps);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            n: amps.len() - 1,
            amps,
        })
    }

    /// Builds a state from arbitrary nonzero amplitudes, rescaling to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amps).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite amplitude vector".into(),
            ));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    /// `|+⟩^⊗n`, with `A_k = √(C(n,k) / 2^n)`.
    pub fn plus(n: usize) -> Result<Self> {
        check_n(n)?;
        let scale = (-(n as f64) * std::f64::consts::LN_2).exp();
        let amps = (0..=n)
            .map(|k| Complex64::new((binomial(n, k) * scale).sqrt(), 0.0))
            .collect();
        Ok(Self { n, amps })
    }

    /// The Dicke vector `|e_k⟩`.
    pub fn dicke(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        if k > n {
            return Err(Error::InvalidArgument(format!(
                "Dicke index {k} out of range for n = {n}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, k: usize) -> Complex64 {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Target overlap `|⟨0…0|ψ⟩|² = |A_0|²`.
    pub fn overlap(&self) -> f64 {
        self.amps[0].norm_sqr().min(1.0)
    }

    /// `e^{-iγ|0⟩⟨0|}`: rotates the phase of `A_0` only.
    pub fn apply_phase_separator(&self, gamma: f64) -> Self {
        let mut amps = self.amps.clone();
        amps[0] *= Complex64::from_polar(1.0, -gamma);
        Self { n: self.n, amps }
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "qubit count must be positive".into(),
        ));
    }
    Ok(())
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// `H_x` in the Dicke basis together with its cached eigendecomposition.
///
/// `⟨e_{k+1}|H_x|e_k⟩ = √((k+1)(n−k))`, all diagonal entries vanish.
#[derive(Debug, Clone)]
pub struct MixerGenerator {
    n: usize,
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl MixerGenerator {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let dim = n + 1;
        let mut matrix = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..n {
            let off = (((k + 1) * (n - k)) as f64).sqrt();
            matrix[(k, k + 1)] = off;
            matrix[(k + 1, k)] = off;
        }
        let eig = SymmetricEigen::new(matrix.clone());
        Ok(Self {
            n,
            matrix,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = self.eigenvalues.clone();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `e^{-iβH_x}|ψ⟩ = V e^{-iβΛ} Vᵀ |ψ⟩`.
    pub fn apply(&self, state: &SymmetricState, beta: f64) -> Result<SymmetricState> {
        if state.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: state.n,
            });
        }
        let dim = self.n + 1;
        let v = &self.eigenvectors;
        let mut rotated = vec![Complex64::new(0.0, 0.0); dim];
        for (j, r) in rotated.iter_mut().enumerate() {
            let proj: Complex64 = (0..dim).map(|k| state.amps[k] * v[(k, j)]).sum();
            *r = proj * Complex64::from_polar(1.0, -beta * self.eigenvalues[j]);
        }
        let amps = (0..dim)
            .map(|k| (0..dim).map(|j| rotated[j] * v[(k, j)]).sum())
            .collect();
        Ok(SymmetricState { n: self.n, amps })
    }
}

/// Free-function form of [`MixerGenerator::apply`].
pub fn apply_mixer(
    state: &SymmetricState,
    beta: f64,
    gen: &MixerGenerator,
) -> Result<SymmetricState> {
    gen.apply(state, beta)
}

/// Runs the ansatz from `|+⟩^⊗n`, alternating phase separator and mixer.
pub fn run_schedule(n: usize, schedule: &[LayerAngles]) -> Result<SymmetricState> {
    let gen = MixerGenerator::new(n)?;
    run_schedule_with(&gen, schedule)
}

/// [`run_schedule`] reusing a prebuilt generator.
pub fn run_schedule_with(gen: &MixerGenerator, schedule: &[LayerAngles]) -> Result<SymmetricState> {
    let state = SymmetricState::plus(gen.n())?;
    evolve(gen, state, schedule)
}

/// Applies `schedule` to an arbitrary starting state.
pub fn evolve(
    gen: &MixerGenerator,
    mut state: SymmetricState,
    schedule: &[LayerAngles],
) -> Result<SymmetricState> {
    for layer in schedule {
        state = gen.apply(&state.apply_phase_separator(layer.gamma), layer.beta)?;
    }
    Ok(state)
}

/// The two pieces of `⟨0|e^{-iβH_x} e^{-iγ|0⟩⟨0|}|ψ⟩ = A e^{-iγ} + B`.
///
/// `A = A_0 cosⁿβ` and `B = Σ_{k≥1} cos^{n−k}β (−i sinβ)^k A_k √C(n,k)`.
/// Evaluated in polynomial form so β = π/2 needs no special case.
pub fn layer_terms(state: &SymmetricState, beta: f64) -> (Complex64, Complex64) {
    let n = state.n;
    let (s, c) = beta.sin_cos();
    let minus_i_s = Complex64::new(0.0, -s);
    let a = state.amps[0] * c.powi(n as i32);
    let mut b = Complex64::new(0.0, 0.0);
    let mut sin_pow = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        sin_pow *= minus_i_s;
        b += state.amps[k] * sin_pow * c.powi((n - k) as i32) * binomial(n, k).sqrt();
    }
    (a, b)
}

/// Target amplitude `⟨0|ψ'⟩` after appending the layer `(γ, β)`.
pub fn layer_target_amplitude(state: &SymmetricState, gamma: f64, beta: f64) -> Complex64 {
    let (a, b) = layer_terms(state, beta);
    a * Complex64::from_polar(1.0, -gamma) + b
}

/// Result of maximizing the next-layer target amplitude over γ at fixed β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaElimination {
    /// `g(β) = max_γ |⟨0|ψ'⟩| = |A| + |B|`.
    pub amplitude: f64,
    /// Maximizing `γ* = arg A − arg B`, reduced to `[0, 2π)`; 0 when A or B vanishes.
    pub gamma_star: f64,
}

const TERM_ZERO: f64 = 1e-14;

pub fn gamma_eliminated_overlap(state: &SymmetricState, beta: f64) -> GammaElimination {
    let (a, b) = layer_terms(state, beta);
    let (ma, mb) = (a.norm(), b.norm());
    let gamma_star = if ma < TERM_ZERO || mb < TERM_ZERO {
        0.0
    } else {
        reduce_angle(a.arg() - b.arg(), TAU)
    };
    GammaElimination {
        amplitude: ma + mb,
        gamma_star,
    }
}

/// One-sided derivatives of `g(β)` at `β = 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationDerivatives {
    /// `g'(0) = √n |A_1|`.
    pub slope: f64,
    /// `g''(0)`. With `A_1 = 0` this is `−n|A_0| + 2√C(n,2)|A_2|`; otherwise
    /// the `|A_2|` term becomes `2√C(n,2) Im(conj(A_1) A_2) / |A_1|`.
    pub curvature: f64,
}

pub fn saturation_derivatives(state: &SymmetricState) -> SaturationDerivatives {
    let n = state.n;
    let a0 = state.amps[0].norm();
    let a1 = state.amps[1];
    let a2 = if n >= 2 {
        state.amps[2]
    } else {
        Complex64::new(0.0, 0.0)
    };
    let root_c2 = binomial(n, 2).sqrt();
    let slope = (n as f64).sqrt() * a1.norm();
    let source = if a1.norm() <= A1_ZERO_CUTOFF {
        2.0 * root_c2 * a2.norm()
    } else {
        2.0 * root_c2 * (a1.conj() * a2).im / a1.norm()
    };
    SaturationDerivatives {
        slope,
        curvature: -(n as f64) * a0 + source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(state: &SymmetricState, expected: &[Complex64], tol: f64) {
        assert_eq!(state.amps().len(), expected.len());
        for (a, e) in state.amps().iter().zip(expected) {
            assert!((a - e).norm() < tol, "{a} != {e}");
        }
    }

    #[test]
    fn binomials_exact_and_lgamma_agree() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(50, 25), 126_410_606_437_752.0);
        assert_eq!(binomial(4, 5), 0.0);
        let exact = 100_891_344_545_564_193_334_812_497_256.0_f64; // C(100, 50)
        assert!((binomial(100, 50) / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_state_amplitudes() {
        let s = SymmetricState::plus(2).unwrap();
        assert_amps(
            &s,
            &[c(0.5, 0.0), c(FRAC_1_SQRT_2, 0.0), c(0.5, 0.0)],
            1e-15,
        );
        let s = SymmetricState::plus(1).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15);
        for n in 1..=30 {
            let s = SymmetricState::plus(n).unwrap();
            assert!((s.overlap() - 0.5f64.powi(n as i32)).abs() < 1e-15);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(SymmetricState::plus(0).is_err());
    }

    #[test]
    fn phase_separator_flips_a0() {
        let s = SymmetricState::plus(2).unwrap();
        assert_eq!(s.apply_phase_separator(0.0), s);
        let flipped = s.apply_phase_separator(PI);
        assert_amps(
            &flipped,
            &[c(-0.5, 0.0), c(FRAC_1_SQRT_2, 0.0), c(0.5, 0.0)],
            1e-15,
        );
    }

    #[test]
    fn constructor_rejects_bad_norm() {
        assert!(matches!(
            SymmetricState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(SymmetricState::new(vec![c(1.0, 0.0)]).is_err());
        assert!(SymmetricState::normalized(vec![c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn mixer_generator_structure() {
        for n in 1..=12 {
            let gen = MixerGenerator::new(n).unwrap();
            let m = gen.matrix();
            for k in 0..=n {
                assert_eq!(m[(k, k)], 0.0);
                if k < n {
                    let off = (((k + 1) * (n - k)) as f64).sqrt();
                    assert_eq!(m[(k, k + 1)], off);
                    assert_eq!(m[(k + 1, k)], off);
                }
            }
            for (i, ev) in gen.eigenvalues().iter().enumerate() {
                let expected = -(n as f64) + 2.0 * i as f64;
                assert!((ev - expected).abs() < 1e-9, "n={n}: {ev} vs {expected}");
            }
        }
    }

    #[test]
    fn mixer_identity_at_zero_and_dimension_check() {
        let gen = MixerGenerator::new(3).unwrap();
        let s = SymmetricState::plus(3).unwrap();
        let out = gen.apply(&s, 0.0).unwrap();
        assert_amps(&out, s.amps(), 1e-14);
        let other = SymmetricState::plus(4).unwrap();
        assert!(matches!(
            gen.apply(&other, 0.3),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 4
            })
        ));
    }

    #[test]
    fn single_qubit_mixer_is_x_rotation() {
        // e^{-iβX} = cosβ I − i sinβ X
        let gen = MixerGenerator::new(1).unwrap();
        let s = SymmetricState::normalized(vec![c(0.3, -0.2), c(-0.5, 0.7)]).unwrap();
        for &beta in &[0.1, 0.77, FRAC_PI_2, 2.9] {
            let (sn, cs) = f64::sin_cos(beta);
            let (a, b) = (s.amp(0), s.amp(1));
            let expected = [a * cs + b * c(0.0, -sn), b * cs + a * c(0.0, -sn)];
            assert_amps(&gen.apply(&s, beta).unwrap(), &expected, 1e-14);
        }
    }

    #[test]
    fn one_qubit_layer_reaches_target() {
        let layer = LayerAngles::new(FRAC_PI_2, FRAC_PI_4).unwrap();
        let s = run_schedule(1, &[layer]).unwrap();
        assert!((s.overlap() - 1.0).abs() < 1e-14);
        assert_eq!(
            run_schedule(5, &[]).unwrap(),
            SymmetricState::plus(5).unwrap()
        );
    }

    #[test]
    fn overlap_of_basis_states() {
        assert_eq!(SymmetricState::dicke(4, 0).unwrap().overlap(), 1.0);
        assert_eq!(SymmetricState::dicke(4, 1).unwrap().overlap(), 0.0);
        assert!(SymmetricState::dicke(4, 5).is_err());
    }

    #[test]
    fn angles_are_reduced() {
        let l = LayerAngles::new(-0.5, 3.5 * PI).unwrap();
        assert!((l.gamma - (TAU - 0.5)).abs() < 1e-12);
        assert!((l.beta - 0.5 * PI).abs() < 1e-12);
        assert!(LayerAngles::new(f64::NAN, 0.0).is_err());
        assert_eq!(reduce_angle(-1e-20, TAU), 0.0);
    }

    #[test]
    fn gamma_elimination_at_zero_beta() {
        let s = SymmetricState::normalized(vec![c(0.4, 0.3), c(0.1, 0.9), c(-0.2, 0.1)]).unwrap();
        let ge = gamma_eliminated_overlap(&s, 0.0);
        assert!((ge.amplitude - s.amp(0).norm()).abs() < 1e-15);
        assert_eq!(ge.gamma_star, 0.0);
    }

    #[test]
    fn gamma_star_attains_the_maximum() {
        let s =
            SymmetricState::normalized(vec![c(0.4, 0.3), c(0.1, 0.9), c(-0.2, 0.1), c(0.05, -0.6)])
                .unwrap();
        for &beta in &[0.2, 1.0, FRAC_PI_2, 2.5] {
            let ge = gamma_eliminated_overlap(&s, beta);
            let at_star = layer_target_amplitude(&s, ge.gamma_star, beta).norm();
            assert!((at_star - ge.amplitude).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_simple_states() {
        let e0 = SymmetricState::dicke(5, 0).unwrap();
        let d = saturation_derivatives(&e0);
        assert_eq!(d.slope, 0.0);
        assert_eq!(d.curvature, -5.0);
        let plus = SymmetricState::plus(2).unwrap();
        assert!((saturation_derivatives(&plus).slope - 1.0).abs() < 1e-15);
    }
}
