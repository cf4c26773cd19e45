//! Full `2^n` statevector simulation.
//!
//! Serves two roles: an independent oracle for the Dicke-basis simulator, and
//! the carrier for coherent phase noise, which breaks permutation symmetry.
//! Basis index bit `j` is qubit `j` (little-endian).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{binomial, LayerAngles, SymmetricState, NORM_TOLERANCE};

/// Largest qubit count the dense simulator accepts.
pub const MAX_DENSE_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "qubit count must be positive".into(),
        ));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::CapacityExceeded {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

impl DenseState {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_capacity(n)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes for n = {n}, got {}",
                1usize << n,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// `|+⟩^⊗n`.
    pub fn plus(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            n,
            amps: vec![a; dim],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for n = {n}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|amp(0)|²`.
    pub fn overlap(&self) -> f64 {
        self.amps[0].norm_sqr().min(1.0)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `e^{-iγ|0⟩⟨0|}`.
    pub fn apply_phase_separator(&mut self, gamma: f64) {
        self.amps[0] *= Complex64::from_polar(1.0, -gamma);
    }

    /// `e^{-iβX}` on one qubit.
    pub fn apply_rx(&mut self, qubit: usize, beta: f64) {
        let (s, c) = beta.sin_cos();
        let mis = Complex64::new(0.0, -s);
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a, b) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = a * c + b * mis;
                self.amps[i | mask] = b * c + a * mis;
            }
        }
    }

    /// `e^{-iβH_x}` as the product of single-qubit rotations.
    pub fn apply_mixer(&mut self, beta: f64) {
        for q in 0..self.n {
            self.apply_rx(q, beta);
        }
    }

    /// `S(φ) = |0⟩⟨0| + e^{iφ}|1⟩⟨1|` on one qubit.
    pub fn apply_phase_kick(&mut self, qubit: usize, phi: f64) {
        let phase = Complex64::from_polar(1.0, phi);
        let mask = 1usize << qubit;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= phase;
            }
        }
    }

    pub fn apply_bit_flip(&mut self, qubit: usize) {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
    }

    fn apply_noise(&mut self, events: &[NoiseEvent]) {
        for ev in events {
            match ev.op {
                NoiseOp::Phase(phi) => self.apply_phase_kick(ev.qubit, phi),
                NoiseOp::BitFlip => self.apply_bit_flip(ev.qubit),
            }
        }
    }
}

/// Embeds a symmetric state: `amp(b) = A_{|b|} / √C(n, |b|)`.
pub fn lift(state: &SymmetricState) -> Result<DenseState> {
    let n = state.n();
    check_capacity(n)?;
    let scales: Vec<f64> = (0..=n).map(|k| binomial(n, k).sqrt().recip()).collect();
    let amps = (0..1usize << n)
        .map(|b| {
            let w = b.count_ones() as usize;
            state.amp(w) * scales[w]
        })
        .collect();
    Ok(DenseState { n, amps })
}

/// Symmetric-subspace projection of a dense state.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Renormalized projection onto the Dicke basis.
    pub state: SymmetricState,
    /// Norm of the component orthogonal to the symmetric subspace.
    pub residual_norm: f64,
}

/// Projects onto the symmetric subspace; errors if nothing remains.
pub fn project_symmetric(state: &DenseState) -> Result<Projection> {
    let n = state.n;
    let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
    for (b, a) in state.amps.iter().enumerate() {
        sums[b.count_ones() as usize] += a;
    }
    let coeffs: Vec<Complex64> = sums
        .iter()
        .enumerate()
        .map(|(k, s)| s / binomial(n, k).sqrt())
        .collect();
    // Residual measured directly rather than as sqrt(1 - |P ψ|²), which
    // loses half the digits.
    let residual_sqr: f64 = state
        .amps
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let k = b.count_ones() as usize;
            (a - coeffs[k] / binomial(n, k).sqrt()).norm_sqr()
        })
        .sum();
    let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if kept < 1e-24 {
        return Err(Error::FullyAsymmetric);
    }
    Ok(Projection {
        state: SymmetricState::normalized(coeffs)?,
        residual_norm: residual_sqr.sqrt(),
    })
}

/// Which gate boundaries receive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseGranularity {
    /// After the phase separator and after the whole mixer.
    #[default]
    Layer,
    /// After the phase separator and after each single-qubit mixer rotation.
    SingleQubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Coherent phase error `S(φ)`, `φ ~ N(0, σ²)`.
    #[default]
    Phase,
    /// Pauli X; only used as a contrast experiment.
    BitFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Per-qubit probability of a noise event after each gate.
    pub p_noise: f64,
    /// Standard deviation of the phase angle.
    pub phase_stddev: f64,
    pub seed: u64,
    #[serde(default)]
    pub granularity: NoiseGranularity,
    #[serde(default)]
    pub kind: NoiseKind,
}

impl NoiseConfig {
    pub fn new(p_noise: f64, phase_stddev: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            p_noise,
            phase_stddev,
            seed,
            granularity: NoiseGranularity::Layer,
            kind: NoiseKind::Phase,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn noiseless() -> Self {
        Self {
            p_noise: 0.0,
            phase_stddev: 1.0,
            seed: 0,
            granularity: NoiseGranularity::Layer,
            kind: NoiseKind::Phase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_noise) {
            return Err(Error::InvalidArgument(format!(
                "p_noise must lie in [0, 1], got {}",
                self.p_noise
            )));
        }
        if !(self.phase_stddev >= 0.0 && self.phase_stddev.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "phase_stddev must be finite and >= 0, got {}",
                self.phase_stddev
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseOp {
    Phase(f64),
    BitFlip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEvent {
    pub qubit: usize,
    pub op: NoiseOp,
}

/// Noise realization for one layer, frozen once sampled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerNoise {
    pub after_phase: Vec<NoiseEvent>,
    /// One entry for layer granularity, `n` entries (one per rotation) otherwise.
    pub after_mixer: Vec<Vec<NoiseEvent>>,
}

impl LayerNoise {
    pub fn is_empty(&self) -> bool {
        self.after_phase.is_empty() && self.after_mixer.iter().all(Vec::is_empty)
    }

    pub fn event_count(&self) -> usize {
        self.after_phase.len() + self.after_mixer.iter().map(Vec::len).sum::<usize>()
    }
}

fn sample_slot<R: Rng + ?Sized>(
    n: usize,
    cfg: &NoiseConfig,
    normal: &Normal<f64>,
    rng: &mut R,
) -> Vec<NoiseEvent> {
    let mut events = Vec::new();
    for qubit in 0..n {
        if rng.random::<f64>() < cfg.p_noise {
            let op = match cfg.kind {
                NoiseKind::Phase => NoiseOp::Phase(normal.sample(rng)),
                NoiseKind::BitFlip => NoiseOp::BitFlip,
            };
            events.push(NoiseEvent { qubit, op });
        }
    }
    events
}

/// Draws the noise events of one layer from `rng`.
pub fn sample_layer_noise<R: Rng + ?Sized>(
    n: usize,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> Result<LayerNoise> {
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.phase_stddev)
        .map_err(|e| Error::InvalidArgument(format!("phase distribution: {e}")))?;
    let after_phase = sample_slot(n, cfg, &normal, rng);
    let slots = match cfg.granularity {
        NoiseGranularity::Layer => 1,
        NoiseGranularity::SingleQubit => n,
    };
    let after_mixer = (0..slots)
        .map(|_| sample_slot(n, cfg, &normal, rng))
        .collect();
    Ok(LayerNoise {
        after_phase,
        after_mixer,
    })
}

/// Applies one layer with a fixed noise realization.
pub fn apply_noisy_layer(state: &mut DenseState, angles: LayerAngles, noise: &LayerNoise) {
    state.apply_phase_separator(angles.gamma);
    state.apply_noise(&noise.after_phase);
    match noise.after_mixer.len() {
        0 => state.apply_mixer(angles.beta),
        1 => {
            state.apply_mixer(angles.beta);
            state.apply_noise(&noise.after_mixer[0]);
        }
        _ => {
            for q in 0..state.n {
                state.apply_rx(q, angles.beta);
                if let Some(events) = noise.after_mixer.get(q) {
                    state.apply_noise(events);
                }
            }
        }
    }
}

/// Runs the ansatz from `|+⟩^⊗n`, sampling fresh noise per layer from `rng`.
pub fn run_schedule_dense<R: Rng + ?Sized>(
    n: usize,
    schedule: &[LayerAngles],
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<DenseState> {
    let mut state = DenseState::plus(n)?;
    for &layer in schedule {
        let realization = sample_layer_noise(n, noise, rng)?;
        apply_noisy_layer(&mut state, layer, &realization);
    }
    Ok(state)
}

/// Runs the ansatz with one pre-sampled noise realization per layer.
pub fn run_schedule_frozen(
    n: usize,
    schedule: &[LayerAngles],
    noise: &[LayerNoise],
) -> Result<DenseState> {
    if noise.len() != schedule.len() {
        return Err(Error::InvalidArgument(format!(
            "{} noise realizations for {} layers",
            noise.len(),
            schedule.len()
        )));
    }
    let mut state = DenseState::plus(n)?;
    for (&layer, realization) in schedule.iter().zip(noise) {
        apply_noisy_layer(&mut state, layer, realization);
    }
    Ok(state)
}

pub fn overlap_dense(state: &DenseState) -> f64 {
    state.overlap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::run_schedule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_basis_cases() {
        let e0 = lift(&SymmetricState::dicke(3, 0).unwrap()).unwrap();
        assert_eq!(e0.amps()[0], Complex64::new(1.0, 0.0));
        let plus = lift(&SymmetricState::plus(2).unwrap()).unwrap();
        for a in plus.amps() {
            assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let e1 = lift(&SymmetricState::dicke(3, 1).unwrap()).unwrap();
        for (i, a) in e1.amps().iter().enumerate() {
            let expected = if [1, 2, 4].contains(&i) {
                3f64.sqrt().recip()
            } else {
                0.0
            };
            assert!((a.re - expected).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn projection_of_antisymmetric_component() {
        // |01⟩ at n = 2 is index 1 (qubit 0 set).
        let s = DenseState::basis(2, 1).unwrap();
        let p = project_symmetric(&s).unwrap();
        assert!((p.residual_norm - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p.state.amp(1).norm() - 1.0).abs() < 1e-15);

        let antisym = DenseState::new(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            project_symmetric(&antisym),
            Err(Error::FullyAsymmetric)
        ));
    }

    #[test]
    fn capacity_cap() {
        assert!(matches!(
            DenseState::plus(25),
            Err(Error::CapacityExceeded { n: 25, max: 24 })
        ));
        assert!(DenseState::plus(0).is_err());
    }

    #[test]
    fn noiseless_dense_run_matches_symmetric() {
        let schedule: Vec<LayerAngles> = [(0.3, 0.9), (2.1, 0.4), (5.0, 2.7)]
            .iter()
            .map(|&(g, b)| LayerAngles::new(g, b).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dense = run_schedule_dense(4, &schedule, &NoiseConfig::noiseless(), &mut rng).unwrap();
        let lifted = lift(&run_schedule(4, &schedule).unwrap()).unwrap();
        for (a, b) in dense.amps().iter().zip(lifted.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
        let zero_angle = NoiseConfig::new(1.0, 0.0, 3).unwrap();
        let dense = run_schedule_dense(4, &schedule, &zero_angle, &mut rng).unwrap();
        for (a, b) in dense.amps().iter().zip(lifted.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn noisy_run_leaves_symmetric_subspace() {
        let schedule: Vec<LayerAngles> = (0..4)
            .map(|i| LayerAngles::new(0.7 * i as f64 + 0.2, 0.3).unwrap())
            .collect();
        let cfg = NoiseConfig::new(0.5, 1.0, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let out = run_schedule_dense(4, &schedule, &cfg, &mut rng).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(project_symmetric(&out).unwrap().residual_norm > 1e-3);
    }

    #[test]
    fn single_qubit_granularity_has_one_slot_per_rotation() {
        let mut cfg = NoiseConfig::new(1.0, 1.0, 0).unwrap();
        cfg.granularity = NoiseGranularity::SingleQubit;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let noise = sample_layer_noise(3, &cfg, &mut rng).unwrap();
        assert_eq!(noise.after_mixer.len(), 3);
        assert_eq!(noise.event_count(), 12);
    }

    #[test]
    fn noise_config_validation() {
        assert!(NoiseConfig::new(1.5, 1.0, 0).is_err());
        assert!(NoiseConfig::new(0.5, -1.0, 0).is_err());
        assert!(NoiseConfig::new(0.5, f64::NAN, 0).is_err());
    }

    #[test]
    fn bit_flip_is_an_involution() {
        let mut s = lift(&SymmetricState::plus(3).unwrap()).unwrap();
        s.apply_rx(1, 0.4);
        let before = s.clone();
        s.apply_bit_flip(2);
        assert_ne!(s, before);
        s.apply_bit_flip(2);
        assert_eq!(s, before);
    }
}
