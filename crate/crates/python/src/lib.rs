//! Python bindings for the satlab simulators, trainers and diagnostics.

use num_complex::Complex64;
use pyo3::exceptions::{PyOverflowError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use satlab::analysis::{self, ConditionCheck};
use satlab::densecore::{self, NoiseConfig, NoiseGranularity, NoiseKind};
use satlab::harness::{self, ExperimentConfig};
use satlab::symcore::{self, LayerAngles};
use satlab::training::{self, OptimizerSettings, TrainingStatus};

fn to_py(e: satlab::Error) -> PyErr {
    match e {
        satlab::Error::CapacityExceeded { .. } => PyOverflowError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn schedule_from(layers: &[(f64, f64)]) -> Vec<LayerAngles> {
    layers
        .iter()
        .map(|&(gamma, beta)| LayerAngles { gamma, beta })
        .collect()
}

fn settings(beta_grid_points: usize, seed: u64) -> OptimizerSettings {
    OptimizerSettings {
        beta_grid_points,
        seed,
        ..OptimizerSettings::default()
    }
}

fn parse_granularity(s: &str) -> Result<NoiseGranularity, satlab::Error> {
    match s {
        "layer" => Ok(NoiseGranularity::Layer),
        "single_qubit" => Ok(NoiseGranularity::SingleQubit),
        _ => Err(satlab::Error::InvalidArgument(format!(
            "granularity must be `layer` or `single_qubit`, got `{s}`"
        ))),
    }
}

fn parse_kind(s: &str) -> Result<NoiseKind, satlab::Error> {
    match s {
        "phase" => Ok(NoiseKind::Phase),
        "bit_flip" => Ok(NoiseKind::BitFlip),
        _ => Err(satlab::Error::InvalidArgument(format!(
            "noise kind must be `phase` or `bit_flip`, got `{s}`"
        ))),
    }
}

/// Permutation-symmetric state stored as Dicke amplitudes `A_0..A_n`.
#[pyclass(name = "SymmetricState", frozen)]
struct PySymmetricState {
    inner: symcore::SymmetricState,
}

#[pymethods]
impl PySymmetricState {
    /// Builds a state from amplitudes, normalizing them.
    #[new]
    fn new(amps: Vec<Complex64>) -> PyResult<Self> {
        symcore::SymmetricState::normalized(amps)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn plus(n: usize) -> PyResult<Self> {
        symcore::SymmetricState::plus(n)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn dicke(n: usize, k: usize) -> PyResult<Self> {
        symcore::SymmetricState::dicke(n, k)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn amps(&self) -> Vec<Complex64> {
        self.inner.amps().to_vec()
    }

    fn overlap(&self) -> f64 {
        self.inner.overlap()
    }

    fn norm_sqr(&self) -> f64 {
        self.inner.norm_sqr()
    }

    /// One layer `e^{-iβH_x} e^{-iγ|0⟩⟨0|}`.
    fn apply_layer(&self, gamma: f64, beta: f64) -> PyResult<Self> {
        let gen = symcore::MixerGenerator::new(self.inner.n()).map_err(to_py)?;
        gen.apply(&self.inner.apply_phase_separator(gamma), beta)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.n() + 1
    }

    fn __repr__(&self) -> String {
        format!(
            "SymmetricState(n={}, overlap={:.6})",
            self.inner.n(),
            self.inner.overlap()
        )
    }
}

/// Per-depth record of a training run.
#[pyclass(name = "TrainingTrace", frozen)]
struct PyTrainingTrace {
    inner: training::TrainingTrace,
}

#[pymethods]
impl PyTrainingTrace {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn initial_overlap(&self) -> f64 {
        self.inner.initial_overlap
    }

    /// `(γ, β)` per layer.
    #[getter]
    fn schedule(&self) -> Vec<(f64, f64)> {
        self.inner
            .schedule()
            .iter()
            .map(|a| (a.gamma, a.beta))
            .collect()
    }

    #[getter]
    fn overlaps(&self) -> Vec<f64> {
        self.inner.overlaps()
    }

    #[getter]
    fn final_overlap(&self) -> f64 {
        self.inner.final_overlap()
    }

    #[getter]
    fn status(&self) -> &'static str {
        match self.inner.status {
            TrainingStatus::DepthLimit => "depth_limit",
            TrainingStatus::Saturated => "saturated",
            TrainingStatus::Converged => "converged",
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "TrainingTrace(n={}, depth={}, final_overlap={:.6}, status={})",
            self.inner.n,
            self.inner.depth(),
            self.inner.final_overlap(),
            self.status()
        )
    }
}

fn conditions_dict<'py>(py: Python<'py>, c: &ConditionCheck) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("a1_magnitude", c.a1_magnitude)?;
    d.set_item("a2_magnitude", c.a2_magnitude)?;
    d.set_item("a2_bound", c.a2_bound)?;
    d.set_item("condition1_pass", c.condition1_pass)?;
    d.set_item("condition2_pass", c.condition2_pass)?;
    d.set_item("a2_curvature_bound", c.a2_curvature_bound)?;
    d.set_item("curvature_pass", c.curvature_pass)?;
    d.set_item("tolerance", c.tolerance)?;
    Ok(d)
}

/// Runs `[(γ, β), ...]` from `|+⟩^⊗n` in the symmetric subspace.
#[pyfunction]
fn run_schedule(n: usize, schedule: Vec<(f64, f64)>) -> PyResult<PySymmetricState> {
    symcore::run_schedule(n, &schedule_from(&schedule))
        .map(|inner| PySymmetricState { inner })
        .map_err(to_py)
}

/// Target overlap of a schedule on the dense simulator with phase noise.
#[pyfunction]
#[pyo3(signature = (n, schedule, p_noise=0.0, phase_stddev=1.0, seed=0, granularity="layer", kind="phase"))]
fn run_schedule_dense(
    n: usize,
    schedule: Vec<(f64, f64)>,
    p_noise: f64,
    phase_stddev: f64,
    seed: u64,
    granularity: &str,
    kind: &str,
) -> PyResult<f64> {
    let noise = NoiseConfig {
        p_noise,
        phase_stddev,
        seed,
        granularity: parse_granularity(granularity).map_err(to_py)?,
        kind: parse_kind(kind).map_err(to_py)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    densecore::run_schedule_dense(n, &schedule_from(&schedule), &noise, &mut rng)
        .map(|s| s.overlap())
        .map_err(to_py)
}

/// `(g(β), γ*)`: the best next-layer target amplitude at `β` and its `γ`.
#[pyfunction]
fn gamma_eliminated_overlap(state: &PySymmetricState, beta: f64) -> (f64, f64) {
    let ge = symcore::gamma_eliminated_overlap(&state.inner, beta);
    (ge.amplitude, ge.gamma_star)
}

/// `(g'(0⁺), g''(0⁺))` of the γ-eliminated amplitude.
#[pyfunction]
fn saturation_derivatives(state: &PySymmetricState) -> (f64, f64) {
    let d = symcore::saturation_derivatives(&state.inner);
    (d.slope, d.curvature)
}

#[pyfunction]
#[pyo3(signature = (n, depth, beta_grid_points=2048))]
fn train_layerwise(n: usize, depth: usize, beta_grid_points: usize) -> PyResult<PyTrainingTrace> {
    training::train_layerwise(n, depth, &settings(beta_grid_points, 0))
        .map(|inner| PyTrainingTrace { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, depth, fraction, seed=0, beta_grid_points=2048))]
fn train_cutoff(
    n: usize,
    depth: usize,
    fraction: f64,
    seed: u64,
    beta_grid_points: usize,
) -> PyResult<PyTrainingTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    training::train_cutoff(
        n,
        depth,
        fraction,
        &settings(beta_grid_points, seed),
        &mut rng,
    )
    .map(|inner| PyTrainingTrace { inner })
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, depth, p_noise, phase_stddev=1.0, seed=0, granularity="layer", kind="phase"))]
fn train_layerwise_noisy(
    n: usize,
    depth: usize,
    p_noise: f64,
    phase_stddev: f64,
    seed: u64,
    granularity: &str,
    kind: &str,
) -> PyResult<PyTrainingTrace> {
    let noise = NoiseConfig {
        p_noise,
        phase_stddev,
        seed,
        granularity: parse_granularity(granularity).map_err(to_py)?,
        kind: parse_kind(kind).map_err(to_py)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    training::train_layerwise_noisy(n, depth, &noise, &OptimizerSettings::default(), &mut rng)
        .map(|inner| PyTrainingTrace { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, depth, restarts=32, seed=0))]
fn train_global(n: usize, depth: usize, restarts: usize, seed: u64) -> PyResult<PyTrainingTrace> {
    let s = OptimizerSettings {
        global_restarts: restarts,
        seed,
        ..OptimizerSettings::default()
    };
    training::train_global(n, depth, &s)
        .map(|inner| PyTrainingTrace { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (trace, eps_sat=training::DEFAULT_EPS_SAT, eps_one=training::DEFAULT_EPS_ONE))]
fn detect_saturation<'py>(
    py: Python<'py>,
    trace: &PyTrainingTrace,
    eps_sat: f64,
    eps_one: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = analysis::detect_saturation(&trace.inner, eps_sat, eps_one).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("p_star", r.p_star)?;
    d.set_item("overlap_at_p_star", r.overlap_at_p_star)?;
    d.set_item(
        "improvement_at_p_star_plus_1",
        r.improvement_at_p_star_plus_1,
    )?;
    d.set_item("beta_at_p_star_plus_1", r.beta_at_p_star_plus_1)?;
    match &r.conditions {
        Some(c) => d.set_item("conditions", conditions_dict(py, c)?)?,
        None => d.set_item("conditions", py.None())?,
    }
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (state, tol=1e-6))]
fn check_conditions<'py>(
    py: Python<'py>,
    state: &PySymmetricState,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    conditions_dict(py, &analysis::check_conditions(&state.inner, tol))
}

/// `(max_gain, argmax_beta, argmax_gamma)` of one more optimized layer.
#[pyfunction]
fn trainability_probe(state: &PySymmetricState) -> (f64, f64, f64) {
    let p = analysis::trainability_probe(&state.inner, &OptimizerSettings::default());
    (p.max_gain, p.argmax_beta, p.argmax_gamma)
}

#[pyfunction]
#[pyo3(signature = (n, a0, a2, phase0=0.0, phase2=0.0))]
fn make_nontrainable_state(
    n: usize,
    a0: f64,
    a2: f64,
    phase0: f64,
    phase2: f64,
) -> PyResult<PySymmetricState> {
    analysis::make_nontrainable_state(n, a0, a2, (phase0, phase2))
        .map(|inner| PySymmetricState { inner })
        .map_err(to_py)
}

/// Runs a harness experiment from a JSON config object and returns the
/// rendered CSV or JSON text. Missing fields take the kind's defaults.
#[pyfunction]
fn run_experiment(config_json: &str) -> PyResult<String> {
    let config = config_from_json(config_json).map_err(to_py)?;
    let table = harness::run_with_workers(&config).map_err(to_py)?;
    let bytes = table.render(config.format).map_err(to_py)?;
    String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn config_from_json(text: &str) -> Result<ExperimentConfig, satlab::Error> {
    let mut given: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)?;
    let kind = given
        .get("kind")
        .cloned()
        .ok_or_else(|| satlab::Error::Config("config needs a `kind`".into()))?;
    let kind = serde_json::from_value(kind)?;
    let serde_json::Value::Object(mut base) =
        serde_json::to_value(ExperimentConfig::for_kind(kind))?
    else {
        unreachable!("config serializes to an object");
    };
    if let (Some(serde_json::Value::Object(opt)), Some(serde_json::Value::Object(over))) =
        (base.get_mut("optimizer"), given.remove("optimizer"))
    {
        opt.extend(over);
    }
    base.extend(given);
    let config: ExperimentConfig = serde_json::from_value(serde_json::Value::Object(base))
        .map_err(|e| satlab::Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

#[pymodule]
fn satlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymmetricState>()?;
    m.add_class::<PyTrainingTrace>()?;
    m.add_function(wrap_pyfunction!(run_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(run_schedule_dense, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_eliminated_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(saturation_derivatives, m)?)?;
    m.add_function(wrap_pyfunction!(train_layerwise, m)?)?;
    m.add_function(wrap_pyfunction!(train_cutoff, m)?)?;
    m.add_function(wrap_pyfunction!(train_layerwise_noisy, m)?)?;
    m.add_function(wrap_pyfunction!(train_global, m)?)?;
    m.add_function(wrap_pyfunction!(detect_saturation, m)?)?;
    m.add_function(wrap_pyfunction!(check_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(trainability_probe, m)?)?;
    m.add_function(wrap_pyfunction!(make_nontrainable_state, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("MAX_DENSE_QUBITS", densecore::MAX_DENSE_QUBITS)?;
    Ok(())
}
