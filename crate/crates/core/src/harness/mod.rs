//! Experiment orchestration: configuration, seeded trial streams and
//! tabular output for the figure-reproduction runs.

mod experiments;
mod table;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::densecore::{NoiseGranularity, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::training::{OptimizerSettings, DEFAULT_EPS_ONE, DEFAULT_EPS_SAT};

pub use experiments::{
    columns, run_betas_experiment, run_compare_experiment, run_conditions_experiment,
    run_cutoff_experiment, run_noise_experiment, run_saturation_experiment, top_fraction, TopStats,
};
pub use table::{Cell, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Saturation,
    Compare,
    Cutoff,
    Noise,
    Betas,
    Conditions,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Saturation,
        ExperimentKind::Compare,
        ExperimentKind::Cutoff,
        ExperimentKind::Noise,
        ExperimentKind::Betas,
        ExperimentKind::Conditions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Saturation => "saturation",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Cutoff => "cutoff",
            ExperimentKind::Noise => "noise",
            ExperimentKind::Betas => "betas",
            ExperimentKind::Conditions => "conditions",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Circuit depth, either fixed or `n + offset`.
///
/// Parsed from and written as `"6"`, `"n"` or `"n+2"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DepthRule {
    Fixed(usize),
    NPlus(usize),
}

impl DepthRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            DepthRule::Fixed(d) => d,
            DepthRule::NPlus(k) => n + k,
        }
    }
}

impl FromStr for DepthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Config(format!("depth must be an integer, `n` or `n+k`, got `{s}`"));
        if t == "n" {
            return Ok(DepthRule::NPlus(0));
        }
        if let Some(k) = t.strip_prefix("n+") {
            return k.parse().map(DepthRule::NPlus).map_err(|_| bad());
        }
        t.parse().map(DepthRule::Fixed).map_err(|_| bad())
    }
}

impl TryFrom<String> for DepthRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DepthRule> for String {
    fn from(d: DepthRule) -> String {
        d.to_string()
    }
}

impl fmt::Display for DepthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthRule::Fixed(d) => write!(f, "{d}"),
            DepthRule::NPlus(0) => f.write_str("n"),
            DepthRule::NPlus(k) => write!(f, "n+{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!(
                "format must be `csv` or `json`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_min: usize,
    pub n_max: usize,
    pub depth: DepthRule,
    pub trials: usize,
    /// Per-qubit noise probabilities swept by the noise experiment.
    pub p_grid: Vec<f64>,
    /// Cutoff fractions swept by the cutoff experiment.
    pub fractions: Vec<f64>,
    pub seed: u64,
    pub phase_stddev: f64,
    pub granularity: NoiseGranularity,
    /// Also run every noise point with bit-flip noise.
    pub bit_flip_contrast: bool,
    pub eps_sat: f64,
    pub eps_one: f64,
    pub optimizer: OptimizerSettings,
    /// Output file; standard output when absent.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl ExperimentConfig {
    /// Defaults reproducing the corresponding figure.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let (n_min, n_max, depth) = match kind {
            ExperimentKind::Saturation => (3, 10, DepthRule::NPlus(2)),
            ExperimentKind::Compare => (4, 4, DepthRule::Fixed(6)),
            ExperimentKind::Cutoff => (4, 4, DepthRule::Fixed(8)),
            ExperimentKind::Noise => (4, 7, DepthRule::NPlus(0)),
            ExperimentKind::Betas => (4, 8, DepthRule::NPlus(1)),
            ExperimentKind::Conditions => (10, 10, DepthRule::NPlus(0)),
        };
        Self {
            kind,
            n_min,
            n_max,
            depth,
            trials: 100,
            p_grid: (0..=20).map(|i| i as f64 / 40.0).collect(),
            fractions: vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0],
            seed: 0,
            phase_stddev: 1.0,
            granularity: NoiseGranularity::Layer,
            bit_flip_contrast: false,
            eps_sat: DEFAULT_EPS_SAT,
            eps_one: DEFAULT_EPS_ONE,
            optimizer: OptimizerSettings::default(),
            out: None,
            format: OutputFormat::Csv,
            workers: 0,
        }
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_min == 0 || self.n_min > self.n_max {
            return fail(format!(
                "need 1 <= n_min <= n_max, got n_min = {}, n_max = {}",
                self.n_min, self.n_max
            ));
        }
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        for n in self.n_range() {
            if self.depth.resolve(n) == 0 {
                return fail(format!("depth resolves to 0 for n = {n}"));
            }
        }
        if self.kind == ExperimentKind::Saturation
            && self.n_range().any(|n| self.depth.resolve(n) < 2)
        {
            return fail("saturation detection needs depth >= 2".into());
        }
        if self.kind == ExperimentKind::Betas
            && self.n_range().any(|n| self.depth.resolve(n) < n + 1)
        {
            return fail("betas experiment needs depth >= n + 1".into());
        }
        if self.p_grid.is_empty() || self.fractions.is_empty() {
            return fail("p_grid and fractions must be non-empty".into());
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return fail(format!("noise probabilities must lie in [0, 1], got {p}"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return fail(format!("cutoff fractions must lie in (0, 1], got {f}"));
        }
        if !(self.phase_stddev >= 0.0 && self.phase_stddev.is_finite()) {
            return fail(format!(
                "phase_stddev must be finite and >= 0, got {}",
                self.phase_stddev
            ));
        }
        if !(self.eps_sat >= 0.0 && self.eps_one >= 0.0) {
            return fail("eps_sat and eps_one must be >= 0".into());
        }
        self.optimizer
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.kind == ExperimentKind::Noise && self.n_max > MAX_DENSE_QUBITS {
            return Err(Error::CapacityExceeded {
                n: self.n_max,
                max: MAX_DENSE_QUBITS,
            });
        }
        Ok(())
    }

    /// Configuration echo written into output metadata. Leaves out fields
    /// that must not change the output bytes (destination and worker count).
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
            map.remove("workers");
        }
        v
    }
}

/// Random stream for one Monte-Carlo trial.
///
/// The ChaCha key is the triple `(master, grid_index, trial)`, so every trial
/// owns an independent stream regardless of which worker runs it.
pub fn trial_rng(master: u64, grid_index: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&grid_index.to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Runs the experiment selected by `config.kind` on the current rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    match config.kind {
        ExperimentKind::Saturation => run_saturation_experiment(config),
        ExperimentKind::Compare => run_compare_experiment(config),
        ExperimentKind::Cutoff => run_cutoff_experiment(config),
        ExperimentKind::Noise => run_noise_experiment(config),
        ExperimentKind::Betas => run_betas_experiment(config),
        ExperimentKind::Conditions => run_conditions_experiment(config),
    }
}

/// Runs the experiment on a dedicated pool of `config.workers` threads.
pub fn run_with_workers(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run(config))
}

/// Runs the experiment and writes it to `config.out` (or standard output).
pub fn execute(config: &ExperimentConfig) -> Result<ResultTable> {
    let table = run_with_workers(config)?;
    let bytes = table.render(config.format)?;
    match &config.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(table)
}
