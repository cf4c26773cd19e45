use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::{trial_rng, Cell, ExperimentConfig, ExperimentKind, ResultTable};
use crate::analysis::{beta_schedule_stats, check_conditions, detect_saturation};
use crate::densecore::{NoiseConfig, NoiseKind};
use crate::error::{Error, Result};
use crate::symcore::{run_schedule, SymmetricState};
use crate::training::{
    train_cutoff, train_global_seeded, train_layerwise, train_layerwise_noisy, TrainingTrace,
};

const SATURATION_COLUMNS: &[&str] = &[
    "n",
    "depth",
    "gamma",
    "beta",
    "overlap",
    "improvement",
    "p_star",
];
const COMPARE_COLUMNS: &[&str] = &[
    "n",
    "depth",
    "layerwise_overlap",
    "global_overlap",
    "layerwise_gamma",
    "layerwise_beta",
    "global_gamma",
    "global_beta",
];
const CUTOFF_COLUMNS: &[&str] = &[
    "n",
    "depth",
    "fraction",
    "trials",
    "top_count",
    "top_best",
    "top_mean",
    "top_worst",
    "baseline",
];
const NOISE_COLUMNS: &[&str] = &[
    "n",
    "depth",
    "p_noise",
    "trials",
    "top_count",
    "top_best",
    "top_mean",
    "top_worst",
    "noiseless",
    "bitflip_top_best",
];
const BETAS_COLUMNS: &[&str] = &["n", "layer", "gamma", "beta", "overlap"];
const CONDITIONS_COLUMNS: &[&str] = &["n", "depth", "k", "initial_abs", "final_abs"];

/// Column schema of each experiment kind.
pub fn columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Saturation => SATURATION_COLUMNS,
        ExperimentKind::Compare => COMPARE_COLUMNS,
        ExperimentKind::Cutoff => CUTOFF_COLUMNS,
        ExperimentKind::Noise => NOISE_COLUMNS,
        ExperimentKind::Betas => BETAS_COLUMNS,
        ExperimentKind::Conditions => CONDITIONS_COLUMNS,
    }
}

/// Best, mean and worst of the top `ceil(0.1 · trials)` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopStats {
    pub count: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
}

pub fn top_fraction(values: &[f64], fraction: f64) -> Option<TopStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let count = ((fraction * values.len() as f64).ceil() as usize).clamp(1, values.len());
    let top = &sorted[..count];
    Some(TopStats {
        count,
        best: top[0],
        mean: top.iter().sum::<f64>() / count as f64,
        worst: top[count - 1],
    })
}

fn top_ten_percent(values: &[f64]) -> Result<TopStats> {
    top_fraction(values, 0.1).ok_or_else(|| Error::Config("no trials to summarize".into()))
}

fn metadata(config: &ExperimentConfig, summary: Value) -> Value {
    json!({
        "artifact": "satlab",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": config.kind,
        "seed": config.seed,
        "columns": columns(config.kind),
        "config": config.echo(),
        "summary": summary,
    })
}

fn check_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::Config(format!(
            "config kind is `{}`, expected `{kind}`",
            config.kind
        )));
    }
    config.validate()
}

/// Layerwise traces for every `n` in range, computed in parallel.
fn layerwise_traces(config: &ExperimentConfig) -> Result<Vec<TrainingTrace>> {
    config
        .n_range()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| train_layerwise(n, config.depth.resolve(n), &config.optimizer))
        .collect()
}

pub fn run_saturation_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    check_kind(config, ExperimentKind::Saturation)?;
    let traces = layerwise_traces(config)?;
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for trace in &traces {
        let report = detect_saturation(trace, config.eps_sat, config.eps_one)?;
        summary.insert(trace.n.to_string(), serde_json::to_value(&report)?);
        let mut prev = trace.initial_overlap;
        for (i, layer) in trace.layers.iter().enumerate() {
            rows.push(vec![
                trace.n.into(),
                (i + 1).into(),
                layer.angles.gamma.into(),
                layer.angles.beta.into(),
                layer.overlap.into(),
                (layer.overlap - prev).into(),
                report.p_star.into(),
            ]);
            prev = layer.overlap;
        }
    }
    build(config, Value::Object(summary), rows)
}

pub fn run_compare_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    check_kind(config, ExperimentKind::Compare)?;
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for n in config.n_range() {
        let depth = config.depth.resolve(n);
        let layerwise = train_layerwise(n, depth, &config.optimizer)?;
        let mut settings = config.optimizer;
        settings.seed = trial_rng(config.seed, n as u64, 0).random();
        let global = train_global_seeded(n, depth, &settings, &[layerwise.schedule()])?;
        let crossing = layerwise
            .overlaps()
            .iter()
            .zip(global.overlaps())
            .map(|(l, g)| l - g)
            .fold(f64::NEG_INFINITY, f64::max);
        summary.insert(
            n.to_string(),
            json!({
                "max_layerwise_lead": crossing,
                "final_gap": global.final_overlap() - layerwise.final_overlap(),
            }),
        );
        for (c, (l, g)) in layerwise.layers.iter().zip(&global.layers).enumerate() {
            rows.push(vec![
                n.into(),
                (c + 1).into(),
                l.overlap.into(),
                g.overlap.into(),
                l.angles.gamma.into(),
                l.angles.beta.into(),
                g.angles.gamma.into(),
                g.angles.beta.into(),
            ]);
        }
    }
    build(config, Value::Object(summary), rows)
}

pub fn run_cutoff_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    check_kind(config, ExperimentKind::Cutoff)?;
    let ns: Vec<usize> = config.n_range().collect();
    let baselines = layerwise_traces(config)?;
    let nf = config.fractions.len();
    let jobs: Vec<(usize, usize, usize)> = (0..ns.len())
        .flat_map(|i| (0..nf).flat_map(move |j| (0..config.trials).map(move |t| (i, j, t))))
        .collect();
    let finals: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j, t)| {
            let n = ns[i];
            let mut rng = trial_rng(config.seed, (i * nf + j) as u64, t as u64);
            train_cutoff(
                n,
                config.depth.resolve(n),
                config.fractions[j],
                &config.optimizer,
                &mut rng,
            )
            .map(|trace| trace.final_overlap())
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        for (j, &f) in config.fractions.iter().enumerate() {
            let start = (i * nf + j) * config.trials;
            let stats = top_ten_percent(&finals[start..start + config.trials])?;
            rows.push(vec![
                n.into(),
                config.depth.resolve(n).into(),
                f.into(),
                config.trials.into(),
                stats.count.into(),
                stats.best.into(),
                stats.mean.into(),
                stats.worst.into(),
                baselines[i].final_overlap().into(),
            ]);
        }
    }
    build(config, Value::Null, rows)
}

pub fn run_noise_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    check_kind(config, ExperimentKind::Noise)?;
    let ns: Vec<usize> = config.n_range().collect();
    let baselines = layerwise_traces(config)?;
    let np = config.p_grid.len();
    let kinds: &[NoiseKind] = if config.bit_flip_contrast {
        &[NoiseKind::Phase, NoiseKind::BitFlip]
    } else {
        &[NoiseKind::Phase]
    };
    let cells = ns.len() * np;
    let jobs: Vec<(usize, usize, usize, usize)> = (0..kinds.len())
        .flat_map(|k| {
            (0..ns.len()).flat_map(move |i| {
                (0..np).flat_map(move |j| (0..config.trials).map(move |t| (k, i, j, t)))
            })
        })
        .collect();
    let finals: Vec<f64> = jobs
        .par_iter()
        .map(|&(k, i, j, t)| {
            let n = ns[i];
            let noise = NoiseConfig {
                p_noise: config.p_grid[j],
                phase_stddev: config.phase_stddev,
                seed: config.seed,
                granularity: config.granularity,
                kind: kinds[k],
            };
            let grid_index = (k * cells + i * np + j) as u64;
            let mut rng = trial_rng(config.seed, grid_index, t as u64);
            train_layerwise_noisy(
                n,
                config.depth.resolve(n),
                &noise,
                &config.optimizer,
                &mut rng,
            )
            .map(|trace| trace.final_overlap())
        })
        .collect::<Result<_>>()?;

    let block = |k: usize, i: usize, j: usize| {
        let start = ((k * cells) + i * np + j) * config.trials;
        top_ten_percent(&finals[start..start + config.trials])
    };
    let mut rows = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        for (j, &p) in config.p_grid.iter().enumerate() {
            let stats = block(0, i, j)?;
            let contrast = if config.bit_flip_contrast {
                Cell::Num(block(1, i, j)?.best)
            } else {
                Cell::Empty
            };
            rows.push(vec![
                n.into(),
                config.depth.resolve(n).into(),
                p.into(),
                config.trials.into(),
                stats.count.into(),
                stats.best.into(),
                stats.mean.into(),
                stats.worst.into(),
                baselines[i].final_overlap().into(),
                contrast,
            ]);
        }
    }
    build(config, Value::Null, rows)
}

pub fn run_betas_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    check_kind(config, ExperimentKind::Betas)?;
    let traces = layerwise_traces(config)?;
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for trace in &traces {
        summary.insert(
            trace.n.to_string(),
            serde_json::to_value(beta_schedule_stats(trace)?)?,
        );
        for (i, layer) in trace.layers.iter().enumerate() {
            rows.push(vec![
                trace.n.into(),
                (i + 1).into(),
                layer.angles.gamma.into(),
                layer.angles.beta.into(),
                layer.overlap.into(),
            ]);
        }
    }
    build(config, Value::Object(summary), rows)
}

pub fn run_conditions_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    check_kind(config, ExperimentKind::Conditions)?;
    let traces = layerwise_traces(config)?;
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for trace in &traces {
        let n = trace.n;
        let initial = SymmetricState::plus(n)?;
        let output = run_schedule(n, &trace.schedule())?;
        summary.insert(
            n.to_string(),
            json!({
                "initial_overlap": initial.overlap(),
                "final_overlap": output.overlap(),
                "conditions": check_conditions(&output, 1e-6),
            }),
        );
        for k in 0..=n {
            rows.push(vec![
                n.into(),
                trace.depth().into(),
                k.into(),
                initial.amp(k).norm().into(),
                output.amp(k).norm().into(),
            ]);
        }
    }
    build(config, Value::Object(summary), rows)
}

fn build(config: &ExperimentConfig, summary: Value, rows: Vec<Vec<Cell>>) -> Result<ResultTable> {
    let mut table = ResultTable::new(config.kind, columns(config.kind), metadata(config, summary));
    for row in rows {
        table.push(row)?;
    }
    Ok(table)
}
