use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::{Map, Value};

use satlab::harness::{self, columns, DepthRule, ExperimentConfig, ExperimentKind, OutputFormat};
use satlab::Error;

/// Layerwise QAOA saturation laboratory.
///
/// Each subcommand writes one figure's data as CSV (a `# {json}` metadata
/// line, then a header row) or as JSON. Flags override the experiment
/// defaults; values in `--config <file>` override flags.
#[derive(Parser)]
#[command(name = "satlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Layerwise traces to depth n+2 with the detected saturation depth p*.
    Saturation(Flags),
    /// Layerwise versus globally trained overlap profile.
    Compare(Flags),
    /// Overlap-cutoff training, top-10% statistics per fraction.
    Cutoff(Flags),
    /// Layerwise training under coherent phase noise, top-10% per probability.
    Noise(Flags),
    /// β schedule of depth-(n+1) layerwise runs.
    Betas(Flags),
    /// Dicke amplitude moduli before and after layerwise training.
    Conditions(Flags),
}

impl Command {
    fn split(self) -> (ExperimentKind, Flags) {
        match self {
            Command::Saturation(f) => (ExperimentKind::Saturation, f),
            Command::Compare(f) => (ExperimentKind::Compare, f),
            Command::Cutoff(f) => (ExperimentKind::Cutoff, f),
            Command::Noise(f) => (ExperimentKind::Noise, f),
            Command::Betas(f) => (ExperimentKind::Betas, f),
            Command::Conditions(f) => (ExperimentKind::Conditions, f),
        }
    }
}

#[derive(Args, Default)]
struct Flags {
    /// Single qubit count (sets both --n-min and --n-max).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Depth: an integer, `n` or `n+k`.
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated noise probabilities.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Comma-separated cutoff fractions.
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Standard deviation of the phase-noise angle.
    #[arg(long)]
    phase_stddev: Option<f64>,
    /// `layer` or `single_qubit`.
    #[arg(long)]
    granularity: Option<String>,
    /// Add a bit-flip contrast column to the noise experiment.
    #[arg(long)]
    bit_flip_contrast: bool,
    #[arg(long)]
    eps_sat: Option<f64>,
    #[arg(long)]
    eps_one: Option<f64>,
    #[arg(long)]
    beta_grid_points: Option<usize>,
    #[arg(long)]
    global_restarts: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv` or `json`.
    #[arg(long)]
    format: Option<String>,
    /// Shorthand for `--format json`.
    #[arg(long)]
    json: bool,
    /// Worker threads (0 = all cores). Does not change the output.
    #[arg(long)]
    workers: Option<usize>,
    /// JSON file with ExperimentConfig fields; overrides flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn apply_flags(cfg: &mut ExperimentConfig, f: &Flags) -> Result<(), Error> {
    if let Some(n) = f.n {
        cfg.n_min = n;
        cfg.n_max = n;
    }
    if let Some(v) = f.n_min {
        cfg.n_min = v;
    }
    if let Some(v) = f.n_max {
        cfg.n_max = v;
    }
    if let Some(d) = &f.depth {
        cfg.depth = d.parse::<DepthRule>()?;
    }
    if let Some(v) = f.trials {
        cfg.trials = v;
    }
    if let Some(v) = &f.p_grid {
        cfg.p_grid = v.clone();
    }
    if let Some(v) = &f.fractions {
        cfg.fractions = v.clone();
    }
    if let Some(v) = f.seed {
        cfg.seed = v;
    }
    if let Some(v) = f.phase_stddev {
        cfg.phase_stddev = v;
    }
    if let Some(g) = &f.granularity {
        cfg.granularity = serde_json::from_value(Value::String(g.clone()))
            .map_err(|_| Error::Config(format!("unknown granularity `{g}`")))?;
    }
    if f.bit_flip_contrast {
        cfg.bit_flip_contrast = true;
    }
    if let Some(v) = f.eps_sat {
        cfg.eps_sat = v;
    }
    if let Some(v) = f.eps_one {
        cfg.eps_one = v;
    }
    if let Some(v) = f.beta_grid_points {
        cfg.optimizer.beta_grid_points = v;
    }
    if let Some(v) = f.global_restarts {
        cfg.optimizer.global_restarts = v;
    }
    if let Some(v) = &f.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = &f.format {
        cfg.format = v.parse::<OutputFormat>()?;
    }
    if f.json {
        cfg.format = OutputFormat::Json;
    }
    if let Some(v) = f.workers {
        cfg.workers = v;
    }
    Ok(())
}

fn merge(base: &mut Map<String, Value>, over: Map<String, Value>) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Object(b)), Value::Object(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn build_config(kind: ExperimentKind, flags: &Flags) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::for_kind(kind);
    apply_flags(&mut cfg, flags)?;
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let Value::Object(file) = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        else {
            return Err(Error::Config(format!(
                "{}: expected a JSON object",
                path.display()
            )));
        };
        if let Some(k) = file.get("kind") {
            if k != kind.name() {
                return Err(Error::Config(format!(
                    "{}: kind {k} does not match subcommand `{kind}`",
                    path.display()
                )));
            }
        }
        let Value::Object(mut base) = serde_json::to_value(&cfg)? else {
            unreachable!("config serializes to an object");
        };
        merge(&mut base, file);
        cfg = serde_json::from_value(Value::Object(base))
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn schema_help(kind: ExperimentKind) -> String {
    let mut s = format!("Output columns: {}\n", columns(kind).join(", "));
    let defaults = ExperimentConfig::for_kind(kind);
    s.push_str(&format!(
        "Defaults: n = {}..{}, depth = {}",
        defaults.n_min, defaults.n_max, defaults.depth
    ));
    if matches!(kind, ExperimentKind::Cutoff | ExperimentKind::Noise) {
        s.push_str(&format!(", trials = {}", defaults.trials));
    }
    s.push('\n');
    s.push_str(match kind {
        ExperimentKind::Saturation => {
            "p_star is empty when no layer stalls below 1 - eps_one. Metadata summary: \
             saturation report per n."
        }
        ExperimentKind::Compare => {
            "The greedy schedule is seeded as one global restart. Metadata summary: \
             largest layerwise lead and final gap per n."
        }
        ExperimentKind::Cutoff => {
            "top_* summarize the ceil(0.1 trials) best final overlaps; baseline is plain \
             layerwise training at the same depth."
        }
        ExperimentKind::Noise => {
            "Default p_grid: 21 points on [0, 0.5]. noiseless is layerwise training at the \
             same depth; bitflip_top_best is empty unless --bit-flip-contrast."
        }
        ExperimentKind::Betas => "Metadata summary: beta schedule statistics per n.",
        ExperimentKind::Conditions => {
            "initial_abs and final_abs are |A_k| before and after training. Metadata \
             summary: saturation condition check per n."
        }
    });
    s.push_str("\nExit codes: 0 success, 1 config error, 2 dense qubit cap exceeded.");
    s
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapacityExceeded { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let mut cmd = Cli::command();
    for kind in ExperimentKind::ALL {
        cmd = cmd.mut_subcommand(kind.name(), |sub| sub.after_help(schema_help(kind)));
    }
    let cli = match cmd
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (kind, flags) = cli.command.split();
    let result = build_config(kind, &flags).and_then(|cfg| harness::execute(&cfg));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("satlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_then_file_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"trials": 7, "optimizer": {"noisy_starts": 2}}"#).unwrap();
        let flags = Flags {
            trials: Some(3),
            seed: Some(11),
            depth: Some("n+1".into()),
            config: Some(path),
            ..Flags::default()
        };
        let cfg = build_config(ExperimentKind::Noise, &flags).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.depth, DepthRule::NPlus(1));
        assert_eq!(cfg.optimizer.noisy_starts, 2);
        assert_eq!(cfg.optimizer.beta_grid_points, 2048);
    }

    #[test]
    fn bad_configs_map_to_exit_codes() {
        let flags = Flags {
            n: Some(30),
            ..Flags::default()
        };
        let e = build_config(ExperimentKind::Noise, &flags).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let flags = Flags {
            depth: Some("deep".into()),
            ..Flags::default()
        };
        let e = build_config(ExperimentKind::Betas, &flags).unwrap_err();
        assert_eq!(exit_code(&e), 1);
    }
}
