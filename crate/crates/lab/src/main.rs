use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ricci_lab::config::{ConfigError, ScenarioConfig};
use ricci_lab::report::emit_report;
use ricci_lab::scenario::{run_scenario, ScenarioError, ScenarioKind};

#[derive(Parser)]
#[command(name = "ricci-lab", version, about = "Ricci-flow uniqueness laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Flags {
    /// Flat TOML scenario file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    resolution: Option<usize>,
    #[arg(long, value_name = "FLOAT")]
    sigma: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the difference identities on seeded random pairs.
    VerifyIdentities(Flags),
    /// Integrate a family and compare with its closed form.
    Flow(Flags),
    /// Energies and Gronwall certificate of a perturbed pair.
    Energy(Flags),
    /// Energies between two solutions with the same initial data.
    Uniqueness(Flags),
    /// Curvature-rate monitor along a flow.
    BlowupMonitor(Flags),
    /// Time-refinement study of the energy between two integrations.
    ConvergenceStudy(Flags),
}

impl Command {
    fn split(self) -> (ScenarioKind, Flags) {
        match self {
            Command::VerifyIdentities(f) => (ScenarioKind::VerifyIdentities, f),
            Command::Flow(f) => (ScenarioKind::Flow, f),
            Command::Energy(f) => (ScenarioKind::Energy, f),
            Command::Uniqueness(f) => (ScenarioKind::Uniqueness, f),
            Command::BlowupMonitor(f) => (ScenarioKind::BlowupMonitor, f),
            Command::ConvergenceStudy(f) => (ScenarioKind::ConvergenceStudy, f),
        }
    }
}

fn load(flags: &Flags) -> Result<(ScenarioConfig, PathBuf), ConfigError> {
    let mut cfg = match &flags.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if flags.seed.is_some() {
        cfg.seed = flags.seed;
    }
    if let Some(n) = flags.resolution {
        cfg.resolution = n;
    }
    if let Some(s) = flags.sigma {
        cfg.sigma = s;
    }
    if let Some(o) = &flags.out {
        cfg.out = Some(o.display().to_string());
    }
    let out = PathBuf::from(cfg.out.clone().unwrap_or_else(|| "out".into()));
    Ok((cfg, out))
}

/// Worker count from `LAB_THREADS`; unset means rayon's default.
fn threads() -> Result<Option<usize>, ConfigError> {
    match std::env::var("LAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Field {
                field: "LAB_THREADS".into(),
                reason: format!("expected a positive integer, got {v:?}"),
            }),
        },
    }
}

fn run(kind: ScenarioKind, flags: Flags) -> Result<bool, (i32, String)> {
    let config_error = |e: ConfigError| (2, format!("config error: {e}"));
    let (cfg, out_dir) = load(&flags).map_err(config_error)?;
    if let Some(n) = threads().map_err(config_error)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (1, format!("cannot start {n} workers: {e}")))?;
    }
    let outcome = run_scenario(kind, &cfg).map_err(|e: ScenarioError| (e.exit_code(), e.to_string()))?;
    emit_report(&out_dir, &outcome, &cfg).map_err(|e| (1, format!("cannot write {}: {e}", out_dir.display())))?;
    for c in &outcome.checks {
        println!("{} {}: {:e} (bound {:e}) {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound, c.detail);
    }
    println!("{}: {}", outcome.scenario, outcome.status());
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let (kind, flags) = Cli::parse().command.split();
    match run(kind, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code as u8)
        }
    }
}
