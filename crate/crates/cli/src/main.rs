use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use specshift_cli::{
    check, default_output, run_experiment, validate_config, ExperimentKind, RunError, EXIT_CHECK_FAILED, EXIT_ERROR,
    EXIT_OK,
};

/// Run a spectral experiment described by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "specshift", version)]
struct Cli {
    /// Experiment kind (must match the config's `kind`).
    kind: ExperimentKind,
    /// Path to the JSON config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config).
    #[arg(long)]
    threads: Option<usize>,
    /// Disorder seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn main_inner(cli: Cli) -> Result<u8, RunError> {
    let raw = fs::read_to_string(&cli.config)?;
    let (mut cfg, _) = validate_config(&raw)?;
    if cfg.kind != cli.kind {
        return Err(RunError::Range(format!(
            "command asks for `{}` but the config describes `{}`",
            cli.kind, cfg.kind
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.disorder.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    // revalidate after overrides
    let warnings = check(&cfg)?;
    let dir = cli
        .out
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| default_output(cfg.kind));
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let outcome = run_experiment(&cfg, warnings, &dir)?;
    println!("{} -> {}", cfg.kind, dir.display());
    println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
    for c in &outcome.checks {
        println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if outcome.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
