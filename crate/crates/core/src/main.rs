use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use anosov_entropy::scenario::{
    load_config, run_scenario, run_sweep, validate_config, CliError, ScenarioConfig,
};

#[derive(Debug, Parser)]
#[command(name = "anosov-entropy", version, about = "Reduced-entropy growth of Gaussian states under quadratic dynamics")]
struct Cli {
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Sweep worker threads; overrides `sweep.workers`. 0 uses every processor.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Accepted and ignored: every run is deterministic, there is no seed.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its series and summary.
    Run { config: PathBuf },
    /// Evaluate a 1- or 2-axis parameter grid and write one row per point.
    Sweep { config: PathBuf },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn out_dir(cli: &Cli, cfg: &ScenarioConfig) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config } => {
            let (cfg, _) = load_config(config)?;
            let dir = out_dir(cli, &cfg);
            let eval = run_scenario(&cfg, &dir)?;
            println!(
                "{}",
                serde_json::json!({
                    "status": "ok",
                    "summary": dir.join(&cfg.output.summary),
                    "samples": eval.series.as_ref().map_or(0, |s| s.len()),
                })
            );
        }
        Command::Sweep { config } => {
            let (cfg, raw) = load_config(config)?;
            let dir = out_dir(cli, &cfg);
            let result = run_sweep(&raw, &cfg, cli.workers, Some(&dir))?;
            let failed = result.rows.iter().filter(|r| r.point.failure.is_some()).count();
            println!(
                "{}",
                serde_json::json!({
                    "status": "ok",
                    "table": dir.join(&cfg.output.table),
                    "points": result.rows.len(),
                    "failed_points": failed,
                })
            );
        }
        Command::Validate { config } => validate(config)?,
    }
    Ok(())
}

fn validate(path: &Path) -> Result<(), CliError> {
    let (cfg, _) = load_config(path)?;
    validate_config(&cfg)?;
    println!(
        "{}",
        serde_json::json!({ "status": "valid", "kind": cfg.model.kind() })
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
