use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use q4nls_cli::{load_config, run_with_workers, Overrides, RunError, ValidationError};

/// Run a named q4nls experiment from a TOML config.
#[derive(Debug, Parser)]
#[command(name = "q4nls", version)]
struct Cli {
    /// Experiment name, e.g. `tail-hgamma` or `scatter`.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to Q4NLS_WORKERS, then the core count.
    #[arg(long, env = "Q4NLS_WORKERS")]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("q4nls: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<PathBuf, RunError> {
    let overrides = Overrides {
        experiment: Some(cli.experiment.clone()),
        seed: cli.seed,
        output_dir: cli.out.clone(),
    };
    let cfg = load_config(&cli.config, &overrides)?;
    let workers = match cli.workers {
        Some(0) => return Err(ValidationError::new("workers", "must be at least 1").into()),
        Some(k) => k,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let manifest = run_with_workers(&cfg, workers)?;
    Ok(manifest.output_dir)
}
