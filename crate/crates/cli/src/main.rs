use clap::{Parser, Subcommand};
use sensebench::config::ExperimentConfig;
use sensebench::experiments::{run_experiment, RunError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Shot-budgeted noisy phase-estimation workbench: simulate GHZ
/// magnetometry protocols, compare their errors against the SQL and HL,
/// and evaluate the matching analytic bounds.
#[derive(Parser)]
#[command(name = "sensebench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV + manifest.
    Run {
        config: PathBuf,
        /// Output directory (default: $SENSEBENCH_OUT, then the current dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Output bytes do not depend
        /// on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and semantically check a config without running it.
    Validate { config: PathBuf },
}

fn read_config(path: &Path) -> Result<(ExperimentConfig, String, String, PathBuf), RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let config = ExperimentConfig::parse(&text).map_err(RunError::Config)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("experiment")
        .to_string();
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((config, text, stem, dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => run(config, out, threads, seed),
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ RunError::Config(_)) => {
            eprintln!("{err}");
            ExitCode::from(1)
        }
        Err(err @ RunError::Runtime(_)) => {
            eprintln!("{err}");
            ExitCode::from(2)
        }
    }
}

fn run(
    path: PathBuf,
    out: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
) -> Result<(), RunError> {
    if let Some(count) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global()
            .map_err(|e| RunError::Runtime(e.to_string()))?;
    }
    let (mut config, text, stem, config_dir) = read_config(&path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let out_dir = out
        .or_else(|| config.out.clone())
        .or_else(|| std::env::var_os("SENSEBENCH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let artifacts = run_experiment(&config, &text, &stem, &config_dir, &out_dir)?;
    println!("wrote {}", artifacts.csv.display());
    println!("wrote {}", artifacts.manifest.display());
    Ok(())
}

fn validate(path: PathBuf) -> Result<(), RunError> {
    let (config, _, _, config_dir) = read_config(&path)?;
    config.validate(&config_dir).map_err(RunError::Config)?;
    println!("ok: {}", path.display());
    Ok(())
}
