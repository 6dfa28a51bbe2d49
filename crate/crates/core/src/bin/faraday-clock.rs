use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use faraday_clock::config::{Format, RunConfig};
use faraday_clock::readout::ReadoutRegistry;
use faraday_clock::run::{run_bell, run_paths, run_polarimetry, run_scan};
use faraday_clock::Error;

/// Faraday-clock traversal times and Bell correlations for layered dielectric
/// stacks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format (overrides `output.format`; default csv).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Spectral amplitude, traversal times and clock back-action.
    Scan,
    /// Maximal CHSH value against clock splitting.
    Bell,
    /// Multiple-reflection path terms and reconstruction residual.
    Paths,
    /// Polarizer and fringe curves and the selected time read-outs.
    Polarimetry,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let tables = pool.install(|| match cli.command {
        Command::Scan => run_scan(&cfg),
        Command::Bell => run_bell(&cfg),
        Command::Paths => run_paths(&cfg),
        Command::Polarimetry => run_polarimetry(&cfg, &ReadoutRegistry::with_builtins()),
    })?;

    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = cli.format.or(cfg.output.format).unwrap_or_default();
    tables.iter().map(|t| t.write(&dir, format)).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::UnknownReadout(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
