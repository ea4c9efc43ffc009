use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use lens_crlb_cli::check::{run_check, CheckOptions};
use lens_crlb_cli::montecarlo::run_montecarlo;
use lens_crlb_cli::plot::emit_plot;
use lens_crlb_cli::sweep::{run_sweep, SweepResult};
use lens_crlb_cli::{CliError, ExperimentConfig, Result};

const THREADS_VAR: &str = "LENS_CRLB_THREADS";

/// Cramér-Rao bounds for direction finding with a lens-embedded array.
#[derive(Debug, Parser)]
#[command(name = "lens-crlb", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate lens and bare-array bounds over the configured grid.
    Sweep {
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run ML Monte Carlo campaigns and compare against the bound.
    Mc {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized invariant suite; exits 2 on the first failing check.
    Check {
        #[arg(long, default_value_t = CheckOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = CheckOptions::default().draws)]
        draws: usize,
        #[arg(long, default_value_t = CheckOptions::default().positivity_draws)]
        positivity_draws: usize,
    },
    /// Render a sweep CSV as SVG.
    Plot { sweep: PathBuf, out: PathBuf },
}

/// Parses the thread cap; `None` leaves rayon's default pool in place.
fn parse_threads(raw: Option<&str>) -> Result<Option<usize>> {
    let Some(raw) = raw else {
        return Ok(None);
    };
    raw.trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .map(Some)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))
}

fn configure_threads() -> Result<()> {
    let raw = std::env::var(THREADS_VAR).ok();
    let Some(threads) = parse_threads(raw.as_deref())? else {
        return Ok(());
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Numerical(format!("cannot size thread pool: {e}")))
}

/// Help and version requests succeed; any other usage error counts as an
/// invalid configuration.
fn usage_exit_code(e: &clap::Error) -> u8 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
        _ => 1,
    }
}

fn out_dir(config: &ExperimentConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| config.output.directory.clone())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let output = run_sweep(&cfg, &out_dir(&cfg, out))?;
            println!("{} rows -> {}", output.result.rows.len(), output.csv_path.display());
            if let Some(svg) = output.svg_path {
                println!("plot -> {}", svg.display());
            }
        }
        Command::Mc { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (rows, path) = run_montecarlo(&cfg, &out_dir(&cfg, out))?;
            for r in &rows {
                println!(
                    "sigma_c {:<10.4} snr {:>5.1} dB  variance {:.4e}  crlb {:.4e}  efficiency {:.3}",
                    r.sigma_c, r.snr_db, r.doa_variance, r.crlb, r.efficiency
                );
            }
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::Check {
            seed,
            draws,
            positivity_draws,
        } => {
            let report = run_check(CheckOptions {
                seed,
                draws,
                positivity_draws,
            });
            print!("{}", report.summary());
            if !report.passed() {
                return Err(CliError::Numerical("invariant suite failed".into()));
            }
        }
        Command::Plot { sweep, out } => {
            plot(&sweep, &out)?;
            println!("plot -> {}", out.display());
        }
    }
    Ok(())
}

fn plot(sweep: &Path, out: &Path) -> Result<()> {
    emit_plot(&SweepResult::read(sweep)?, out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(usage_exit_code(&e));
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
