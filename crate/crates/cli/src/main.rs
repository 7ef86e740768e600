use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use postadc_cli::{cmd_dump_constraints, cmd_infer, cmd_scan_verify, cmd_sweep, cmd_toy_check, load_grid, CliError};

#[derive(Parser)]
#[command(
    name = "postadc",
    version,
    about = "Selective inference after active data collection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print progress and summaries to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// `key=value` overrides, applied after the file.
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline and report every requested method.
    Infer {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a Monte Carlo sweep and write replicate and aggregate tables.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory receiving replicates.csv and aggregate.csv.
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Check the three-candidate example against its closed forms.
    ToyCheck {
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare truncation sets with brute-force replay on small instances.
    ScanVerify {
        #[command(flatten)]
        config: ConfigArgs,
        /// Perturb one binding constraint per instance (negative control).
        #[arg(long, hide = true)]
        corrupt_constraint: bool,
    },
    /// Write the linear constraints of one observed event.
    DumpConstraints {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn sink(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Infer { config, output } => {
            let grid = load_grid(config.config.as_deref(), &config.overrides)?;
            let mut out = sink(output.as_ref())?;
            cmd_infer(&grid, &mut out)?;
            out.flush()?;
        }
        Command::Sweep { config, output } => {
            let grid = load_grid(config.config.as_deref(), &config.overrides)?;
            let runs = cmd_sweep(&grid, &output)?;
            if cli.verbose > 0 {
                for run in &runs {
                    for agg in &run.aggregates {
                        eprintln!(
                            "config {} {}: reject {:.4} cover {:.4} (n = {}, skipped {})",
                            run.point.id,
                            agg.method.name(),
                            agg.reject_rate,
                            agg.coverage_rate,
                            agg.n_effective,
                            agg.n_skipped
                        );
                    }
                }
            }
        }
        Command::ToyCheck { draws, seed } => {
            let report = cmd_toy_check(draws, seed, &mut io::stdout().lock())?;
            if !report.passed() {
                return Err(CliError::Verification(format!(
                    "{} toy mismatches",
                    report.failures.len()
                )));
            }
        }
        Command::ScanVerify {
            config,
            corrupt_constraint,
        } => {
            let grid = load_grid(config.config.as_deref(), &config.overrides)?;
            let report = cmd_scan_verify(&grid, corrupt_constraint, &mut io::stdout().lock())?;
            if !report.passed() {
                return Err(CliError::Verification(format!("{} scan mismatches", report.mismatches)));
            }
        }
        Command::DumpConstraints { config, output } => {
            let grid = load_grid(config.config.as_deref(), &config.overrides)?;
            let mut out = sink(output.as_ref())?;
            let n = cmd_dump_constraints(&grid, &mut out)?;
            out.flush()?;
            if cli.verbose > 0 {
                eprintln!("{n} constraints");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("postadc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
