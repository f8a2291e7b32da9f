//! Command-line driver: configuration ingestion, subcommand dispatch,
//! artifact writing, and the exit-status contract
//! (0 success, 1 config error, 2 verification failure, 3 numerical failure).

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, ExitClass};
use commands::Format;
use config::RunConfig;
use output::write_artifacts;

#[derive(Parser)]
#[command(
    name = "ncosc",
    version,
    about = "Spectral and dynamics engine for the 2D harmonic oscillator in noncommutative phase space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form spectrum table plus the three-way diagonalization crosscheck
    Spectrum(CommonArgs),
    /// Time evolution with per-node observables and the extracted global phase
    Evolve(CommonArgs),
    /// Phase ledger: dynamical/geometric components, both splits, numeric total
    Phases(CommonArgs),
    /// Full verification battery; exit 0 only when every check passes
    Verify(CommonArgs),
    /// Parameter sweeps in long-format tables
    Sweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Tabular artifact format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => ExitClass::ConfigError.code(),
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_class().code()
        }
    }
}

fn dispatch(cli: Cli) -> crate::error::Result<i32> {
    match cli.command {
        Command::Spectrum(args) => {
            let cfg = RunConfig::load(&args.config)?;
            let (artifacts, warnings) = commands::cmd_spectrum(&cfg, args.format.into())?;
            finish("spectrum", &args, &artifacts, &warnings)?;
            Ok(0)
        }
        Command::Evolve(args) => {
            let cfg = RunConfig::load(&args.config)?;
            let (artifacts, warnings) = commands::cmd_evolve(&cfg, args.format.into())?;
            finish("evolve", &args, &artifacts, &warnings)?;
            Ok(0)
        }
        Command::Phases(args) => {
            let cfg = RunConfig::load(&args.config)?;
            let (artifacts, warnings) = commands::cmd_phases(&cfg, args.format.into())?;
            finish("phases", &args, &artifacts, &warnings)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let cfg = RunConfig::load(&args.config)?;
            let (artifacts, warnings) =
                commands::cmd_sweep(&cfg, args.format.into(), args.workers)?;
            finish("sweep", &args, &artifacts, &warnings)?;
            Ok(0)
        }
        Command::Verify(args) => {
            // the verification report is structured JSON regardless of --format
            let cfg = RunConfig::load(&args.config)?;
            let report = crate::verify::run_battery(&cfg);
            for check in &report.config_checks {
                println!(
                    "config check {:<38} {}  (measured {:.3e}, threshold {:.3e})",
                    check.name,
                    if check.passed { "PASS" } else { "FAIL" },
                    check.measured,
                    check.threshold
                );
                if !check.passed {
                    println!("    {}", check.detail);
                }
            }
            for criterion in &report.criteria {
                println!(
                    "criterion {} ({:<32}) {}  [{:.2}s]",
                    criterion.id,
                    criterion.label,
                    if criterion.passed { "PASS" } else { "FAIL" },
                    criterion.runtime_s
                );
                if !criterion.passed {
                    for check in criterion.checks.iter().filter(|c| !c.passed) {
                        println!(
                            "    {}: measured {:.3e} vs threshold {:.3e} — {}",
                            check.name, check.measured, check.threshold, check.detail
                        );
                    }
                }
            }
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            let artifact = output::json_artifact("verify.json", 1, &report)?;
            write_artifacts(&args.out, "verify", &[artifact], &report.warnings)?;
            println!(
                "verification: {}",
                if report.all_passed { "ALL PASS" } else { "FAILED" }
            );
            Ok(if report.all_passed {
                0
            } else {
                ExitClass::VerificationFailure.code()
            })
        }
    }
}

fn finish(
    command: &str,
    args: &CommonArgs,
    artifacts: &[output::Artifact],
    warnings: &[String],
) -> crate::error::Result<()> {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    write_artifacts(&args.out, command, artifacts, warnings)?;
    for artifact in artifacts {
        println!(
            "wrote {} ({} bytes)",
            args.out.join(&artifact.name).display(),
            artifact.bytes.len()
        );
    }
    Ok(())
}

impl From<std::convert::Infallible> for Error {
    fn from(x: std::convert::Infallible) -> Self {
        match x {}
    }
}
