//! `simulate` — drive constrained spin chains with periodic kicks and write
//! the resulting observables as CSV or JSON lines.
//!
//! Usage: `simulate <config-file> [--workers N] [--output PATH] [--format F]`,
//! plus `--list` to enumerate experiments and `--dump-basis` to print the
//! configured many-body basis. Config errors exit with status 1, runtime
//! failures with status 2.

mod config;
mod experiments;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;

use config::{CliError, OutputFormat, EXPERIMENTS};

#[derive(Parser, Debug)]
#[command(
    name = "simulate",
    version,
    about = "Periodically kicked constrained spin chains: subharmonic response, \
             prethermal spectra, scarred-subspace trajectories"
)]
struct Cli {
    /// Experiment configuration file (`key = value` lines).
    config: Option<PathBuf>,
    /// Worker threads for sweeps (default: all available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Write results to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: `csv` (default) or `jsonl`.
    #[arg(long)]
    format: Option<String>,
    /// List the available experiments and exit.
    #[arg(long)]
    list: bool,
    /// Print the many-body basis implied by the config and exit.
    #[arg(long)]
    dump_basis: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => ExitCode::from(1),
                CliError::Runtime(_) => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.list {
        let width = EXPERIMENTS.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, description) in EXPERIMENTS {
            out.push_str(&format!("{name:<width$}  {description}\n"));
        }
        return write_output(None, &out);
    }
    let path = cli.config.as_deref().ok_or_else(|| {
        CliError::Config(
            "missing config file (usage: simulate <config-file>; --list shows experiments)".into(),
        )
    })?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = config::load(&text)?;
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        cfg.workers = Some(workers);
    }
    if let Some(format) = &cli.format {
        cfg.format = match format.as_str() {
            "csv" => OutputFormat::Csv,
            "jsonl" => OutputFormat::Jsonl,
            other => {
                return Err(CliError::Config(format!(
                    "format: unknown value `{other}` (expected csv or jsonl)"
                )))
            }
        };
    }
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if cli.dump_basis {
        let table = experiments::dump_basis(&cfg)?;
        let rendered = experiments::render(&table, cfg.format);
        return write_output(cfg.output.as_deref(), &rendered);
    }
    let started = Instant::now();
    let mut table = experiments::execute(&cfg)?;
    let generated_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    table.push_metadata("generated_at", generated_at);
    table.push_metadata(
        "wall_time_s",
        format!("{:.3}", started.elapsed().as_secs_f64()),
    );
    let rendered = experiments::render(&table, cfg.format);
    write_output(cfg.output.as_deref(), &rendered)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}"))),
    }
}
