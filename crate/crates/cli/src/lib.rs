//! Command-line front end: configuration parsing, verification runs with
//! JSON reports, CSV field exports and the model/verifier registries.

pub mod config;
pub mod export;
pub mod run;

pub use config::{ExportEntry, ExportField, OutputConfig, RunConfig, Verbosity};
pub use export::{sample_field, FieldSamples};
pub use run::{run_config, RunReport, RunVerdict};

use anyhow::{Context, Result};
use bicontact_core::manifolds::{build_model, list_models};
use bicontact_core::verifiers::list_verifiers;
use bicontact_core::SampleGrid;
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Exit code for configuration and evaluation errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bicontact",
    version,
    about = "Numerical checks of Anosov flows, bi-contact pairs and their growth rates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured verifiers and write a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        workers: Option<usize>,
        /// Seed for every verifier, replacing the configured ones.
        #[arg(long)]
        seed: Option<u64>,
        /// Report path (overrides `output.report`; `-` for stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock runtimes (makes reports non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Sample fields of the configured model on a grid and write CSV.
    Export {
        #[arg(long)]
        config: PathBuf,
        /// Export only this field (r_s, r_u, div, contact, contact_minus,
        /// domination) instead of the configured exports.
        #[arg(long)]
        field: Option<String>,
        /// Lattice points per axis for `--field`.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV path for `--field` (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in models.
    ListModels,
    /// List the registered verifiers.
    ListVerifiers,
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .context("cannot start the worker pool")?;
    Ok(pool.install(f))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load(config: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.override_seed(s);
    }
    Ok(cfg)
}

fn run_command(
    config: &Path,
    workers: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    timings: bool,
) -> Result<i32> {
    let cfg = load(config, seed)?;
    let report = with_workers(workers, || run_config(&cfg, timings))??;
    let path = out.or_else(|| cfg.output.report.clone());
    write_output(path.as_deref(), &report.to_json())?;
    if cfg.output.verbosity != Verbosity::Quiet {
        for run in &report.runs {
            match &run.error {
                Some(e) => eprintln!("{}: error: {e}", run.id),
                None => {
                    for r in &run.reports {
                        eprintln!("{} [{}]: {:?}", run.id, r.subject, r.verdict);
                        if cfg.output.verbosity == Verbosity::Verbose {
                            for res in r.residuals.iter().filter(|x| !x.passed) {
                                eprintln!(
                                    "  residual {} = {:e} (tolerance {:e})",
                                    res.name, res.value, res.tolerance
                                );
                            }
                            for m in r.margins.iter().filter(|x| !x.passed) {
                                eprintln!("  margin {} = {:e} (threshold {:e})", m.name, m.value, m.threshold);
                            }
                        }
                    }
                }
            }
        }
        eprintln!("overall: {:?}", report.summary.verdict);
    }
    Ok(report.summary.verdict.exit_code())
}

fn export_command(
    config: &Path,
    field: Option<&str>,
    grid: usize,
    workers: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<i32> {
    let cfg = load(config, seed)?;
    let entries: Vec<(ExportField, SampleGrid, Option<PathBuf>)> = match field {
        Some(name) => {
            let g = SampleGrid::new(grid, 0, cfg.defaults.seed);
            if g.is_empty() {
                anyhow::bail!("--grid must be positive");
            }
            vec![(ExportField::parse(name)?, g, out)]
        }
        None => {
            if cfg.exports.is_empty() {
                anyhow::bail!("the configuration has no [[exports]]; pass --field to export one field");
            }
            cfg.exports
                .iter()
                .map(|e| (e.field, e.grid, Some(e.path.clone())))
                .collect()
        }
    };
    let (model, flow) = build_model(&cfg.model)?;
    for (field, grid, path) in entries {
        let samples = with_workers(workers, || sample_field(&model, &flow, field, &grid, &cfg.defaults))??;
        write_output(path.as_deref(), &samples.to_csv())?;
        if cfg.output.verbosity != Verbosity::Quiet {
            let dest = path.map_or("stdout".to_string(), |p| p.display().to_string());
            eprintln!("{}: {} rows -> {dest}", field.name(), samples.values.len());
            if samples.unconverged > 0 {
                eprintln!(
                    "{}: {} points did not converge (written as NaN)",
                    field.name(),
                    samples.unconverged
                );
            }
        }
    }
    Ok(0)
}

fn listing(rows: Vec<(&str, &str)>) -> String {
    rows.into_iter().map(|(n, d)| format!("{n}\t{d}\n")).collect()
}

/// Executes a parsed command line and returns the process exit code.
/// Errors are reported on stderr with their full context chain.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run {
            config,
            workers,
            seed,
            out,
            timings,
        } => run_command(&config, workers, seed, out, timings),
        Command::Export {
            config,
            field,
            grid,
            workers,
            seed,
            out,
        } => export_command(&config, field.as_deref(), grid, workers, seed, out),
        Command::ListModels => write_output(None, &listing(list_models())).map(|_| 0),
        Command::ListVerifiers => write_output(None, &listing(list_verifiers())).map(|_| 0),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_ERROR
    })
}
