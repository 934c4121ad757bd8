//! Command-line front end: theory tables, regime classification, single
//! realizations, sweeps and exponent-versus-psi figures.

pub mod commands;
pub mod config;
pub mod svg;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cellscale::theory::Scheme;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::commands::*;
use crate::config::{CommonArgs, Format, RunConfig};
use crate::svg::Overlay;

#[derive(Debug, Parser)]
#[command(name = "cellscale", version, about = "Capacity scaling laboratory for cellular networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form exponents of every scheme in both directions.
    Exponent,
    /// Operating regime, thresholds and characteristic radii.
    Regime,
    /// Rates of one protocol on one realization, with the cut-set bound.
    Simulate {
        /// Also write the sampled network as JSON.
        #[arg(long)]
        dump_realization: Option<PathBuf>,
    },
    /// Monte Carlo sweep over n, slope fit and comparison with theory.
    Sweep,
    /// Exponent-versus-psi curves.
    Figure {
        /// CSV of measured exponents (columns proto,psi,exponent) drawn as
        /// markers.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
}

/// Where the primary output of a subcommand goes.
fn primary<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(stdout),
    })
}

/// Writes records as CSV (header plus rows) or a JSON array.
pub fn write_records<T: Serialize>(records: &[T], format: Format, w: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for r in records {
                csv.serialize(r)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, records)?;
            writeln!(w)?;
        }
        Format::Svg => bail!("svg output is only available for the figure subcommand"),
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct OverlayRecord {
    proto: Scheme,
    psi: f64,
    exponent: f64,
}

fn read_overlay(path: &Path) -> Result<Vec<Overlay>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize::<OverlayRecord>()
        .map(|rec| {
            let rec = rec?;
            Ok(Overlay {
                scheme: rec.proto,
                psi: rec.psi,
                exponent: rec.exponent,
            })
        })
        .collect()
}

/// Runs one invocation, writing results to `stdout` or `--out` and notes to
/// `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match &cli.command {
        Command::Exponent => {
            let rows = exponent_report(&cfg)?;
            write_records(&rows, cfg.format, &mut *primary(&cfg.out, stdout)?)?;
        }
        Command::Regime => {
            let row = regime_report(&cfg)?;
            write_records(&[row], cfg.format, &mut *primary(&cfg.out, stdout)?)?;
        }
        Command::Simulate { dump_realization } => {
            let sim = simulate_report(&cfg)?;
            if let Some(path) = dump_realization {
                let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                serde_json::to_writer(BufWriter::new(f), &sim.realization)?;
            }
            if !sim.summary.ub_dominates {
                writeln!(stderr, "warning: cut-set bound below the simulated minimum rate")?;
            }
            if cfg.out.is_some() {
                write_records(&sim.nodes, cfg.format, &mut *primary(&cfg.out, stdout)?)?;
            }
            write_records(&[sim.summary], cfg.format, stdout)?;
        }
        Command::Sweep => {
            let outcome = sweep_report(&cfg)?;
            for w in &outcome.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            write_records(&outcome.rows, cfg.format, &mut *primary(&cfg.out, stdout)?)?;
            let verdict = [outcome.verdict];
            if cfg.out.is_some() {
                write_records(&verdict, cfg.format, stdout)?;
            } else {
                write_records(&verdict, cfg.format, stderr)?;
            }
        }
        Command::Figure { overlay } => {
            let e = figure_exponents(&cfg)?;
            let curves = figure_curves(&e, cfg.direction, cfg.psi_max())?;
            let records = curve_records(&curves);
            match cfg.format {
                Format::Svg => {
                    let marks = match overlay {
                        Some(p) => read_overlay(p)?,
                        None => Vec::new(),
                    };
                    let title = format!(
                        "{} exponents (alpha={}, nu={}, beta={}, gamma={}, rho={})",
                        cfg.direction.as_str().to_uppercase(),
                        e.alpha,
                        e.nu,
                        e.beta,
                        e.gamma,
                        e.rho
                    );
                    let doc = svg::render(&curves, &marks, &title);
                    primary(&cfg.out, stdout)?.write_all(doc.as_bytes())?;
                    if let Some(p) = &cfg.out {
                        let csv_path = p.with_extension("csv");
                        let mut f = BufWriter::new(File::create(&csv_path)?);
                        write_records(&records, Format::Csv, &mut f)?;
                    }
                }
                f => write_records(&records, f, &mut *primary(&cfg.out, stdout)?)?,
            }
        }
    }
    Ok(())
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    match run(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => 0,
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}
