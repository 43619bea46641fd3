mod document;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fhsmppm::NoiseDomain;

use document::RunDocument;

/// Closed-form analysis and Monte Carlo sweeps for FH-SMPPM links.
#[derive(Debug, Parser)]
#[command(name = "fhsmppm", version)]
struct Cli {
    /// Run document (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bit budget of the configured symbol, as JSON.
    Bits,
    /// Spectral and power efficiency, as CSV.
    Efficiency {
        /// Emit (rho, -10 log10 eta) for every 1 <= w <= N <= max-slots.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 512, requires = "sweep")]
        max_slots: u32,
    },
    /// Receiver operation counts and latency, as JSON.
    Complexity {
        /// Emit a (latency, ops-per-bit) CSV grid over N and w instead.
        #[arg(long)]
        grid: bool,
    },
    /// Pe/Pb and simulated SER/BER over the P_opt grid, as CSV.
    Curves {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        domain: Option<NoiseDomain>,
        /// Skip simulation; the simulated columns are left empty.
        #[arg(long)]
        analytic_only: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fhsmppm: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let path = cli.config.as_deref().context("--config PATH is required")?;
    let doc = RunDocument::load(path)?;
    let out = cli.out.or_else(|| doc.output.path.clone());
    let text = match cli.command {
        Command::Bits => report::bits(&doc)?,
        Command::Efficiency { sweep: false, .. } => report::efficiency(&doc)?,
        Command::Efficiency { sweep: true, max_slots } => report::efficiency_grid(&doc, max_slots)?,
        Command::Complexity { grid: false } => report::complexity(&doc)?,
        Command::Complexity { grid: true } => report::complexity_grid(&doc)?,
        Command::Curves { seed, domain, analytic_only } => {
            let mut plan = doc.plan()?;
            if let Some(s) = seed {
                plan.seed = s;
            }
            if let Some(d) = domain {
                plan.domain = d;
            }
            plan.analytic_only = analytic_only;
            report::curves(&plan)?
        }
    };
    write_output(out.as_deref(), &text)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(f);
            w.write_all(text.as_bytes())?;
            w.flush().with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                // a closed reader (e.g. `head`) is not a failure
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}
