// SPDX-License-Identifier: Apache-2.0
//! `qlab`: batch front-end for the qlab-core models.
//!
//! Every subcommand takes an optional JSON config whose keys mirror the
//! underlying operation, with flags overriding individual keys. Artifacts go
//! to `--out` (or stdout); a JSON run manifest goes to stderr.

mod commands;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use error::CliError;
use output::{Artifact, Format};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

pub const SEED_ENV: &str = "QTHESIS_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "qlab",
    version,
    about = "Weak measurement, trajectory thermodynamics, cQED and junction models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Random seed; the QTHESIS_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Validate the configuration without computing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropies and uncertainty bounds for one (theta_a, theta_f) point or a grid.
    EurBound(commands::eur::BoundArgs),
    /// Monte-Carlo entropic uncertainty experiment.
    EurSim(commands::eur::SimArgs),
    /// Per-shot Q values of a weak-measurement or feedback ensemble.
    TrajEnsemble(commands::traj::EnsembleArgs),
    /// Detailed and integral fluctuation-theorem checks on an ensemble.
    FtCheck(commands::traj::FtArgs),
    /// Jaynes-Cummings levels over a detuning sweep.
    JcSpectrum(commands::cqed::JcArgs),
    /// Transmon transition frequencies from E_J and E_C, or the inverse.
    Transmon(commands::cqed::TransmonArgs),
    /// Compile a Rabi sequence into channel and marker matrices.
    PulseCompile(commands::pulse::CompileArgs),
    /// Junction fabrication models.
    JjModel(commands::junction::ModelArgs),
    /// TLS density fit to a list of splittings.
    TlsFit(commands::junction::TlsArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EurBound(_) => "eur-bound",
            Command::EurSim(_) => "eur-sim",
            Command::TrajEnsemble(_) => "traj-ensemble",
            Command::FtCheck(_) => "ft-check",
            Command::JcSpectrum(_) => "jc-spectrum",
            Command::Transmon(_) => "transmon",
            Command::PulseCompile(_) => "pulse-compile",
            Command::JjModel(_) => "jj-model",
            Command::TlsFit(_) => "tls-fit",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::EurBound(a) => &a.common,
            Command::EurSim(a) => &a.common,
            Command::TrajEnsemble(a) => &a.common,
            Command::FtCheck(a) => &a.common,
            Command::JcSpectrum(a) => &a.common,
            Command::Transmon(a) => &a.common,
            Command::PulseCompile(a) => &a.common,
            Command::JjModel(a) => &a.common,
            Command::TlsFit(a) => &a.common,
        }
    }

    fn run(&self, ctx: &mut Ctx) -> Result<Artifact, CliError> {
        match self {
            Command::EurBound(a) => commands::eur::bound(a, ctx),
            Command::EurSim(a) => commands::eur::sim(a, ctx),
            Command::TrajEnsemble(a) => commands::traj::ensemble(a, ctx),
            Command::FtCheck(a) => commands::traj::ft_check(a, ctx),
            Command::JcSpectrum(a) => commands::cqed::jc_spectrum(a, ctx),
            Command::Transmon(a) => commands::cqed::transmon(a, ctx),
            Command::PulseCompile(a) => commands::pulse::compile(a, ctx),
            Command::JjModel(a) => commands::junction::model(a, ctx),
            Command::TlsFit(a) => commands::junction::tls_fit(a, ctx),
        }
    }
}

/// Per-run state shared with the subcommands.
pub struct Ctx {
    pub seed: u64,
    pub dry_run: bool,
    pub warnings: Vec<String>,
}

fn resolve_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Config(format!("{SEED_ENV}={v:?} is not a 64-bit unsigned integer"))
        }),
        Err(_) => Ok(flag),
    }
}

fn execute(cmd: &Command, ctx: &mut Ctx, jobs: usize) -> Result<Vec<PathBuf>, CliError> {
    let common = cmd.common();
    let format = common
        .format
        .unwrap_or_else(|| Format::infer(common.out.as_deref()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(CliError::runtime)?;
    let artifact = pool.install(|| cmd.run(ctx))?;
    output::emit(&artifact, format, common.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let common = cli.command.common().clone();
    let jobs = common
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let seed = resolve_seed(common.seed);
    let mut ctx = Ctx {
        seed: *seed.as_ref().unwrap_or(&common.seed),
        dry_run: common.dry_run,
        warnings: Vec::new(),
    };
    let result = if jobs == 0 {
        Err(CliError::Config("--jobs must be at least 1".into()))
    } else {
        seed.and_then(|_| execute(&cli.command, &mut ctx, jobs))
    };
    let mut manifest = json!({
        "program": "qlab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "seed": ctx.seed,
        "jobs": jobs,
        "dry_run": ctx.dry_run,
        "elapsed_s": start.elapsed().as_secs_f64(),
        "warnings": ctx.warnings,
    });
    let code = match result {
        Ok(paths) => {
            manifest["status"] = json!("ok");
            manifest["outputs"] = json!(paths);
            0
        }
        Err(e) => {
            eprintln!("qlab: {e}");
            manifest["status"] = json!("error");
            manifest["error"] = json!(e.to_string());
            e.exit_code()
        }
    };
    eprintln!("{manifest}");
    ExitCode::from(code as u8)
}
