// SPDX-License-Identifier: Apache-2.0

use super::{apply_flags, load};
use crate::error::CliError;
use crate::output::{Artifact, Table};
use crate::{Common, Ctx};
use clap::{Args, ValueEnum};
use qlab_core::arrow::{
    detailed_ft_check, integral_ft_and_second_law, run_feedback_ensemble, weak_ensemble,
    FeedbackConfig, FeedbackProtocol, PriorMode,
};
use qlab_core::qubit::Bloch;
use qlab_core::rng::StreamFactory;
use qlab_core::Error;
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Single weak measurements without feedback or post-selection.
    None,
    Cof,
    Acof,
    NoFeedback,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    Coherent,
    EigenstateResolved,
}

#[derive(Args, Debug)]
pub struct EnsembleFlags {
    /// JSON config.
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    protocol: Option<Protocol>,
    #[arg(long, value_enum)]
    prior_mode: Option<Prior>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EnsembleConfig {
    protocol: Protocol,
    prior_mode: Prior,
    prior: Bloch,
    shots: usize,
    s: f64,
    window: f64,
    bin_width: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::None,
            prior_mode: Prior::EigenstateResolved,
            prior: Bloch::new(1.0, 0.0, 0.0),
            shots: 100_000,
            s: 0.375,
            window: PI / 20.0,
            bin_width: 0.1,
        }
    }
}

/// Per-shot rows: (id, q, accepted, theta_app, j).
type Shots = Vec<(u64, f64, bool, Option<f64>, Option<f64>)>;

impl EnsembleConfig {
    fn from_flags(f: &EnsembleFlags) -> Result<Self, CliError> {
        let mut cfg: EnsembleConfig = load(f.config.as_deref())?;
        apply_flags!(cfg, f; protocol, prior_mode, shots, s, window);
        if cfg.shots == 0 {
            return Err(CliError::Config("shots must be positive".into()));
        }
        if !(cfg.s > 0.0 && cfg.s.is_finite()) {
            return Err(CliError::Config(format!(
                "s must be positive, got {}",
                cfg.s
            )));
        }
        qlab_core::qubit::QubitState::from_bloch(cfg.prior).map_err(CliError::config)?;
        if cfg.protocol != Protocol::None && cfg.shots < 10_000 {
            return Err(CliError::Config(format!(
                "feedback ensembles need at least 10000 shots, got {}",
                cfg.shots
            )));
        }
        Ok(cfg)
    }

    fn run(&self, seed: u64) -> Result<(Shots, f64), Error> {
        let streams = StreamFactory::new(seed);
        let protocol = match self.protocol {
            Protocol::None => {
                let mode = match self.prior_mode {
                    Prior::Coherent => PriorMode::Coherent,
                    Prior::EigenstateResolved => PriorMode::EigenstateResolved,
                };
                let qs = weak_ensemble(self.prior, self.s, self.shots, mode, &streams)?;
                let shots = qs
                    .into_iter()
                    .enumerate()
                    .map(|(i, q)| (i as u64, q, true, None, None))
                    .collect();
                return Ok((shots, 1.0));
            }
            Protocol::Cof => FeedbackProtocol::Cof,
            Protocol::Acof => FeedbackProtocol::Acof,
            Protocol::NoFeedback => FeedbackProtocol::NoFeedback,
        };
        let cfg = FeedbackConfig {
            window: self.window,
            prior: self.prior,
            ..FeedbackConfig::new(protocol, self.shots, self.s)
        };
        let ens = run_feedback_ensemble(&cfg, &streams)?;
        let shots = ens
            .shots
            .iter()
            .map(|r| (r.id, r.q, r.accepted, Some(r.theta_app), Some(r.j)))
            .collect();
        Ok((shots, ens.acceptance))
    }
}

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    #[command(flatten)]
    flags: EnsembleFlags,
    #[command(flatten)]
    pub common: Common,
}

pub fn ensemble(args: &EnsembleArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let cfg = EnsembleConfig::from_flags(&args.flags)?;
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let (shots, acceptance) = cfg.run(ctx.seed).map_err(CliError::runtime)?;
    let mut t = Table::new(&["id", "q", "accepted", "theta_app", "j"]);
    for (id, q, acc, theta, j) in shots {
        t.push(vec![
            id.into(),
            q.into(),
            acc.into(),
            theta.into(),
            j.into(),
        ]);
    }
    t.note("acceptance", acceptance);
    Ok(Artifact::Table(t))
}

#[derive(Args, Debug)]
pub struct FtArgs {
    #[command(flatten)]
    flags: EnsembleFlags,
    #[arg(long)]
    bin_width: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn ft_check(args: &FtArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg = EnsembleConfig::from_flags(&args.flags)?;
    apply_flags!(cfg, args; bin_width);
    if !(cfg.bin_width > 0.0) {
        return Err(CliError::Config("bin_width must be positive".into()));
    }
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let (shots, acceptance) = cfg.run(ctx.seed).map_err(CliError::runtime)?;
    let qs: Vec<f64> = shots.iter().filter(|s| s.2).map(|s| s.1).collect();
    let mut t = Table::new(&["q", "log_ratio", "expected", "sigma", "n_plus", "n_minus"]);
    t.note("accepted", qs.len());
    t.note("acceptance", acceptance);
    match detailed_ft_check(&qs, cfg.bin_width) {
        Ok(dft) => {
            t.note("slope", dft.slope);
            t.note("slope_err", dft.slope_err);
            for r in dft.rows {
                t.push(vec![
                    r.q.into(),
                    r.log_ratio.into(),
                    r.expected.into(),
                    r.sigma.into(),
                    r.n_plus.into(),
                    r.n_minus.into(),
                ]);
            }
        }
        Err(e @ Error::InsufficientStatistics(_)) => {
            ctx.warnings.push(format!("detailed check skipped: {e}"));
            t.note("slope", f64::NAN);
            t.note("slope_err", f64::NAN);
        }
        Err(e) => return Err(CliError::runtime(e)),
    }
    let ift = integral_ft_and_second_law(&qs).map_err(CliError::runtime)?;
    t.note("mean_exp_neg_q", ift.mean_exp_neg_q);
    t.note("jackknife_err", ift.jackknife_err);
    t.note("mean_q", ift.mean_q);
    t.note("mean_q_err", ift.mean_q_err);
    t.note("absolute_irreversibility", ift.absolute_irreversibility);
    t.note("second_law_ok", ift.second_law_ok);
    Ok(Artifact::Table(t))
}
