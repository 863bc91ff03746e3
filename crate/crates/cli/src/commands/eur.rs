// SPDX-License-Identifier: Apache-2.0

use super::{apply_flags, linspace, load};
use crate::error::CliError;
use crate::output::{Artifact, Table};
use crate::{Common, Ctx};
use clap::Args;
use qlab_core::entropic::{
    bound_report, eur_bound, simulate_eur, simulate_eur_point, EurNoise, EurSimConfig,
};
use qlab_core::rng::{domain, StreamFactory};
use qlab_core::weak::{MeasurementStrength, ReadoutModel};
use rayon::prelude::*;
use serde::Deserialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// JSON config.
    config: Option<PathBuf>,
    #[arg(long)]
    theta_rho: Option<f64>,
    #[arg(long)]
    theta_a: Option<f64>,
    #[arg(long)]
    theta_f: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Evaluate an n x n grid of (theta_a, theta_f) over [0, pi] instead of one point.
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundConfig {
    theta_rho: f64,
    theta_a: f64,
    theta_f: f64,
    s: f64,
    eta: f64,
    readout: ReadoutModel,
    grid: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            theta_rho: 0.0,
            theta_a: FRAC_PI_4,
            theta_f: FRAC_PI_2,
            s: 0.375,
            eta: 1.0,
            readout: ReadoutModel::default(),
            grid: 0,
        }
    }
}

fn grid_points(theta_a: f64, theta_f: f64, grid: usize) -> Vec<(f64, f64)> {
    if grid == 0 {
        return vec![(theta_a, theta_f)];
    }
    let axis = linspace(0.0, PI, grid);
    axis.iter()
        .flat_map(|&a| axis.iter().map(move |&f| (a, f)))
        .collect()
}

pub fn bound(args: &BoundArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg: BoundConfig = load(args.config.as_deref())?;
    apply_flags!(cfg, args; theta_rho, theta_a, theta_f, s, eta, grid);
    let strength =
        MeasurementStrength::with_efficiency(cfg.s, cfg.eta).map_err(CliError::config)?;
    cfg.readout.validate().map_err(CliError::config)?;
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let reports = grid_points(cfg.theta_a, cfg.theta_f, cfg.grid)
        .par_iter()
        .map(|&(a, f)| bound_report(cfg.theta_rho, a, f, strength, &cfg.readout))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::runtime)?;
    let mut t = Table::new(&[
        "theta_rho",
        "theta_a",
        "theta_f",
        "s",
        "h_i",
        "h_af",
        "h_af_norm",
        "sigma",
        "trivial",
        "deutsch",
        "mu",
        "tomamichel",
        "weak_value_eur",
        "argmin_i",
        "argmin_j",
        "argmin_f",
        "taylor_violations",
        "satisfied",
    ]);
    for r in &reports {
        if r.taylor_violations > 0 {
            ctx.warnings.push(format!(
                "theta_a={} theta_f={}: {} bins outside the first-order expansion",
                r.theta_a, r.theta_f, r.taylor_violations
            ));
        }
        let b = r.bounds;
        t.push(vec![
            r.theta_rho.into(),
            r.theta_a.into(),
            r.theta_f.into(),
            r.s.into(),
            r.h_i.into(),
            r.h_af.into(),
            r.h_af_norm.into(),
            r.sigma.into(),
            b.trivial.into(),
            b.deutsch.into(),
            b.mu.into(),
            b.tomamichel.into(),
            b.weak_value_eur.into(),
            r.argmin.0.into(),
            r.argmin.1.into(),
            r.argmin.2.into(),
            r.taylor_violations.into(),
            r.satisfies(3.0).into(),
        ]);
    }
    Ok(Artifact::Table(t))
}

#[derive(Args, Debug)]
pub struct SimArgs {
    /// JSON config.
    config: Option<PathBuf>,
    #[arg(long)]
    theta_rho: Option<f64>,
    #[arg(long)]
    theta_a: Option<f64>,
    #[arg(long)]
    theta_f: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimConfig {
    theta_rho: f64,
    theta_a: f64,
    theta_f: f64,
    s: f64,
    shots: usize,
    readout: ReadoutModel,
    noise: EurNoise,
    grid: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            theta_rho: 0.0,
            theta_a: FRAC_PI_4,
            theta_f: FRAC_PI_2,
            s: 0.2,
            shots: 100_000,
            readout: ReadoutModel::default(),
            noise: EurNoise::default(),
            grid: 0,
        }
    }
}

pub fn sim(args: &SimArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg: SimConfig = load(args.config.as_deref())?;
    apply_flags!(cfg, args; theta_rho, theta_a, theta_f, s, shots, grid);
    let base = EurSimConfig {
        theta_rho: cfg.theta_rho,
        theta_a: cfg.theta_a,
        theta_f: cfg.theta_f,
        s: cfg.s,
        shots: cfg.shots,
        readout: cfg.readout,
        noise: cfg.noise,
    };
    let strength =
        MeasurementStrength::with_efficiency(cfg.s, cfg.noise.eta).map_err(CliError::config)?;
    if cfg.shots < 100_000 {
        return Err(CliError::Config(format!(
            "shots must be at least 100000, got {}",
            cfg.shots
        )));
    }
    cfg.readout.validate().map_err(CliError::config)?;
    cfg.noise.validate().map_err(CliError::config)?;
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let streams = StreamFactory::new(ctx.seed);
    let reference = simulate_eur(
        &EurSimConfig {
            theta_a: 0.0,
            theta_f: 0.0,
            ..base
        },
        &streams,
    )
    .map_err(CliError::runtime)?
    .h_af_reference;
    let points = grid_points(cfg.theta_a, cfg.theta_f, cfg.grid);
    let grid_streams = streams.derive(domain::GRID);
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, &(a, f))| {
            let point = EurSimConfig {
                theta_a: a,
                theta_f: f,
                ..base
            };
            let est = simulate_eur_point(&point, reference, &grid_streams.derive(k as u64))?;
            let bound = eur_bound(a, f, strength, &cfg.readout)?.value;
            Ok((a, f, est, bound))
        })
        .collect::<Result<Vec<_>, qlab_core::Error>>()
        .map_err(CliError::runtime)?;
    let mut t = Table::new(&[
        "theta_a",
        "theta_f",
        "h_i",
        "h_i_sigma",
        "h_af",
        "h_af_sigma",
        "h_af_norm",
        "lhs",
        "sigma",
        "bound",
        "satisfied",
    ]);
    for (a, f, e, bound) in rows {
        let lhs = e.h_i + e.h_af;
        t.push(vec![
            a.into(),
            f.into(),
            e.h_i.into(),
            e.h_i_sigma.into(),
            e.h_af.into(),
            e.h_af_sigma.into(),
            e.h_af_norm.into(),
            lhs.into(),
            e.sigma().into(),
            bound.into(),
            (lhs >= bound - 3.0 * e.sigma()).into(),
        ]);
    }
    t.note("h_af_reference", reference);
    t.note("shots", cfg.shots);
    Ok(Artifact::Table(t))
}
