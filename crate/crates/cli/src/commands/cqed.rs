// SPDX-License-Identifier: Apache-2.0

use super::{apply_flags, linspace, load};
use crate::error::CliError;
use crate::output::{Artifact, Table};
use crate::{Common, Ctx};
use clap::Args;
use qlab_core::cqed::{jc_sweep, transmon_from_spectrum, transmon_spectrum, JcParams};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct JcArgs {
    /// JSON config.
    config: Option<PathBuf>,
    #[arg(long)]
    omega_c: Option<f64>,
    #[arg(long)]
    omega_q: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Sweep detuning from this value.
    #[arg(long, allow_negative_numbers = true, requires_all = ["delta_stop", "delta_points"])]
    delta_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_stop: Option<f64>,
    #[arg(long)]
    delta_points: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Deserialize)]
struct DeltaSweep {
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct JcConfig {
    omega_c: f64,
    omega_q: f64,
    g: f64,
    n_max: usize,
    sweep: Option<DeltaSweep>,
}

impl Default for JcConfig {
    /// Resonant 5.8 GHz pair with g/2pi = 100 MHz, in GHz.
    fn default() -> Self {
        Self {
            omega_c: 5.8,
            omega_q: 5.8,
            g: 0.1,
            n_max: 5,
            sweep: None,
        }
    }
}

pub fn jc_spectrum(args: &JcArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg: JcConfig = load(args.config.as_deref())?;
    apply_flags!(cfg, args; omega_c, omega_q, g, n_max);
    if let (Some(start), Some(stop), Some(points)) =
        (args.delta_start, args.delta_stop, args.delta_points)
    {
        cfg.sweep = Some(DeltaSweep {
            start,
            stop,
            points,
        });
    }
    let base =
        JcParams::new(cfg.omega_c, cfg.omega_q, cfg.g, cfg.n_max).map_err(CliError::config)?;
    let deltas = match &cfg.sweep {
        Some(s) if s.points == 0 => {
            return Err(CliError::Config("sweep needs at least one point".into()))
        }
        Some(s) => linspace(s.start, s.stop, s.points),
        None => vec![base.delta()],
    };
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let rows = jc_sweep(&base, &deltas).map_err(CliError::runtime)?;
    let mut t = Table::new(&["delta", "level_index", "frequency"]);
    for r in rows {
        t.push(vec![r.delta.into(), r.level_index.into(), r.energy.into()]);
    }
    Ok(Artifact::Table(t))
}

#[derive(Args, Debug)]
pub struct TransmonArgs {
    /// JSON config.
    config: Option<PathBuf>,
    #[arg(long, requires = "e_c", conflicts_with_all = ["f01", "f12"])]
    e_j: Option<f64>,
    #[arg(long)]
    e_c: Option<f64>,
    /// Recover E_J and E_C from measured transitions.
    #[arg(long, requires = "f12")]
    f01: Option<f64>,
    #[arg(long)]
    f12: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TransmonConfig {
    e_j: Option<f64>,
    e_c: Option<f64>,
    f01: Option<f64>,
    f12: Option<f64>,
}

pub fn transmon(args: &TransmonArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg: TransmonConfig = load(args.config.as_deref())?;
    if args.e_j.is_some() {
        cfg = TransmonConfig {
            e_j: args.e_j,
            e_c: args.e_c,
            ..TransmonConfig::default()
        };
    } else if args.f01.is_some() {
        cfg = TransmonConfig {
            f01: args.f01,
            f12: args.f12,
            ..TransmonConfig::default()
        };
    }
    let (e_j, e_c) = match cfg {
        TransmonConfig {
            e_j: Some(j),
            e_c: Some(c),
            f01: None,
            f12: None,
        } => (j, c),
        TransmonConfig {
            e_j: None,
            e_c: None,
            f01: Some(a),
            f12: Some(b),
        } => transmon_from_spectrum(a, b).map_err(CliError::config)?,
        _ => {
            return Err(CliError::Config(
                "give either (e_j, e_c) or (f01, f12)".into(),
            ))
        }
    };
    let spec = transmon_spectrum(e_j, e_c).map_err(CliError::config)?;
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    if let Some(w) = &spec.warning {
        ctx.warnings.push(w.clone());
    }
    let mut t = Table::new(&["e_j", "e_c", "f01", "f12", "alpha", "warning"]);
    t.push(vec![
        e_j.into(),
        e_c.into(),
        spec.f01.into(),
        spec.f12.into(),
        spec.alpha.into(),
        spec.warning.into(),
    ]);
    Ok(Artifact::Table(t))
}
