// SPDX-License-Identifier: Apache-2.0

use super::{linspace, load};
use crate::error::CliError;
use crate::output::{Artifact, Table};
use crate::{Common, Ctx};
use clap::Args;
use qlab_core::junction::{
    ambegaokar_baratoff, cabrera_mott, fit_layer_growth, josephson, junction_resistance,
    loss_budget, mott_potential, multilayer_resistance, read_layer_csv, read_splitting_csv,
    simmons_resistance, tls_density_fit, tls_synthetic, wkb_tunneling, LossContribution,
    OxidationParams, SimmonsVariant,
};
use qlab_core::rng::{domain, StreamFactory};
use serde::Deserialize;
use std::fs::File;
use std::path::{Path, PathBuf};

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// JSON config with a "model" key.
    config: Option<PathBuf>,
    /// Run a model with its default parameters when no config is given.
    #[arg(long)]
    model: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
enum ModelConfig {
    Josephson {
        #[serde(default = "default_i0")]
        i0: f64,
        #[serde(default)]
        delta_start: f64,
        #[serde(default = "default_delta_stop")]
        delta_stop: f64,
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default)]
        delta_dot: f64,
    },
    Wkb {
        #[serde(default = "default_phi")]
        phi: f64,
        #[serde(default)]
        fermi: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default)]
        e_start: f64,
        #[serde(default = "default_e_stop")]
        e_stop: f64,
        #[serde(default = "default_points")]
        points: usize,
    },
    Simmons {
        #[serde(default = "default_phi")]
        phi: f64,
        #[serde(default = "default_x_start")]
        x_start: f64,
        #[serde(default = "default_x_stop")]
        x_stop: f64,
        #[serde(default = "default_points")]
        points: usize,
        /// Junction area in um^2.
        #[serde(default = "default_area")]
        area: f64,
        /// Superconducting gap in Hz.
        #[serde(default = "default_gap")]
        gap: f64,
    },
    AmbegaokarBaratoff {
        #[serde(default = "default_r_n")]
        r_n: f64,
        #[serde(default = "default_gap")]
        gap: f64,
    },
    CabreraMott {
        #[serde(flatten, default)]
        params: Option<OxidationParams>,
        #[serde(default = "default_points")]
        points: usize,
    },
    Mott {
        #[serde(default = "default_n0")]
        n0: f64,
        #[serde(default = "default_width")]
        x: f64,
        #[serde(default = "default_eps_r")]
        eps_r: f64,
    },
    Multilayer {
        #[serde(default = "default_r_side")]
        r_side: f64,
        #[serde(default = "default_r_top")]
        r_top_base: f64,
        #[serde(default = "default_growth")]
        growth: f64,
        #[serde(default = "default_layers")]
        max_layers: u32,
    },
    LayerFit {
        input: PathBuf,
    },
    LossBudget {
        q_total: f64,
        #[serde(default)]
        contributions: Vec<LossContribution>,
        unknown_p: f64,
    },
}

fn default_i0() -> f64 {
    10e-9
}
fn default_delta_stop() -> f64 {
    1.5
}
fn default_points() -> usize {
    31
}
fn default_phi() -> f64 {
    2.0
}
fn default_width() -> f64 {
    1.5
}
fn default_e_stop() -> f64 {
    1.9
}
fn default_x_start() -> f64 {
    0.5
}
fn default_x_stop() -> f64 {
    2.0
}
fn default_area() -> f64 {
    1.5
}
fn default_gap() -> f64 {
    50e9
}
fn default_r_n() -> f64 {
    32.48e3
}
fn default_n0() -> f64 {
    0.01
}
fn default_eps_r() -> f64 {
    9.0
}
fn default_r_side() -> f64 {
    10e3
}
fn default_r_top() -> f64 {
    1e3
}
fn default_growth() -> f64 {
    2.0
}
fn default_layers() -> u32 {
    10
}

fn parse_model(args: &ModelArgs) -> Result<ModelConfig, CliError> {
    match (&args.config, &args.model) {
        (Some(p), None) => load::<serde_json::Value>(Some(p)).and_then(|v| {
            serde_json::from_value(v).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }),
        (None, Some(m)) => {
            serde_json::from_value(serde_json::json!({ "model": m.replace('-', "_") }))
                .map_err(CliError::config)
        }
        (Some(_), Some(_)) => Err(CliError::Config(
            "give either a config file or --model, not both".into(),
        )),
        (None, None) => Err(CliError::Config(
            "a config file or --model is required".into(),
        )),
    }
}

fn check(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

pub fn model(args: &ModelArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let cfg = parse_model(args)?;
    let points_ok = |n: usize| check(n >= 1, "points must be at least 1");
    match &cfg {
        ModelConfig::Josephson { i0, points, .. } => {
            points_ok(*points)?;
            check(*i0 > 0.0, "i0 must be positive")?;
        }
        ModelConfig::Wkb { points, width, .. } => {
            points_ok(*points)?;
            check(*width > 0.0, "width must be positive")?;
        }
        ModelConfig::Simmons {
            phi,
            x_start,
            points,
            area,
            ..
        } => {
            points_ok(*points)?;
            check(
                *phi > 0.0 && *x_start > 0.0 && *area > 0.0,
                "phi, x and area must be positive",
            )?;
        }
        ModelConfig::CabreraMott { params, points } => {
            params
                .unwrap_or_default()
                .validate()
                .map_err(CliError::config)?;
            check(*points >= 2, "points must be at least 2")?;
        }
        ModelConfig::LayerFit { input } => check(
            input.exists(),
            &format!("{} does not exist", input.display()),
        )?,
        _ => {}
    }
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let rt = CliError::runtime;
    let t = match cfg {
        ModelConfig::Josephson {
            i0,
            delta_start,
            delta_stop,
            points,
            delta_dot,
        } => {
            let mut t = Table::new(&["delta", "current", "voltage", "inductance"]);
            for d in linspace(delta_start, delta_stop, points) {
                match josephson(d, delta_dot, i0) {
                    Ok(r) => t.push(vec![
                        d.into(),
                        r.current.into(),
                        r.voltage.into(),
                        r.inductance.into(),
                    ]),
                    Err(e) => {
                        ctx.warnings.push(e.to_string());
                        t.push(vec![
                            d.into(),
                            (i0 * d.sin()).into(),
                            (0.0).into(),
                            f64::INFINITY.into(),
                        ]);
                    }
                }
            }
            t
        }
        ModelConfig::Wkb {
            phi,
            fermi,
            width,
            e_start,
            e_stop,
            points,
        } => {
            let mut t = Table::new(&["energy", "probability"]);
            for e in linspace(e_start, e_stop, points) {
                t.push(vec![
                    e.into(),
                    wkb_tunneling(e, phi, fermi, width)
                        .map_err(CliError::config)?
                        .into(),
                ]);
            }
            t
        }
        ModelConfig::Simmons {
            phi,
            x_start,
            x_stop,
            points,
            area,
            gap,
        } => {
            let mut t = Table::new(&[
                "x",
                "r_printed",
                "r_corrected",
                "junction_resistance",
                "critical_current",
            ]);
            for x in linspace(x_start, x_stop, points) {
                let r_j =
                    junction_resistance(x, phi, area, SimmonsVariant::Corrected).map_err(rt)?;
                t.push(vec![
                    x.into(),
                    simmons_resistance(x, phi, SimmonsVariant::Printed)
                        .map_err(rt)?
                        .into(),
                    simmons_resistance(x, phi, SimmonsVariant::Corrected)
                        .map_err(rt)?
                        .into(),
                    r_j.into(),
                    ambegaokar_baratoff(r_j, gap).map_err(rt)?.into(),
                ]);
            }
            t
        }
        ModelConfig::AmbegaokarBaratoff { r_n, gap } => {
            let mut t = Table::new(&["r_n", "gap", "critical_current"]);
            t.push(vec![
                r_n.into(),
                gap.into(),
                ambegaokar_baratoff(r_n, gap)
                    .map_err(CliError::config)?
                    .into(),
            ]);
            t
        }
        ModelConfig::CabreraMott { params, points } => {
            let mut t = Table::new(&["t", "x", "rate"]);
            for p in cabrera_mott(&params.unwrap_or_default(), points).map_err(rt)? {
                t.push(vec![p.t.into(), p.x.into(), p.rate.into()]);
            }
            t
        }
        ModelConfig::Mott { n0, x, eps_r } => {
            let mut t = Table::new(&["n0", "x", "eps_r", "potential"]);
            t.push(vec![
                n0.into(),
                x.into(),
                eps_r.into(),
                mott_potential(n0, x, eps_r)
                    .map_err(CliError::config)?
                    .into(),
            ]);
            t
        }
        ModelConfig::Multilayer {
            r_side,
            r_top_base,
            growth,
            max_layers,
        } => {
            let mut t = Table::new(&["n_layers", "parallel", "single"]);
            for n in 1..=max_layers {
                t.push(vec![
                    (n as usize).into(),
                    multilayer_resistance(n, r_side, r_top_base, growth, false)
                        .map_err(CliError::config)?
                        .into(),
                    multilayer_resistance(n, r_side, r_top_base, growth, true)
                        .map_err(CliError::config)?
                        .into(),
                ]);
            }
            t
        }
        ModelConfig::LayerFit { input } => {
            let records = read_layer_csv(open(&input)?).map_err(CliError::config)?;
            let f = fit_layer_growth(&records).map_err(rt)?;
            let mut t = Table::new(&["r_base", "growth", "r_squared", "devices"]);
            t.push(vec![
                f.r_base.into(),
                f.growth.into(),
                f.r_squared.into(),
                records.len().into(),
            ]);
            t
        }
        ModelConfig::LossBudget {
            q_total,
            contributions,
            unknown_p,
        } => {
            let mut t = Table::new(&["q_total", "unknown_p", "tan_delta_bound"]);
            t.push(vec![
                q_total.into(),
                unknown_p.into(),
                loss_budget(q_total, &contributions, unknown_p)
                    .map_err(rt)?
                    .into(),
            ]);
            t
        }
    };
    Ok(Artifact::Table(t))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Args, Debug)]
pub struct TlsArgs {
    /// JSON config.
    config: Option<PathBuf>,
    /// CSV with a g_splitting column in MHz.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Junction area in um^2.
    #[arg(long)]
    area: Option<f64>,
    /// Swept qubit frequency range in GHz.
    #[arg(long)]
    freq_span: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Synthetic {
    n: usize,
    sigma: f64,
    g_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TlsConfig {
    splittings: Vec<f64>,
    input: Option<PathBuf>,
    area: f64,
    freq_span: f64,
    synthetic: Option<Synthetic>,
}

impl Default for TlsConfig {
    fn default() -> Self {
        Self {
            splittings: Vec::new(),
            input: None,
            area: 1.0,
            freq_span: 1.0,
            synthetic: None,
        }
    }
}

pub fn tls_fit(args: &TlsArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg: TlsConfig = load(args.config.as_deref())?;
    if let Some(p) = &args.input {
        cfg.input = Some(p.clone());
    }
    if let Some(a) = args.area {
        cfg.area = a;
    }
    if let Some(f) = args.freq_span {
        cfg.freq_span = f;
    }
    check(
        cfg.area > 0.0 && cfg.freq_span > 0.0,
        "area and freq_span must be positive",
    )?;
    let mut g = cfg.splittings.clone();
    if let Some(p) = &cfg.input {
        g.extend(read_splitting_csv(open(p)?).map_err(CliError::config)?);
    }
    if let Some(s) = &cfg.synthetic {
        check(
            s.n >= 3 && s.sigma > 0.0 && s.g_max > 0.0,
            "synthetic data needs n >= 3 and positive sigma, g_max",
        )?;
        let mut rng = StreamFactory::new(ctx.seed)
            .derive(domain::TLS_SYNTHETIC)
            .stream(0);
        g.extend(tls_synthetic(
            s.n,
            s.sigma,
            s.g_max,
            cfg.area,
            cfg.freq_span,
            &mut rng,
        ));
    }
    check(g.len() >= 3, "need at least 3 splittings")?;
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let fit = tls_density_fit(&g, cfg.area, cfg.freq_span).map_err(CliError::runtime)?;
    let mut t = Table::new(&["sigma", "g_max", "n", "chi2", "mean_residual"]);
    t.push(vec![
        fit.sigma.into(),
        fit.g_max.into(),
        fit.n.into(),
        fit.chi2.into(),
        fit.mean_residual.into(),
    ]);
    Ok(Artifact::Table(t))
}
