// SPDX-License-Identifier: Apache-2.0
//! Josephson junction fabrication models: Josephson relations, tunneling
//! resistance, critical current, oxide growth, oxide-layer scaling, TLS
//! density and loss budgets.
//!
//! Units: energies in eV, lengths in nm, areas in square micrometres,
//! frequencies in Hz unless a name says otherwise.

use crate::constants::{
    BOLTZMANN, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, PLANCK, REDUCED_FLUX_QUANTUM,
    RESISTANCE_QUANTUM, VACUUM_PERMITTIVITY,
};
use crate::error::{require, Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Read;

const NM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionSpec {
    /// Critical current in A.
    pub i0: f64,
    pub area: f64,
    pub oxide_thickness: f64,
    pub barrier_height: f64,
}

impl JunctionSpec {
    pub fn validate(&self) -> Result<()> {
        require(
            [
                self.i0,
                self.area,
                self.oxide_thickness,
                self.barrier_height,
            ]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite()),
            || "junction parameters must be positive".into(),
        )
    }

    /// Linear inductance at zero phase, in H.
    pub fn inductance(&self) -> Result<f64> {
        self.validate()?;
        Ok(josephson(0.0, 0.0, self.i0)?.inductance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JosephsonResponse {
    pub current: f64,
    pub voltage: f64,
    pub inductance: f64,
}

/// I = I0 sin(delta), V = Phi0 d(delta)/dt, L = Phi0 / (I0 cos(delta)) with
/// the reduced flux quantum.
pub fn josephson(delta: f64, delta_dot: f64, i0: f64) -> Result<JosephsonResponse> {
    require(i0 > 0.0 && i0.is_finite(), || {
        "critical current must be positive".into()
    })?;
    let c = delta.cos();
    if c.abs() < 1e-12 {
        return Err(Error::Domain(format!(
            "inductance diverges at delta = {delta}"
        )));
    }
    Ok(JosephsonResponse {
        current: i0 * delta.sin(),
        voltage: REDUCED_FLUX_QUANTUM * delta_dot,
        inductance: REDUCED_FLUX_QUANTUM / (i0 * c),
    })
}

/// WKB transmission through a rectangular barrier of width `width` (nm):
/// exp(-(4 pi width / h) sqrt(2 m (phi + fermi - e))).
pub fn wkb_tunneling(e: f64, phi: f64, fermi: f64, width: f64) -> Result<f64> {
    let barrier = phi + fermi - e;
    if !(barrier > 0.0) {
        return Err(Error::Domain(format!(
            "energy {e} eV is not below the barrier top {} eV",
            phi + fermi
        )));
    }
    require(width > 0.0, || "barrier width must be positive".into())?;
    let momentum = (2.0 * ELECTRON_MASS * barrier * ELEMENTARY_CHARGE).sqrt();
    Ok((-4.0 * PI * width * NM / PLANCK * momentum).exp())
}

/// Decay constant K = sqrt(2 m phi) / hbar in 1/nm.
pub fn simmons_k(phi: f64) -> f64 {
    (2.0 * ELECTRON_MASS * phi * ELEMENTARY_CHARGE).sqrt() / HBAR * NM
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimmonsVariant {
    /// 16 pi R0 X^2 / ((1 + 2KX) e^{2KX}).
    Printed,
    /// 16 pi R0 X^2 e^{2KX} / (1 + 2KX).
    #[default]
    Corrected,
}

/// Tunnel resistance for thickness `x` (nm) and barrier height `phi` (eV),
/// in ohm for unit area in nm^2.
pub fn simmons_resistance(x: f64, phi: f64, variant: SimmonsVariant) -> Result<f64> {
    require(x > 0.0 && phi > 0.0, || {
        "thickness and barrier height must be positive".into()
    })?;
    let kx2 = 2.0 * simmons_k(phi) * x;
    let pre = 16.0 * PI * RESISTANCE_QUANTUM * x * x / (1.0 + kx2);
    Ok(match variant {
        SimmonsVariant::Printed => pre * (-kx2).exp(),
        SimmonsVariant::Corrected => pre * kx2.exp(),
    })
}

/// Simmons resistance of a junction of `area` square micrometres, in ohm.
pub fn junction_resistance(x: f64, phi: f64, area: f64, variant: SimmonsVariant) -> Result<f64> {
    require(area > 0.0, || "area must be positive".into())?;
    Ok(simmons_resistance(x, phi, variant)? / (area * 1e6))
}

/// I_c = (pi/2)(Delta/e)/R_N with Delta = h * gap.
pub fn ambegaokar_baratoff(r_n: f64, gap: f64) -> Result<f64> {
    require(r_n > 0.0, || "normal resistance must be positive".into())?;
    require(gap >= 0.0, || "gap must be non-negative".into())?;
    Ok(FRAC_PI_2 * PLANCK * gap / ELEMENTARY_CHARGE / r_n)
}

/// Mott potential 2 e n0 X / (eps_r eps0) in volts; `n0` in ions/nm^2, `x` in nm.
pub fn mott_potential(n0: f64, x: f64, eps_r: f64) -> Result<f64> {
    require(n0 >= 0.0 && x >= 0.0 && eps_r > 0.0, || {
        "Mott inputs must be positive".into()
    })?;
    Ok(2.0 * ELEMENTARY_CHARGE * (n0 / (NM * NM)) * (x * NM) / (eps_r * VACUUM_PERMITTIVITY))
}

/// X_max = e a dPhi / (k T) in nm, with `a` in nm and `dphi` in volts.
pub fn mott_x_max(a: f64, dphi: f64, temperature: f64) -> Result<f64> {
    require(a > 0.0 && dphi > 0.0 && temperature > 0.0, || {
        "inputs must be positive".into()
    })?;
    Ok(ELEMENTARY_CHARGE * a * dphi / (BOLTZMANN * temperature))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OxidationParams {
    /// Diffusion constant in nm^2/s.
    pub d: f64,
    /// Interatomic spacing in nm.
    pub a: f64,
    pub x_max: f64,
    pub t_span: f64,
    #[serde(default = "default_seed")]
    pub x_seed: f64,
}

fn default_seed() -> f64 {
    0.1
}

impl Default for OxidationParams {
    /// Constants giving a 1.5 nm film after 30 minutes.
    fn default() -> Self {
        Self {
            d: 0.4 * 7.837_380_359_048_457e-14,
            a: 0.4,
            x_max: 30.0,
            t_span: 1800.0,
            x_seed: 0.1,
        }
    }
}

impl OxidationParams {
    pub fn validate(&self) -> Result<()> {
        require(self.x_seed > 0.0, || {
            format!("seed thickness {} must be positive", self.x_seed)
        })?;
        require(
            [self.d, self.a, self.x_max, self.t_span]
                .iter()
                .all(|v| *v > 0.0 && v.is_finite()),
            || "oxidation parameters must be positive".into(),
        )
    }

    /// dX/dt = (D/a) e^{X_max/X}.
    pub fn rate(&self, x: f64) -> f64 {
        self.d / self.a * (self.x_max / x).exp()
    }

    /// Time to grow from the seed to `x`, by quadrature of dt = dX / rate(X).
    pub fn time_to(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x <= self.x_seed {
            return Ok(0.0);
        }
        // Scaled so the integrand peaks at 1 at the upper limit.
        let f = |u: f64| (self.x_max / x - self.x_max / u).exp();
        let integral = adaptive_simpson(&f, self.x_seed, x, 1e-13 * x, 50);
        Ok(self.a / self.d * (-self.x_max / x).exp() * integral)
    }

    /// Thickness at time `t`, inverting `time_to` by bisection.
    pub fn thickness_at(&self, t: f64) -> Result<f64> {
        self.validate()?;
        require(t >= 0.0, || "time must be non-negative".into())?;
        if t == 0.0 {
            return Ok(self.x_seed);
        }
        let mut lo = self.x_seed;
        let mut hi = 2.0 * self.x_seed;
        while self.time_to(hi)? < t {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.time_to(mid)? < t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Inverse-logarithmic law X = X_max / ln(a X^2 / (D X_max t)) for X << X_max,
    /// solved by fixed-point iteration.
    pub fn thickness_asymptotic(&self, t: f64) -> Result<f64> {
        self.validate()?;
        require(t > 0.0, || "time must be positive".into())?;
        let mut x = self.x_seed.max(1e-3 * self.x_max);
        for _ in 0..100 {
            let arg = self.a * x * x / (self.d * self.x_max * t);
            if arg <= 1.0 {
                return Err(Error::Domain(format!(
                    "t = {t} s is outside the thin-film regime"
                )));
            }
            let next = self.x_max / arg.ln();
            if (next - x).abs() <= 1e-15 * x {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OxidePoint {
    pub t: f64,
    pub x: f64,
    pub rate: f64,
}

/// X(t) on `n` evenly spaced times over [0, t_span].
pub fn cabrera_mott(params: &OxidationParams, n: usize) -> Result<Vec<OxidePoint>> {
    params.validate()?;
    require(n >= 2, || "curve needs at least 2 points".into())?;
    (0..n)
        .map(|i| {
            let t = params.t_span * i as f64 / (n - 1) as f64;
            let x = params.thickness_at(t)?;
            Ok(OxidePoint {
                t,
                x,
                rate: params.rate(x),
            })
        })
        .collect()
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

/// Top-face junction in parallel with a side-face junction. The top-face
/// resistance grows as r_top_base * growth^n_layers; `single` returns it alone.
pub fn multilayer_resistance(
    n_layers: u32,
    r_side: f64,
    r_top_base: f64,
    growth: f64,
    single: bool,
) -> Result<f64> {
    require(n_layers >= 1, || "at least one oxide layer".into())?;
    require(r_side > 0.0 && r_top_base > 0.0 && growth > 0.0, || {
        "resistances must be positive".into()
    })?;
    let r_top = r_top_base * growth.powi(n_layers as i32);
    if single {
        return Ok(r_top);
    }
    if r_top.is_infinite() {
        return Ok(r_side);
    }
    Ok(r_top * r_side / (r_top + r_side))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub device_id: String,
    pub n_layers: u32,
    pub resistance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LayerGrowthFit {
    pub r_base: f64,
    pub growth: f64,
    pub r_squared: f64,
}

/// Least-squares fit of ln R = ln r_base + N ln growth (single-junction mode).
pub fn fit_layer_growth(records: &[LayerRecord]) -> Result<LayerGrowthFit> {
    require(records.iter().all(|r| r.resistance > 0.0), || {
        "resistances must be positive".into()
    })?;
    let n = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.n_layers as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.resistance.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if records.len() < 2 || sxx == 0.0 {
        return Err(Error::FitFailure(
            "need at least two distinct layer counts".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(LayerGrowthFit {
        r_base: intercept.exp(),
        growth: slope.exp(),
        r_squared,
    })
}

/// Expected count of TLS with splitting at least `g`: A sigma F sqrt(1/g^2 - 1/g_max^2),
/// with g and g_max in GHz, `area` in um^2 and `freq_span` in GHz.
pub fn tls_model_count(g: f64, g_max: f64, sigma: f64, area: f64, freq_span: f64) -> f64 {
    if g >= g_max {
        return 0.0;
    }
    area * sigma * freq_span * (1.0 / (g * g) - 1.0 / (g_max * g_max)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TlsFit {
    /// TLS per GHz per um^2.
    pub sigma: f64,
    /// MHz.
    pub g_max: f64,
    pub n: usize,
    pub chi2: f64,
    /// Mean of (N_observed - N_model) / sqrt(N_observed).
    pub mean_residual: f64,
}

/// Fits the cumulative count of `splittings` (MHz) to the TLS model with
/// Poisson weights. Sigma is linear and solved in closed form for each
/// g_max; g_max is found by golden-section search in log space.
pub fn tls_density_fit(splittings: &[f64], area: f64, freq_span: f64) -> Result<TlsFit> {
    require(area > 0.0 && freq_span > 0.0, || {
        "area and frequency span must be positive".into()
    })?;
    require(splittings.len() >= 3, || {
        format!("{} splittings, need at least 3", splittings.len())
    })?;
    require(splittings.iter().all(|g| *g > 0.0 && g.is_finite()), || {
        "splittings must be positive".into()
    })?;
    let mut g: Vec<f64> = splittings.iter().map(|v| v * 1e-3).collect();
    g.sort_by(f64::total_cmp);
    let (lo, hi) = (g[0], g[g.len() - 1]);
    if hi - lo <= 1e-12 * hi {
        return Err(Error::FitFailure("all splittings are equal".into()));
    }
    let n = g.len();
    let counts: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
    let solve = |g_max: f64| -> (f64, f64) {
        let shape: Vec<f64> = g
            .iter()
            .map(|gi| tls_model_count(*gi, g_max, 1.0, area, freq_span))
            .collect();
        let (mut num, mut den) = (0.0, 0.0);
        for (f, c) in shape.iter().zip(&counts) {
            num += f;
            den += f * f / c;
        }
        let sigma = num / den;
        let chi2 = shape
            .iter()
            .zip(&counts)
            .map(|(f, c)| (c - sigma * f).powi(2) / c)
            .sum();
        (sigma, chi2)
    };
    let (mut a, mut b) = ((hi * (1.0 + 1e-9)).ln(), (hi * 1e3).ln());
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (solve(c.exp()).1, solve(d.exp()).1);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = solve(c.exp()).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = solve(d.exp()).1;
        }
    }
    let g_max = (0.5 * (a + b)).exp();
    let (sigma, chi2) = solve(g_max);
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::FitFailure(format!("non-physical density {sigma}")));
    }
    let mean_residual = g
        .iter()
        .zip(&counts)
        .map(|(gi, c)| (c - tls_model_count(*gi, g_max, sigma, area, freq_span)) / c.sqrt())
        .sum::<f64>()
        / n as f64;
    Ok(TlsFit {
        sigma,
        g_max: g_max * 1e3,
        n,
        chi2,
        mean_residual,
    })
}

/// Draws `n` splittings (MHz) from the TLS model with the given density; the
/// lower cutoff is set so the model predicts exactly `n` defects.
pub fn tls_synthetic<R: Rng + ?Sized>(
    n: usize,
    sigma: f64,
    g_max: f64,
    area: f64,
    freq_span: f64,
    rng: &mut R,
) -> Vec<f64> {
    let g_max = g_max * 1e-3;
    let span = n as f64 / (area * sigma * freq_span);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let inv_sq = (u * span).powi(2) + 1.0 / (g_max * g_max);
            1e3 / inv_sq.sqrt()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossContribution {
    pub label: String,
    pub p: f64,
    pub tan_delta: f64,
}

impl LossContribution {
    pub fn validate(&self) -> Result<()> {
        require((0.0..=1.0).contains(&self.p), || {
            format!("{}: participation {} outside [0, 1]", self.label, self.p)
        })?;
        require(self.tan_delta >= 0.0, || {
            format!("{}: negative loss tangent", self.label)
        })
    }
}

/// Upper bound on the loss tangent of the unassigned material:
/// (1/Q - sum p_i tan_i) / unknown_p.
pub fn loss_budget(
    q_total: f64,
    contributions: &[LossContribution],
    unknown_p: f64,
) -> Result<f64> {
    require(q_total > 0.0, || "quality factor must be positive".into())?;
    require(unknown_p > 0.0 && unknown_p <= 1.0, || {
        "unknown participation must be in (0, 1]".into()
    })?;
    for c in contributions {
        c.validate()?;
    }
    let known: f64 = contributions.iter().map(|c| c.p * c.tan_delta).sum();
    let residual = 1.0 / q_total - known;
    if residual < 0.0 {
        return Err(Error::InconsistentBudget(format!(
            "known losses {known:e} exceed 1/Q = {:e}",
            1.0 / q_total
        )));
    }
    Ok(residual / unknown_p)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Reads `device_id,n_layers,resistance` rows with a header line.
pub fn read_layer_csv<R: Read>(reader: R) -> Result<Vec<LayerRecord>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)
}

#[derive(Deserialize)]
struct SplittingRow {
    g_splitting: f64,
}

/// Reads a `g_splitting` column (MHz) with a header line.
pub fn read_splitting_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
        .deserialize::<SplittingRow>()
        .map(|r| r.map(|r| r.g_splitting).map_err(csv_error))
        .collect()
}
