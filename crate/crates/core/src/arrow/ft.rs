// SPDX-License-Identifier: Apache-2.0
//! Detailed and integral fluctuation-theorem estimators.

use crate::error::{require, Error, Result};
use crate::stats::{compensated_sum, KahanSum};
use serde::Serialize;

/// Minimum number of counts on each side of a mirrored bin pair.
pub const MIN_BIN_COUNT: u64 = 20;
pub const MIN_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DftRow {
    pub q: f64,
    pub log_ratio: f64,
    pub expected: f64,
    pub sigma: f64,
    pub n_plus: u64,
    pub n_minus: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DftTable {
    pub rows: Vec<DftRow>,
    pub slope: f64,
    pub slope_err: f64,
}

/// Bins |Q| into mirrored pairs [kw, (k+1)w) and compares counts at +Q and -Q.
/// The slope is a weighted least-squares fit through the origin with
/// binomial errors sqrt(1/n+ + 1/n-).
pub fn detailed_ft_check(qs: &[f64], bin_width: f64) -> Result<DftTable> {
    require(bin_width > 0.0 && bin_width.is_finite(), || {
        "bin width must be positive".into()
    })?;
    if qs.len() < MIN_SAMPLES {
        return Err(Error::InsufficientStatistics(format!(
            "{} samples, need {MIN_SAMPLES}",
            qs.len()
        )));
    }
    let finite_max = qs
        .iter()
        .filter(|q| q.is_finite())
        .fold(0.0f64, |m, q| m.max(q.abs()));
    let bins = ((finite_max / bin_width).floor() as usize + 1).min(1 << 20);
    let mut plus = vec![0u64; bins];
    let mut minus = vec![0u64; bins];
    for &q in qs.iter().filter(|q| q.is_finite() && **q != 0.0) {
        let k = ((q.abs() / bin_width) as usize).min(bins - 1);
        if q > 0.0 {
            plus[k] += 1;
        } else {
            minus[k] += 1;
        }
    }
    let rows: Vec<DftRow> = (0..bins)
        .filter(|&k| plus[k] >= MIN_BIN_COUNT && minus[k] >= MIN_BIN_COUNT)
        .map(|k| {
            let (np, nm) = (plus[k] as f64, minus[k] as f64);
            let q = (k as f64 + 0.5) * bin_width;
            DftRow {
                q,
                log_ratio: (np / nm).ln(),
                expected: q,
                sigma: (1.0 / np + 1.0 / nm).sqrt(),
                n_plus: plus[k],
                n_minus: minus[k],
            }
        })
        .collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientStatistics(format!(
            "{} valid bin pairs, need 3",
            rows.len()
        )));
    }
    let sxy = compensated_sum(rows.iter().map(|r| r.q * r.log_ratio / (r.sigma * r.sigma)));
    let sxx = compensated_sum(rows.iter().map(|r| r.q * r.q / (r.sigma * r.sigma)));
    Ok(DftTable {
        slope: sxy / sxx,
        slope_err: sxx.recip().sqrt(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IftReport {
    pub mean_exp_neg_q: f64,
    /// Leave-one-out jackknife standard error of the mean of e^{-Q}.
    pub jackknife_err: f64,
    pub mean_q: f64,
    pub mean_q_err: f64,
    /// The mean of e^{-Q} is below one by more than 3 sigma, or some Q is +inf.
    pub absolute_irreversibility: bool,
    /// mean Q + 3 sigma >= 0.
    pub second_law_ok: bool,
}

fn jackknife_mean(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let total = compensated_sum(xs.iter().copied());
    let mean = total / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        let loo = (total - x) / (n - 1) as f64;
        acc.add((loo - mean) * (loo - mean));
    }
    (mean, ((n - 1) as f64 / n as f64 * acc.value()).sqrt())
}

pub fn integral_ft_and_second_law(qs: &[f64]) -> Result<IftReport> {
    require(!qs.is_empty(), || "empty Q sample".into())?;
    if qs.iter().any(|q| q.is_nan()) {
        return Err(Error::InvalidParameter("Q sample contains NaN".into()));
    }
    let weights: Vec<f64> = qs.iter().map(|q| (-q).exp()).collect();
    let (mean_exp_neg_q, jackknife_err) = jackknife_mean(&weights);
    let any_inf = qs.contains(&f64::INFINITY);
    let (mean_q, mean_q_err) = if qs.iter().all(|q| q.is_finite()) {
        jackknife_mean(qs)
    } else {
        (compensated_sum(qs.iter().copied()), f64::NAN)
    };
    let err = if jackknife_err.is_finite() {
        jackknife_err
    } else {
        0.0
    };
    let q_err = if mean_q_err.is_finite() {
        mean_q_err
    } else {
        0.0
    };
    Ok(IftReport {
        mean_exp_neg_q,
        jackknife_err,
        mean_q,
        mean_q_err,
        absolute_irreversibility: any_inf || mean_exp_neg_q + 3.0 * err < 1.0,
        second_law_ok: mean_q + 3.0 * q_err >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFactory;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Q = 2 s m j sampled from the exact two-Gaussian model at Z0 = 0.
    fn synthetic(s: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = StreamFactory::new(seed).stream(0);
        (0..n)
            .map(|_| {
                let m: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * s * m * (m + z / s.sqrt())
            })
            .collect()
    }

    #[test]
    fn zero_q_gives_unit_ift() {
        let r = integral_ft_and_second_law(&[0.0; 10]).unwrap();
        assert_eq!((r.mean_exp_neg_q, r.mean_q), (1.0, 0.0));
        assert!(!r.absolute_irreversibility && r.second_law_ok);
    }

    #[test]
    fn symmetric_synthetic_slope_is_one() {
        let t = detailed_ft_check(&synthetic(0.375, 1_000_000, 1), 0.1).unwrap();
        assert!(
            (t.slope - 1.0).abs() < 0.05,
            "{} +- {}",
            t.slope,
            t.slope_err
        );
        // Per-bin agreement with the analytic pushforward P(Q) = N(2s, 4s).
        let within = t
            .rows
            .iter()
            .filter(|r| (r.log_ratio - r.expected).abs() <= 3.0 * r.sigma + 0.01)
            .count();
        assert!(within as f64 >= 0.95 * t.rows.len() as f64);
    }

    #[test]
    fn all_positive_is_insufficient() {
        let q: Vec<f64> = (1..=200_000).map(|i| i as f64 * 1e-5).collect();
        assert!(matches!(
            detailed_ft_check(&q, 0.1),
            Err(Error::InsufficientStatistics(_))
        ));
        assert!(matches!(
            detailed_ft_check(&q[..10], 0.1),
            Err(Error::InsufficientStatistics(_))
        ));
    }

    #[test]
    fn jackknife_matches_standard_error() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let (m, e) = jackknife_mean(&xs);
        assert_abs_diff_eq!(m, 3.5);
        let var = xs.iter().map(|x| (x - 3.5f64).powi(2)).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(e, (var / 4.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn infinite_q_flags_absolute_irreversibility() {
        let r = integral_ft_and_second_law(&[0.1, f64::INFINITY, 0.3]).unwrap();
        assert!(r.absolute_irreversibility);
    }
}
