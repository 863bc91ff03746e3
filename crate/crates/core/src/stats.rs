// SPDX-License-Identifier: Apache-2.0
//! Small numerical helpers: compensated sums, Gaussian densities, KS test.

use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Density of N(mean, variance) at x.
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

/// Natural log of the N(mean, variance) density at x.
pub fn normal_ln_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -d * d / (2.0 * variance) - 0.5 * (2.0 * PI * variance).ln()
}

/// Standard normal CDF, exact at the infinities.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x / SQRT_2)
    }
}

/// P(a <= X <= b) for X ~ N(mean, variance).
pub fn normal_interval(a: f64, b: f64, mean: f64, variance: f64) -> f64 {
    let sd = variance.sqrt();
    let za = (a - mean) / sd;
    let zb = (b - mean) / sd;
    // Use the upper tail when both limits sit above the mean to keep precision.
    if za > 0.0 {
        (std_normal_cdf(-za) - std_normal_cdf(-zb)).max(0.0)
    } else {
        (std_normal_cdf(zb) - std_normal_cdf(za)).max(0.0)
    }
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Mean and standard error of the mean.
pub fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x: Vec<f64> = a.iter().copied().filter(|v| v.is_finite()).collect();
    let mut y: Vec<f64> = b.iter().copied().filter(|v| v.is_finite()).collect();
    if x.is_empty() || y.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut k, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && k < m {
        let v = x[i].min(y[k]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while k < m && y[k] <= v {
            k += 1;
        }
        d = d.max((i as f64 / n as f64 - k as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut xs = vec![1.0e16];
        xs.extend(std::iter::repeat_n(1.0, 1000));
        xs.push(-1.0e16);
        assert_eq!(compensated_sum(xs), 1000.0);
    }

    #[test]
    fn interval_integrates_to_one() {
        let p = normal_interval(f64::NEG_INFINITY, f64::INFINITY, 1.0, 2.0);
        assert!((p - 1.0).abs() < 1e-15);
        assert!((normal_interval(1.0, f64::INFINITY, 1.0, 3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_identical_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
    }

    #[test]
    fn ks_shifted_samples() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let (d, p) = ks_two_sample(&a, &b);
        assert!((d - 0.5).abs() < 1e-2);
        assert!(p < 1e-10);
    }
}
