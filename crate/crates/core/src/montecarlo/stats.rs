//! Pure statistics on Monte Carlo samples.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
pub fn big_phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Phi(x)`.
pub fn big_q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of the standard normal CDF, refined by Newton steps.
pub fn big_phi_inv(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let mut x = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p);
    for _ in 0..2 {
        let err = if x > 0.0 {
            (1.0 - p) - big_q(x)
        } else {
            big_phi(x) - p
        };
        let d = phi(x);
        if d > 0.0 {
            x -= err / d;
        }
    }
    x
}

/// `int_{-inf}^x Phi = x Phi(x) + phi(x)`; accurate for `x <= 0`.
fn lower_antiderivative(x: f64) -> f64 {
    x * big_phi(x) + phi(x)
}

/// `int_x^inf Q = phi(x) - x Q(x)`; accurate for `x >= 0`.
fn upper_antiderivative(x: f64) -> f64 {
    phi(x) - x * big_q(x)
}

/// `int_a^b (Phi(x) - p) dx` for `a <= b` on one side of zero.
fn signed_segment(a: f64, b: f64, p: f64) -> f64 {
    if b <= 0.0 {
        lower_antiderivative(b) - lower_antiderivative(a) - p * (b - a)
    } else if a >= 0.0 {
        (1.0 - p) * (b - a) - (upper_antiderivative(a) - upper_antiderivative(b))
    } else {
        signed_segment(a, 0.0, p) + signed_segment(0.0, b, p)
    }
}

/// `int_a^b |p - Phi(x)| dx`.
fn abs_segment(a: f64, b: f64, p: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let z = big_phi_inv(p);
    if z <= a {
        signed_segment(a, b, p).max(0.0)
    } else if z >= b {
        (-signed_segment(a, b, p)).max(0.0)
    } else {
        (-signed_segment(a, z, p)).max(0.0) + signed_segment(z, b, p).max(0.0)
    }
}

/// Exact Wasserstein-1 distance between the empirical law of `samples` and `N(0, 1)`.
pub fn wasserstein1_to_std_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("samples", "non-finite value"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let r = xs.len();
    let mut acc = NeumaierSum::default();
    let first = xs[0];
    acc.add(if first <= 0.0 {
        lower_antiderivative(first)
    } else {
        first + upper_antiderivative(first)
    });
    for k in 1..r {
        acc.add(abs_segment(xs[k - 1], xs[k], k as f64 / r as f64));
    }
    let last = xs[r - 1];
    acc.add(if last >= 0.0 {
        upper_antiderivative(last)
    } else {
        -last + lower_antiderivative(last)
    });
    Ok(acc.value())
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|value - target| <= k se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }

    /// Distance to `target` in units of `se`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.se
    }
}

/// Unbiased cumulant estimates with jackknife standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KStatistics {
    pub n: usize,
    pub k2: Estimate,
    pub k3: Estimate,
    pub k4: Estimate,
}

#[derive(Clone, Copy, Default)]
struct PowerSums {
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl PowerSums {
    fn without(&self, x: f64) -> PowerSums {
        let x2 = x * x;
        PowerSums {
            s1: self.s1 - x,
            s2: self.s2 - x2,
            s3: self.s3 - x2 * x,
            s4: self.s4 - x2 * x2,
        }
    }

    fn k(&self, n: usize) -> [f64; 3] {
        let n = n as f64;
        let PowerSums { s1, s2, s3, s4 } = *self;
        let k2 = (n * s2 - s1 * s1) / (n * (n - 1.0));
        let k3 = (n * n * s3 - 3.0 * n * s2 * s1 + 2.0 * s1 * s1 * s1) / (n * (n - 1.0) * (n - 2.0));
        let k4 = ((n * n * n + n * n) * s4 - 4.0 * (n * n + n) * s3 * s1 - 3.0 * (n * n - n) * s2 * s2
            + 12.0 * n * s2 * s1 * s1
            - 6.0 * s1.powi(4))
            / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
        [k2, k3, k4]
    }
}

/// k-statistics `k2, k3, k4`; requires at least 5 samples.
pub fn k_statistics(samples: &[f64]) -> Result<KStatistics> {
    let n = samples.len();
    if n < 5 {
        return Err(Error::invalid("samples", format!("k-statistics need at least 5 samples, got {n}")));
    }
    let zero = Estimate { value: 0.0, se: 0.0 };
    if samples.iter().all(|&x| x == samples[0]) {
        return Ok(KStatistics {
            n,
            k2: zero,
            k3: zero,
            k4: zero,
        });
    }
    let center = mean(samples);
    let mut sums = [NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default()];
    for &x in samples {
        let d = x - center;
        let d2 = d * d;
        sums[0].add(d);
        sums[1].add(d2);
        sums[2].add(d2 * d);
        sums[3].add(d2 * d2);
    }
    let full = PowerSums {
        s1: sums[0].value(),
        s2: sums[1].value(),
        s3: sums[2].value(),
        s4: sums[3].value(),
    };
    let point = full.k(n);
    let mut loo_mean = [NeumaierSum::default(), NeumaierSum::default(), NeumaierSum::default()];
    let loo: Vec<[f64; 3]> = samples.iter().map(|&x| full.without(x - center).k(n - 1)).collect();
    for v in &loo {
        for j in 0..3 {
            loo_mean[j].add(v[j]);
        }
    }
    let nf = n as f64;
    let mut se = [0.0; 3];
    for j in 0..3 {
        let m = loo_mean[j].value() / nf;
        let ss: NeumaierSum = loo.iter().map(|v| (v[j] - m) * (v[j] - m)).collect();
        se[j] = ((nf - 1.0) / nf * ss.value()).sqrt();
    }
    let est = |j: usize| Estimate {
        value: point[j],
        se: se[j],
    };
    Ok(KStatistics {
        n,
        k2: est(0),
        k3: est(1),
        k4: est(2),
    })
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().copied().collect::<NeumaierSum>().value() / samples.len() as f64
}

/// Sample mean with standard error `sqrt(s^2 / n)`.
pub fn mean_estimate(samples: &[f64]) -> Result<Estimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("samples", "a standard error needs at least 2 samples"));
    }
    let m = mean(samples);
    let ss: NeumaierSum = samples.iter().map(|&x| (x - m) * (x - m)).collect();
    let var = ss.value() / (n as f64 - 1.0);
    Ok(Estimate {
        value: m,
        se: (var / n as f64).sqrt(),
    })
}

/// Quantile with linear interpolation between order statistics (type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and interquartile range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianIqr {
    pub median: f64,
    pub iqr: f64,
}

pub fn median_iqr(samples: &[f64]) -> Result<MedianIqr> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(MedianIqr {
        median: quantile(&xs, 0.5),
        iqr: quantile(&xs, 0.75) - quantile(&xs, 0.25),
    })
}

/// Least-squares line through `(ln size, ln value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

pub fn rate_fit(sizes: &[f64], values: &[f64]) -> Result<RateFit> {
    if sizes.len() != values.len() {
        return Err(Error::invalid("sizes", "sizes and values differ in length"));
    }
    if sizes.len() < 3 {
        return Err(Error::invalid("sizes", format!("a rate fit needs at least 3 points, got {}", sizes.len())));
    }
    for (&s, &v) in sizes.iter().zip(values) {
        if !(s > 0.0) {
            return Err(Error::NonPositive { what: "size", value: s });
        }
        if !(v > 0.0) {
            return Err(Error::NonPositive { what: "value", value: v });
        }
    }
    let x: Vec<f64> = sizes.iter().map(|s| s.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mx = mean(&x);
    let my = mean(&y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        residuals,
    })
}

/// Empirical `E[X^{-p}]` for positive samples.
pub fn inverse_moment_diagnostic(samples: &[f64], p: f64) -> Result<Estimate> {
    if !(p > 0.0) {
        return Err(Error::NonPositive { what: "p", value: p });
    }
    if let Some(&bad) = samples.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::NonPositive {
            what: "S/psi sample",
            value: bad,
        });
    }
    let powered: Vec<f64> = samples.iter().map(|x| x.powf(-p)).collect();
    if powered.len() == 1 {
        return Ok(Estimate {
            value: powered[0],
            se: f64::NAN,
        });
    }
    mean_estimate(&powered)
}
