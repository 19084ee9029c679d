//! Closed-form normalizers, cumulants, bounds and limit variances.
//!
//! All sums over modes are exact finite sums; asymptotic forms are exposed
//! separately (`psi_asymptotic`) for comparison.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectrum::{eigen_deltas, SpectralModel};
use crate::summation::NeumaierSum;

/// Limit of the third cumulant of `Lambda / sqrt(T sum delta^{2 alpha})` as `T -> inf`.
/// The exact finite-size value is [`k3_exact_lambda`].
pub const K3_LAMBDA_LIMIT: f64 = 0.0;

/// Placeholder for the unknown constants `C(alpha, d, theta0)` multiplying
/// the rate bounds; reported so consumers never mistake a rate for a bound.
pub const UNIT_CONSTANT: f64 = 1.0;

fn deltas(model: &SpectralModel, n: usize) -> Result<Vec<f64>> {
    Ok(eigen_deltas(model, n)?.deltas().to_vec())
}

fn sum_pow(model: &SpectralModel, ds: &[f64], p: f64) -> f64 {
    let _ = model;
    ds.iter().map(|d| d.powf(p)).collect::<NeumaierSum>().value()
}

/// `T / (2 theta0) * sum delta^{2 alpha}` for an explicit eigenvalue list.
pub fn psi_from_deltas(model: &SpectralModel, ds: &[f64], horizon: f64) -> f64 {
    horizon / (2.0 * model.theta0) * sum_pow(model, ds, 2.0 * model.alpha)
}

pub fn psi(model: &SpectralModel, horizon: f64, n: usize) -> Result<f64> {
    Ok(psi_from_deltas(model, &deltas(model, n)?, horizon))
}

/// `sigma_bar^alpha d T N^{2 alpha/d + 1} / ((4 alpha + 2 d) theta0)`.
pub fn psi_asymptotic(model: &SpectralModel, horizon: f64, n: usize) -> f64 {
    let d = model.dim as f64;
    model.sigma_bar.powf(model.alpha) * d * horizon * (n as f64).powf(2.0 * model.alpha / d + 1.0)
        / ((4.0 * model.alpha + 2.0 * d) * model.theta0)
}

/// `sum expm1(-2 theta0 delta^{2 alpha} T)`, a nonpositive number.
fn decay_sum(model: &SpectralModel, ds: &[f64], horizon: f64) -> f64 {
    ds.iter()
        .map(|&d| (-2.0 * model.rate(d) * horizon).exp_m1())
        .collect::<NeumaierSum>()
        .value()
}

/// `lambda = E[E_{T,N}^2] = psi + (1/(4 theta0^2)) sum (exp(-2 theta0 delta^{2 alpha} T) - 1)`.
pub fn lambda_tn(model: &SpectralModel, horizon: f64, n: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let th = model.theta0;
    Ok(psi_from_deltas(model, &ds, horizon) + decay_sum(model, &ds, horizon) / (4.0 * th * th))
}

/// `1 - lambda/psi`, evaluated without cancellation.
pub fn one_minus_variance_ratio(model: &SpectralModel, horizon: f64, n: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let th = model.theta0;
    let p = psi_from_deltas(model, &ds, horizon);
    Ok(-decay_sum(model, &ds, horizon) / (4.0 * th * th * p))
}

/// Position of `2 alpha` relative to `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "2a<d")]
    Below,
    #[serde(rename = "2a=d")]
    Critical,
    #[serde(rename = "2a>d")]
    Above,
}

impl Regime {
    pub fn of(model: &SpectralModel) -> Regime {
        let two_a = 2.0 * model.alpha;
        let d = model.dim as f64;
        if (two_a - d).abs() <= 1e-12 * d {
            Regime::Critical
        } else if two_a < d {
            Regime::Below
        } else {
            Regime::Above
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Regime::Below => "2a<d",
            Regime::Critical => "2a=d",
            Regime::Above => "2a>d",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Rate `b_{N,T}` of the Wasserstein bound, without its constant.
pub fn berry_esseen_bound(model: &SpectralModel, horizon: f64, n: usize) -> (f64, Regime) {
    let regime = Regime::of(model);
    let ad = model.alpha_over_d();
    let nf = n as f64;
    let exponent = match regime {
        Regime::Below => 2.0 * ad,
        Regime::Critical => 1.0,
        Regime::Above => ad + 0.5,
    };
    (horizon.powf(-0.5) * nf.powf(-exponent), regime)
}

/// `(4 alpha/d + 2) theta0 / sigma_bar^alpha`.
pub fn asymptotic_variance(model: &SpectralModel) -> f64 {
    (4.0 * model.alpha_over_d() + 2.0) * model.theta0 / model.sigma_bar.powf(model.alpha)
}

/// `2 theta0 / sum delta^{2 alpha}`, the `T -> inf` variance of `sqrt(T)(theta0 - theta_hat)`.
pub fn fixed_n_variance(model: &SpectralModel, n: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    Ok(2.0 * model.theta0 / sum_pow(model, &ds, 2.0 * model.alpha))
}

/// `sqrt(T) N^{alpha/d + 1/2}`.
pub fn clt_scaling(model: &SpectralModel, horizon: f64, n: usize) -> f64 {
    horizon.sqrt() * (n as f64).powf(model.alpha_over_d() + 0.5)
}

/// `x - 2(1 - e^{-x}) + x e^{-x} = sum_{k>=3} (-1)^k (2-k) x^k / k!`.
fn third_cumulant_kernel(x: f64) -> f64 {
    if x < 0.5 {
        let mut term = x * x / 2.0; // x^k / k! at k = 2
        let mut acc = 0.0;
        for k in 3..40 {
            term *= x / k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (2.0 - k as f64) * term;
            if term < 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    } else {
        let e = (-x).exp();
        x - 2.0 * (-(-x).exp_m1()) + x * e
    }
}

/// Exact `kappa_3(E / sqrt(psi))`.
pub fn k3_exact_e(model: &SpectralModel, horizon: f64, n: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let th = model.theta0;
    let p = psi_from_deltas(model, &ds, horizon);
    let total: NeumaierSum = ds
        .iter()
        .map(|&d| {
            let d2a = d.powf(2.0 * model.alpha);
            let a = 2.0 * th * d2a;
            3.0 * d2a * d2a / th * third_cumulant_kernel(a * horizon) / (a * a)
        })
        .collect();
    Ok(total.value() * p.powf(-1.5))
}

/// `3 / (theta0 sqrt(psi))`.
pub fn k3_bound_e(model: &SpectralModel, horizon: f64, n: usize) -> Result<f64> {
    Ok(3.0 / (model.theta0 * psi(model, horizon, n)?.sqrt()))
}

/// `18 / (theta0^2 psi)`.
pub fn k4_bound_e(model: &SpectralModel, horizon: f64, n: usize) -> Result<f64> {
    Ok(18.0 / (model.theta0 * model.theta0 * psi(model, horizon, n)?))
}

/// Bound on `|E[(Lambda / sqrt(T sum delta^{2 alpha}))^2] - 1/(2 theta0)|`.
pub fn lambda_moment_bound(model: &SpectralModel, horizon: f64, n: usize, m: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let s2 = sum_pow(model, &ds, 2.0 * model.alpha);
    let s4 = sum_pow(model, &ds, 4.0 * model.alpha);
    let dt = horizon / m as f64;
    let tt = 2.0 * model.theta0;
    Ok(dt * s4 / s2 + n as f64 / (tt * tt * horizon * s2))
}

/// Exact `E[(Lambda / sqrt(T sum delta^{2 alpha}))^2]`.
pub fn lambda_second_moment_exact(model: &SpectralModel, horizon: f64, n: usize, m: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let s2 = sum_pow(model, &ds, 2.0 * model.alpha);
    let dt = horizon / m as f64;
    let tt = 2.0 * model.theta0;
    let total: NeumaierSum = ds
        .iter()
        .map(|&d| {
            let c = model.rate(d);
            let step = -(-2.0 * c * dt).exp_m1() / dt;
            let whole = -(-2.0 * c * horizon).exp_m1() / horizon;
            (step - whole) / (tt * tt)
        })
        .collect();
    Ok(total.value() / s2)
}

/// `sum_{g=2}^{M-1} (M-g)(g-1) rho^{2g-3}`.
fn gap_sum(m: usize, rho: f64) -> f64 {
    let mut acc = NeumaierSum::default();
    let r2 = rho * rho;
    let mut pw = rho; // rho^{2g-3} at g = 2
    for g in 2..m {
        if pw == 0.0 {
            break;
        }
        acc.add(((m - g) * (g - 1)) as f64 * pw);
        pw *= r2;
    }
    acc.value()
}

/// Exact third cumulant of `Lambda / sqrt(T sum delta^{2 alpha})` on an `M`-step grid.
///
/// Each mode's summand is a Gaussian quadratic form; its third cumulant is
/// `8 s^6 tr(Q^3)` with `s^2` the one-step noise variance. It is strictly
/// positive and decays like `3 / (2 theta0^2 sqrt(T sum delta^{2 alpha}))`.
pub fn k3_exact_lambda(model: &SpectralModel, horizon: f64, n: usize, m: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let s2sum = sum_pow(model, &ds, 2.0 * model.alpha);
    let dt = horizon / m as f64;
    let total: NeumaierSum = ds
        .iter()
        .map(|&d| {
            let c = model.rate(d);
            let rho = (-c * dt).exp();
            let s2 = -(-2.0 * c * dt).exp_m1() / (2.0 * c);
            let d2a = d.powf(2.0 * model.alpha);
            6.0 * s2 * s2 * s2 * d2a * d2a * d2a * gap_sum(m, rho)
        })
        .collect();
    Ok(total.value() / (horizon * s2sum).powf(1.5))
}

/// `sum delta^{4 alpha} / (M (2 theta0)^2 (sum delta^{2 alpha})^2)`.
pub fn k4_bound_lambda(model: &SpectralModel, n: usize, m: usize) -> Result<f64> {
    let ds = deltas(model, n)?;
    let s2 = sum_pow(model, &ds, 2.0 * model.alpha);
    let s4 = sum_pow(model, &ds, 4.0 * model.alpha);
    let tt = 2.0 * model.theta0;
    Ok(s4 / (m as f64 * tt * tt * s2 * s2))
}

/// Rate bound for the discretized estimator with its two condition indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBound {
    pub bound: f64,
    /// `dt N^{2 alpha/d}`; must vanish for consistency.
    pub consistency_indicator: f64,
    /// `T^{3/2} N^{3 alpha/d + 1/2} / M`; must vanish for the CLT.
    pub clt_indicator: f64,
}

pub fn theta_tilde_bound(model: &SpectralModel, horizon: f64, n: usize, m: usize) -> DiscreteBound {
    let ad = model.alpha_over_d();
    let nf = n as f64;
    let mf = m as f64;
    let clt_indicator = horizon.powf(1.5) * nf.powf(3.0 * ad + 0.5) / mf;
    let (b, _) = berry_esseen_bound(model, horizon, n);
    DiscreteBound {
        bound: clt_indicator.max(b),
        consistency_indicator: horizon / mf * nf.powf(2.0 * ad),
        clt_indicator,
    }
}

/// Every theory quantity for one `(T, N, M)` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub horizon: f64,
    pub n_modes: usize,
    pub steps: usize,
    pub psi: f64,
    pub psi_asymptotic: f64,
    pub lambda: f64,
    pub variance_ratio: f64,
    pub one_minus_variance_ratio: f64,
    pub k3_exact: f64,
    pub k3_bound: f64,
    pub k4_bound: f64,
    pub b_nt: f64,
    pub regime: Regime,
    pub unit_constant: f64,
    pub asymptotic_variance: f64,
    pub fixed_n_variance: f64,
    pub clt_scaling: f64,
    pub lambda_second_moment: f64,
    pub lambda_moment_bound: f64,
    pub k3_lambda_exact: f64,
    pub k4_bound_lambda: f64,
    pub theta_tilde_bound: f64,
    pub consistency_indicator: f64,
    pub clt_indicator: f64,
}

impl TheoryReport {
    pub fn new(model: &SpectralModel, horizon: f64, n: usize, m: usize) -> Result<Self> {
        model.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(crate::error::Error::invalid("T", format!("must be positive, got {horizon}")));
        }
        if n == 0 {
            return Err(crate::error::Error::invalid("N", "must be at least 1"));
        }
        if m == 0 {
            return Err(crate::error::Error::invalid("M", "must be at least 1"));
        }
        let psi_v = psi(model, horizon, n)?;
        let lambda = lambda_tn(model, horizon, n)?;
        let (b, regime) = berry_esseen_bound(model, horizon, n);
        let tb = theta_tilde_bound(model, horizon, n, m);
        Ok(TheoryReport {
            horizon,
            n_modes: n,
            steps: m,
            psi: psi_v,
            psi_asymptotic: psi_asymptotic(model, horizon, n),
            lambda,
            variance_ratio: lambda / psi_v,
            one_minus_variance_ratio: one_minus_variance_ratio(model, horizon, n)?,
            k3_exact: k3_exact_e(model, horizon, n)?,
            k3_bound: k3_bound_e(model, horizon, n)?,
            k4_bound: k4_bound_e(model, horizon, n)?,
            b_nt: b,
            regime,
            unit_constant: UNIT_CONSTANT,
            asymptotic_variance: asymptotic_variance(model),
            fixed_n_variance: fixed_n_variance(model, n)?,
            clt_scaling: clt_scaling(model, horizon, n),
            lambda_second_moment: lambda_second_moment_exact(model, horizon, n, m)?,
            lambda_moment_bound: lambda_moment_bound(model, horizon, n, m)?,
            k3_lambda_exact: k3_exact_lambda(model, horizon, n, m)?,
            k4_bound_lambda: k4_bound_lambda(model, n, m)?,
            theta_tilde_bound: tb.bound,
            consistency_indicator: tb.consistency_indicator,
            clt_indicator: tb.clt_indicator,
        })
    }

    /// `(name, value)` pairs in a fixed order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("T", self.horizon.to_string()),
            ("N", self.n_modes.to_string()),
            ("M", self.steps.to_string()),
            ("psi", self.psi.to_string()),
            ("psi_asymptotic", self.psi_asymptotic.to_string()),
            ("lambda", self.lambda.to_string()),
            ("variance_ratio", self.variance_ratio.to_string()),
            ("one_minus_variance_ratio", self.one_minus_variance_ratio.to_string()),
            ("k3_exact", self.k3_exact.to_string()),
            ("k3_bound", self.k3_bound.to_string()),
            ("k4_bound", self.k4_bound.to_string()),
            ("b_NT", self.b_nt.to_string()),
            ("regime", self.regime.to_string()),
            ("unit_constant", self.unit_constant.to_string()),
            ("asymptotic_variance", self.asymptotic_variance.to_string()),
            ("fixed_N_variance", self.fixed_n_variance.to_string()),
            ("clt_scaling", self.clt_scaling.to_string()),
            ("lambda_second_moment", self.lambda_second_moment.to_string()),
            ("lambda_moment_bound", self.lambda_moment_bound.to_string()),
            ("k3_lambda_exact", self.k3_lambda_exact.to_string()),
            ("k4_bound_lambda", self.k4_bound_lambda.to_string()),
            ("theta_tilde_bound", self.theta_tilde_bound.to_string()),
            ("consistency_indicator", self.consistency_indicator.to_string()),
            ("clt_indicator", self.clt_indicator.to_string()),
        ]
    }

    /// Flat `key=value` block, one field per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}
