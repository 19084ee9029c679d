//! Continuous-time MLE, its time-discretized variant, and the sufficient
//! statistics behind both.
//!
//! Every estimator here is evaluated from a [`FieldSummary`]: one pass over
//! each row collects the handful of per-mode sums that all estimators and
//! decompositions need. The Monte Carlo engine builds the same summary from
//! rows it never stores, so both routes produce bit-identical numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ou_sim::{PathForm, PathMatrix, TimeGrid};
use crate::spectrum::{weights_for, ModeWeights, SpectralModel};
use crate::summation::NeumaierSum;
use crate::theory;

const BLOCK: usize = 64;

/// Per-mode sums over one row `x_0..x_M`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeSummary {
    /// `x_M`
    pub end: f64,
    /// Trapezoidal `int_0^T x^2 dt`.
    pub energy: f64,
    /// `sum_i x_{i-1} (x_i - x_{i-1})`
    pub riemann_xdx: f64,
    /// `sum_{i=1..M} x_{i-1}^2`
    pub left_sq: f64,
    /// `sum_i x_{i-1} (x_i - rho x_{i-1})` with `rho = exp(-theta0 delta^{2 alpha} dt)`.
    pub innovation: f64,
}

/// Single pass over a row. Terms are summed naively inside fixed blocks
/// and the block totals are combined with compensated summation.
pub fn summarize_row(row: &[f64], dt: f64, rho: f64) -> ModeSummary {
    let m = row.len() - 1;
    let mut sq = NeumaierSum::default();
    let mut xdx = NeumaierSum::default();
    let mut inn = NeumaierSum::default();
    let mut i = 1;
    while i <= m {
        let hi = (i + BLOCK).min(m + 1);
        let (mut b_sq, mut b_xdx, mut b_inn) = (0.0, 0.0, 0.0);
        for k in i..hi {
            let prev = row[k - 1];
            let cur = row[k];
            b_sq += prev * prev;
            b_xdx += prev * (cur - prev);
            b_inn += prev * (cur - rho * prev);
        }
        sq.add(b_sq);
        xdx.add(b_xdx);
        inn.add(b_inn);
        i = hi;
    }
    let first = row[0];
    let end = row[m];
    let left_sq = sq.value();
    // sum_{i=1..M-1} x_i^2 = left_sq - x_0^2, then trapezoid end corrections.
    let mut trap = NeumaierSum::default();
    trap.add(left_sq);
    trap.add(-0.5 * first * first);
    trap.add(0.5 * end * end);
    ModeSummary {
        end,
        energy: dt * trap.value(),
        riemann_xdx: xdx.value(),
        left_sq,
        innovation: inn.value(),
    }
}

/// `int_0^T y_n dy_n` from the Ito identity `y(T)^2 = 2 int y dy + delta^{-2 gamma} T`.
pub fn ito_integral_ydy(path_row: &[f64], delta: f64, model: &SpectralModel, horizon: f64) -> f64 {
    let end = *path_row.last().expect("non-empty row");
    ito_from_end(end, delta.powf(-2.0 * model.gamma), horizon)
}

#[inline]
fn ito_from_end(end: f64, qv_rate: f64, horizon: f64) -> f64 {
    0.5 * (end * end - qv_rate * horizon)
}

/// Trapezoidal approximation of `int_0^T x^2 dt` on a uniform grid.
pub fn quad_energy(path_row: &[f64], grid: &TimeGrid) -> f64 {
    summarize_row(path_row, grid.dt(), 0.0).energy
}

/// Which estimator produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Continuous,
    Discrete,
}

impl std::str::FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" | "mle" => Ok(EstimatorKind::Continuous),
            "discrete" | "discretized" => Ok(EstimatorKind::Discrete),
            other => Err(format!("unknown estimator `{other}` (continuous|discrete)")),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimatorKind::Continuous => "continuous",
            EstimatorKind::Discrete => "discrete",
        })
    }
}

/// Per-mode summaries of a whole field plus the context needed to weight them.
#[derive(Debug, Clone)]
pub struct FieldSummary {
    model: SpectralModel,
    grid: TimeGrid,
    form: PathForm,
    deltas: Vec<f64>,
    weights: ModeWeights,
    modes: Vec<ModeSummary>,
}

/// `exp(-theta0 delta^{2 alpha} dt)` for every mode.
pub(crate) fn step_decay(model: &SpectralModel, deltas: &[f64], dt: f64) -> Vec<f64> {
    deltas.iter().map(|&d| (-model.rate(d) * dt).exp()).collect()
}

impl FieldSummary {
    pub fn from_paths(paths: &PathMatrix) -> Self {
        let dt = paths.grid().dt();
        let rho = step_decay(paths.model(), paths.deltas(), dt);
        let modes = paths
            .rows()
            .zip(&rho)
            .map(|(row, &r)| summarize_row(row, dt, r))
            .collect();
        Self::from_modes(*paths.model(), *paths.grid(), paths.form(), paths.deltas().to_vec(), modes)
    }

    /// Assemble from summaries computed elsewhere (e.g. streamed rows).
    pub fn from_modes(
        model: SpectralModel,
        grid: TimeGrid,
        form: PathForm,
        deltas: Vec<f64>,
        modes: Vec<ModeSummary>,
    ) -> Self {
        let weights = weights_for(&model, &deltas);
        FieldSummary {
            model,
            grid,
            form,
            deltas,
            weights,
            modes,
        }
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[ModeSummary] {
        &self.modes
    }

    /// Numerator and denominator weights for the stored form.
    fn estimator_weights(&self) -> (&[f64], &[f64]) {
        match self.form {
            PathForm::Y => (&self.weights.w2, &self.weights.w4),
            PathForm::V => (&self.weights.p2, &self.weights.p4),
        }
    }

    /// Factor turning a quadratic row sum into its v-form value.
    fn to_v_factor(&self, n: usize) -> f64 {
        match self.form {
            PathForm::Y => self.deltas[n].powf(2.0 * self.model.gamma),
            PathForm::V => 1.0,
        }
    }

    /// Quadratic-variation rate of a row: `delta^{-2 gamma}` for y, 1 for v.
    fn qv_rate(&self, n: usize) -> f64 {
        match self.form {
            PathForm::Y => self.deltas[n].powf(-2.0 * self.model.gamma),
            PathForm::V => 1.0,
        }
    }

    pub fn continuous_stats(&self) -> ContinuousStats {
        let (wn, wd) = self.estimator_weights();
        let horizon = self.grid.horizon();
        let theta0 = self.model.theta0;
        let ito_ydy: Vec<f64> = self
            .modes
            .iter()
            .enumerate()
            .map(|(n, s)| ito_from_end(s.end, self.qv_rate(n), horizon))
            .collect();
        let energy: Vec<f64> = self.modes.iter().map(|s| s.energy).collect();

        let mut num = NeumaierSum::default();
        let mut den = NeumaierSum::default();
        let mut e = NeumaierSum::default();
        for n in 0..self.modes.len() {
            num.add(wn[n] * ito_ydy[n]);
            den.add(wd[n] * energy[n]);
            e.add(wn[n] * (ito_ydy[n] + theta0 * self.weights.p2[n] * energy[n]));
        }
        let denominator = den.value();
        ContinuousStats {
            ito_ydy,
            energy,
            numerator: num.value(),
            denominator,
            e_stat: e.value(),
            qv: denominator,
        }
    }

    pub fn discrete_stats(&self) -> DiscreteStats {
        let (wn, wd) = self.estimator_weights();
        let dt = self.grid.dt();
        let theta0 = self.model.theta0;
        let mut num = NeumaierSum::default();
        let mut den = NeumaierSum::default();
        let mut s = NeumaierSum::default();
        let mut lam = NeumaierSum::default();
        let mut r = NeumaierSum::default();
        let mut b_terms = Vec::with_capacity(self.modes.len());
        for (n, m) in self.modes.iter().enumerate() {
            num.add(wn[n] * m.riemann_xdx);
            den.add(wd[n] * m.left_sq);

            let f = self.to_v_factor(n);
            let p2 = self.weights.p2[n];
            let v_left = f * m.left_sq;
            let b = p2 * f * m.innovation;
            b_terms.push(b);
            s.add(self.weights.p4[n] * v_left);
            lam.add(b);
            r.add(p2 * exp_m1_plus_x(self.model.rate(self.deltas[n]) * dt) * v_left);
        }
        let numerator = num.value();
        let denominator = dt * den.value();
        let _ = theta0;
        DiscreteStats {
            numerator,
            denominator,
            theta_tilde: -numerator / denominator,
            s: dt * s.value(),
            lambda: lam.value(),
            r: r.value(),
            b_terms,
        }
    }
}

/// `exp(-x) - 1 + x`, accurate for small `x`.
pub fn exp_m1_plus_x(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // x^2/2 - x^3/6 + x^4/24 - x^5/120
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0)
    } else {
        (-x).exp_m1() + x
    }
}

/// Sufficient statistics of the continuous-time MLE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousStats {
    /// Per mode `int_0^T x dx` (Ito).
    pub ito_ydy: Vec<f64>,
    /// Per mode trapezoidal `int_0^T x^2 dt`.
    pub energy: Vec<f64>,
    pub numerator: f64,
    pub denominator: f64,
    /// The martingale `E_{T,N} = sum delta^{2 alpha + gamma} int y dw`.
    pub e_stat: f64,
    /// Its bracket; the same number as `denominator`.
    pub qv: f64,
}

/// Time-discretized estimator and the split `theta0 - theta_tilde = (R + Lambda) / S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteStats {
    pub numerator: f64,
    pub denominator: f64,
    pub theta_tilde: f64,
    /// `dt sum delta^{4 alpha} sum v^2(t_{i-1})`
    pub s: f64,
    /// Martingale part.
    pub lambda: f64,
    /// Discretization remainder.
    pub r: f64,
    /// Per-mode summands of `lambda`.
    pub b_terms: Vec<f64>,
}

impl DiscreteStats {
    /// `(theta0 - theta_tilde) - (R + Lambda) / S`, zero up to rounding.
    pub fn decomposition_residual(&self, theta0: f64) -> f64 {
        (theta0 - self.theta_tilde) - (self.r + self.lambda) / self.s
    }
}

/// Sufficient statistics carried by an [`EstimateRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SufficientStats {
    Continuous(ContinuousStats),
    Discrete(DiscreteStats),
}

/// One estimator evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub kind: EstimatorKind,
    pub theta_est: f64,
    pub model: SpectralModel,
    pub grid: TimeGrid,
    pub n_modes: usize,
    /// `sqrt(psi) (theta0 - theta_est)`, using the snapshot's `theta0`.
    pub normalized_error: f64,
    pub stats: SufficientStats,
}

impl EstimateRecord {
    /// Recompute the estimate from the stored sums.
    pub fn recomputed_theta(&self) -> f64 {
        match &self.stats {
            SufficientStats::Continuous(c) => -c.numerator / c.denominator,
            SufficientStats::Discrete(d) => -d.numerator / d.denominator,
        }
    }
}

fn check_denominator(den: f64, what: &str) -> Result<()> {
    if den > 0.0 && den.is_finite() {
        Ok(())
    } else {
        Err(Error::Degenerate(format!(
            "{what} is {den}; all paths are identically zero"
        )))
    }
}

fn record(
    summary: &FieldSummary,
    kind: EstimatorKind,
    theta_est: f64,
    stats: SufficientStats,
) -> EstimateRecord {
    let model = *summary.model();
    let psi = theory::psi_from_deltas(&model, &summary.deltas, summary.grid.horizon());
    EstimateRecord {
        kind,
        theta_est,
        model,
        grid: *summary.grid(),
        n_modes: summary.n_modes(),
        normalized_error: psi.sqrt() * (model.theta0 - theta_est),
        stats,
    }
}

impl FieldSummary {
    pub fn mle_continuous(&self) -> Result<EstimateRecord> {
        let c = self.continuous_stats();
        check_denominator(c.denominator, "energy denominator")?;
        let theta = -c.numerator / c.denominator;
        Ok(record(self, EstimatorKind::Continuous, theta, SufficientStats::Continuous(c)))
    }

    pub fn mle_discrete(&self) -> Result<EstimateRecord> {
        if self.grid.steps() < 2 {
            return Err(Error::invalid("M", "the discretized estimator needs M >= 2"));
        }
        let d = self.discrete_stats();
        check_denominator(d.denominator, "discrete denominator")?;
        let theta = d.theta_tilde;
        Ok(record(self, EstimatorKind::Discrete, theta, SufficientStats::Discrete(d)))
    }

    pub fn decompose_discrete(&self) -> Result<DiscreteStats> {
        if self.grid.steps() < 2 {
            return Err(Error::invalid("M", "the decomposition needs M >= 2"));
        }
        let d = self.discrete_stats();
        check_denominator(d.s, "S")?;
        Ok(d)
    }
}

/// Continuous-time MLE: `-sum w2 int y dy / sum w4 int y^2 dt`.
pub fn mle_continuous(paths: &PathMatrix) -> Result<EstimateRecord> {
    FieldSummary::from_paths(paths).mle_continuous()
}

/// The martingale `E_{T,N}`, satisfying `theta0 - theta_hat = E / <E>`.
pub fn compute_e_stat(paths: &PathMatrix) -> Result<f64> {
    let c = FieldSummary::from_paths(paths).continuous_stats();
    check_denominator(c.denominator, "energy denominator")?;
    Ok(c.e_stat)
}

/// Discretized MLE with left-endpoint sums. Works on y- or v-form paths;
/// the two give the same estimate up to rounding.
pub fn mle_discrete(paths: &PathMatrix) -> Result<EstimateRecord> {
    FieldSummary::from_paths(paths).mle_discrete()
}

/// `S`, `Lambda`, `R` and `theta_tilde` for one field.
pub fn decompose_discrete(paths: &PathMatrix) -> Result<DiscreteStats> {
    FieldSummary::from_paths(paths).decompose_discrete()
}

/// `sqrt(psi) (theta0 - theta_est)`.
pub fn normalized_error(record: &EstimateRecord, psi_value: f64) -> f64 {
    debug_assert!(psi_value > 0.0);
    psi_value.sqrt() * (record.model.theta0 - record.theta_est)
}
