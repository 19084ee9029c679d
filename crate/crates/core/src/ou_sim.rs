//! Exact simulation of the Fourier modes on a uniform time grid.
//!
//! Mode `n` solves `dy = -theta0 delta_n^{2 alpha} y dt + delta_n^{-gamma} dw_n`
//! with `y(0) = 0`. Its transition law over a step `dt` is Gaussian with
//! mean `a y` and variance `s2`, so the recursion `y_i = a y_{i-1} + sqrt(s2) xi_i`
//! reproduces the grid marginals exactly for every `dt`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SeedPolicy, MAX_MODES};
use crate::spectrum::{eigen_deltas, SpectralModel};

/// Exponent beyond which `exp(-x)` is treated as zero.
pub const SATURATION_EXPONENT: f64 = 700.0;

/// Default cap on the size of a single path matrix.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Uniform grid `t_i = i T / M`, `i = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("T", format!("horizon must be > 0, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::invalid("M", "number of steps must be >= 1"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    /// Horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }
}

/// Conditional mean multiplier and variance of one exact OU step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionCoeffs {
    pub a: f64,
    pub s2: f64,
}

/// `a = exp(-c dt)` and `s2 = delta^{-2 gamma} (1 - a^2) / (2c)` with
/// `c = theta0 delta^{2 alpha}`. Saturates to `a = 0` and the stationary
/// variance once `c dt` exceeds [`SATURATION_EXPONENT`].
pub fn transition_coeffs(model: &SpectralModel, delta: f64, dt: f64) -> Result<TransitionCoeffs> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
    }
    let c = model.rate(delta);
    let noise = delta.powf(-2.0 * model.gamma);
    let x = c * dt;
    if x > SATURATION_EXPONENT {
        return Ok(TransitionCoeffs {
            a: 0.0,
            s2: noise / (2.0 * c),
        });
    }
    Ok(TransitionCoeffs {
        a: (-x).exp(),
        s2: noise * dt * one_minus_exp_over_x(2.0 * x),
    })
}

/// `(1 - exp(-x)) / x`, accurate for tiny `x`.
pub(crate) fn one_minus_exp_over_x(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Which process the rows hold: the physical modes `y_n`, or `v_n = delta_n^gamma y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathForm {
    Y,
    V,
}

/// Simulated mode values `y[n][i] = y_{n+1}(t_i)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    values: Vec<f64>,
    n_modes: usize,
    model: SpectralModel,
    grid: TimeGrid,
    deltas: Vec<f64>,
    seed: u64,
    replicate: u64,
    form: PathForm,
}

impl PathMatrix {
    /// Wrap externally produced rows (tests, replayed dumps).
    pub fn from_rows(
        model: SpectralModel,
        grid: TimeGrid,
        rows: Vec<Vec<f64>>,
        form: PathForm,
    ) -> Result<Self> {
        let n_modes = rows.len();
        let seq = eigen_deltas(&model, n_modes)?;
        let width = grid.steps() + 1;
        let mut values = Vec::with_capacity(n_modes * width);
        for (n, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::invalid(
                    "rows",
                    format!("row {n} has {} entries, grid needs {width}", row.len()),
                ));
            }
            values.extend(row);
        }
        Self::from_flat(model, grid, values, n_modes, seq.deltas().to_vec(), 0, 0, form)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_flat(
        model: SpectralModel,
        grid: TimeGrid,
        values: Vec<f64>,
        n_modes: usize,
        deltas: Vec<f64>,
        seed: u64,
        replicate: u64,
        form: PathForm,
    ) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("path matrix holds non-finite values".into()));
        }
        Ok(PathMatrix {
            values,
            n_modes,
            model,
            grid,
            deltas,
            seed,
            replicate,
            form,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn form(&self) -> PathForm {
        self.form
    }

    /// Row for the zero-based mode index `n`.
    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.grid.steps() + 1;
        &self.values[n * w..(n + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.grid.steps() + 1)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Keep every `factor`-th grid point. An exact path on the coarser grid.
    pub fn coarsen(&self, factor: usize) -> Result<PathMatrix> {
        let m = self.grid.steps();
        if factor == 0 || m % factor != 0 {
            return Err(Error::invalid(
                "factor",
                format!("{factor} does not divide M = {m}"),
            ));
        }
        let grid = TimeGrid::new(self.grid.horizon(), m / factor)?;
        let values = self
            .rows()
            .flat_map(|row| row.iter().step_by(factor).copied())
            .collect();
        Ok(PathMatrix {
            values,
            grid,
            deltas: self.deltas.clone(),
            ..*self
        })
    }

    /// Restrict to the first `steps` steps, i.e. horizon `steps * dt`.
    pub fn truncate(&self, steps: usize) -> Result<PathMatrix> {
        if steps == 0 || steps > self.grid.steps() {
            return Err(Error::invalid(
                "steps",
                format!("must lie in 1..={}, got {steps}", self.grid.steps()),
            ));
        }
        let horizon = if steps == self.grid.steps() {
            self.grid.horizon()
        } else {
            self.grid.dt() * steps as f64
        };
        let grid = TimeGrid::new(horizon, steps)?;
        let values = self
            .rows()
            .flat_map(|row| row[..=steps].iter().copied())
            .collect();
        Ok(PathMatrix {
            values,
            grid,
            deltas: self.deltas.clone(),
            ..*self
        })
    }
}

impl PathMatrix {
    fn rescaled(&self, exponent_sign: f64, form: PathForm) -> PathMatrix {
        let gamma = self.model.gamma;
        let mut values = self.values.clone();
        let w = self.grid.steps() + 1;
        for (row, &d) in values.chunks_exact_mut(w).zip(&self.deltas) {
            let s = d.powf(exponent_sign * gamma);
            row.iter_mut().for_each(|x| *x *= s);
        }
        PathMatrix {
            values,
            deltas: self.deltas.clone(),
            form,
            ..*self
        }
    }
}

/// `v[n][i] = delta_n^gamma y[n][i]`. Identity on v-form input.
pub fn to_vform(paths: &PathMatrix) -> PathMatrix {
    match paths.form {
        PathForm::V => paths.clone(),
        PathForm::Y => paths.rescaled(1.0, PathForm::V),
    }
}

/// Inverse of [`to_vform`].
pub fn to_yform(paths: &PathMatrix) -> PathMatrix {
    match paths.form {
        PathForm::Y => paths.clone(),
        PathForm::V => paths.rescaled(-1.0, PathForm::Y),
    }
}

/// Knobs for [`simulate_field`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Test hook: force every innovation variance to zero.
    pub zero_noise: bool,
    /// Largest path matrix, in bytes, that may be allocated.
    pub memory_budget: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            zero_noise: false,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Per-mode step coefficients for a whole field.
#[derive(Debug, Clone)]
pub struct FieldCoeffs {
    pub deltas: Vec<f64>,
    pub a: Vec<f64>,
    pub s: Vec<f64>,
}

impl FieldCoeffs {
    pub fn new(model: &SpectralModel, n_modes: usize, grid: &TimeGrid, zero_noise: bool) -> Result<Self> {
        if n_modes > MAX_MODES {
            return Err(Error::invalid("N", format!("at most {MAX_MODES} modes supported")));
        }
        let deltas = eigen_deltas(model, n_modes)?.deltas().to_vec();
        let mut a = Vec::with_capacity(n_modes);
        let mut s = Vec::with_capacity(n_modes);
        for &d in &deltas {
            let c = transition_coeffs(model, d, grid.dt())?;
            a.push(c.a);
            s.push(if zero_noise { 0.0 } else { c.s2.sqrt() });
        }
        Ok(FieldCoeffs { deltas, a, s })
    }
}

/// Fill `row` (length `M + 1`) with one exact path started at zero.
#[inline]
pub(crate) fn fill_row<R: Rng>(a: f64, s: f64, rng: &mut R, row: &mut [f64]) {
    let mut y = 0.0;
    row[0] = 0.0;
    for slot in &mut row[1..] {
        let xi: f64 = rng.sample(StandardNormal);
        y = a * y + s * xi;
        *slot = y;
    }
}

/// Simulate modes `1..=N` on `grid` for one replicate.
pub fn simulate_field(
    model: &SpectralModel,
    n_modes: usize,
    grid: &TimeGrid,
    seeds: &SeedPolicy,
    replicate: u64,
    opts: &SimOptions,
) -> Result<PathMatrix> {
    if n_modes == 0 {
        return Err(Error::invalid("N", "number of modes must be >= 1"));
    }
    let width = grid.steps() + 1;
    let requested = (n_modes as u64)
        .saturating_mul(width as u64)
        .saturating_mul(8);
    if requested > opts.memory_budget {
        return Err(Error::MemoryBudget {
            requested,
            budget: opts.memory_budget,
        });
    }
    let coeffs = FieldCoeffs::new(model, n_modes, grid, opts.zero_noise)?;
    let mut values = vec![0.0; n_modes * width];
    values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(n, row)| {
            let mut rng = seeds.stream(replicate, n);
            fill_row(coeffs.a[n], coeffs.s[n], &mut rng, row);
        });
    PathMatrix::from_flat(
        *model,
        *grid,
        values,
        n_modes,
        coeffs.deltas,
        seeds.master_seed,
        replicate,
        PathForm::Y,
    )
}

/// Closed-form `Var y_n(t) = delta^{-2 gamma} (1 - exp(-2ct)) / (2c)`.
pub fn marginal_variance(model: &SpectralModel, delta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let c = model.rate(delta);
    delta.powf(-2.0 * model.gamma) * t * one_minus_exp_over_x(2.0 * c * t)
}
