//! Model parameters and the Laplacian eigenvalue sequence.
//!
//! Everything downstream depends on the model only through the sorted
//! sequence `delta_n = sqrt(-h_n)` of square roots of the negated Dirichlet
//! Laplacian eigenvalues, so the spatial domain is never materialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the eigenvalue square roots `delta_n` are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenRule {
    /// Dirichlet Laplacian on `(0, pi)`: `delta_n = n`. Requires `dim = 1`.
    ExactInterval1D,
    /// `delta_n = sigma_bar^{1/2} n^{1/dim}`, the Weyl asymptotics taken as exact.
    AsymptoticPowerLaw,
}

impl EigenRule {
    pub fn code(self) -> u64 {
        match self {
            EigenRule::ExactInterval1D => 0,
            EigenRule::AsymptoticPowerLaw => 1,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(EigenRule::ExactInterval1D),
            1 => Some(EigenRule::AsymptoticPowerLaw),
            _ => None,
        }
    }
}

impl std::str::FromStr for EigenRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exact_interval1d" | "exact_interval_1d" | "exact" | "interval" => {
                Ok(EigenRule::ExactInterval1D)
            }
            "asymptotic_power_law" | "power_law" | "powerlaw" | "asymptotic" => {
                Ok(EigenRule::AsymptoticPowerLaw)
            }
            other => Err(format!(
                "unknown eigen rule `{other}` (expected exact_interval1d or power_law)"
            )),
        }
    }
}

impl std::fmt::Display for EigenRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EigenRule::ExactInterval1D => "exact_interval1d",
            EigenRule::AsymptoticPowerLaw => "power_law",
        })
    }
}

/// Parameters of the fractional stochastic heat equation
/// `dY = -theta (-Laplacian)^alpha Y dt + sum_n delta_n^{-gamma} e_n dw_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    /// Fractional power of the Laplacian.
    pub alpha: f64,
    /// Noise smoothing exponent.
    pub gamma: f64,
    /// Spatial dimension.
    pub dim: u32,
    /// True drift parameter.
    pub theta0: f64,
    /// Constant in `delta_n^2 n^{-2/d} -> sigma_bar`.
    pub sigma_bar: f64,
    pub eigen_rule: EigenRule,
}

impl SpectralModel {
    /// Validated constructor.
    ///
    /// A noise exponent with `2 gamma <= dim` only produces a warning: every
    /// finite-N quantity is still well defined.
    pub fn new(
        alpha: f64,
        gamma: f64,
        dim: u32,
        theta0: f64,
        sigma_bar: f64,
        eigen_rule: EigenRule,
    ) -> Result<Self> {
        let model = SpectralModel {
            alpha,
            gamma,
            dim,
            theta0,
            sigma_bar,
            eigen_rule,
        };
        model.validate()?;
        if 2.0 * gamma <= dim as f64 {
            log::warn!(
                "2*gamma = {} <= d = {}: the infinite-dimensional solution is not \
                 well posed, finite-N results remain valid",
                2.0 * gamma,
                dim
            );
        }
        Ok(model)
    }

    /// The exact 1D interval spectrum `delta_n = n` with `sigma_bar = 1`.
    pub fn interval_1d(alpha: f64, gamma: f64, theta0: f64) -> Result<Self> {
        Self::new(alpha, gamma, 1, theta0, 1.0, EigenRule::ExactInterval1D)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid("gamma", format!("must be >= 0, got {}", self.gamma)));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dim", "must be >= 1"));
        }
        if !(self.theta0.is_finite() && self.theta0 > 0.0) {
            return Err(Error::invalid("theta0", format!("must be > 0, got {}", self.theta0)));
        }
        if !(self.sigma_bar.is_finite() && self.sigma_bar > 0.0) {
            return Err(Error::invalid(
                "sigma_bar",
                format!("must be > 0, got {}", self.sigma_bar),
            ));
        }
        if self.eigen_rule == EigenRule::ExactInterval1D {
            if self.dim != 1 {
                return Err(Error::invalid(
                    "dim",
                    format!("exact_interval1d requires dim = 1, got {}", self.dim),
                ));
            }
            if self.sigma_bar != 1.0 {
                return Err(Error::invalid(
                    "sigma_bar",
                    format!("exact_interval1d fixes sigma_bar = 1, got {}", self.sigma_bar),
                ));
            }
        }
        Ok(())
    }

    /// `delta_n` for a single 1-based mode index.
    pub fn delta(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match self.eigen_rule {
            EigenRule::ExactInterval1D => n as f64,
            EigenRule::AsymptoticPowerLaw => {
                self.sigma_bar.sqrt() * (n as f64).powf(1.0 / self.dim as f64)
            }
        }
    }

    /// Mean-reversion rate `theta0 delta^{2 alpha}` of the mode with the given `delta`.
    pub fn rate(&self, delta: f64) -> f64 {
        self.theta0 * delta.powf(2.0 * self.alpha)
    }

    /// `alpha / d`.
    pub fn alpha_over_d(&self) -> f64 {
        self.alpha / self.dim as f64
    }
}

/// Sorted eigenvalue square roots `delta_1 <= ... <= delta_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSequence {
    deltas: Vec<f64>,
}

impl EigenSequence {
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// `sum_n delta_n^p`, evaluated exactly.
    pub fn power_sum(&self, p: f64) -> f64 {
        let mut acc = crate::summation::NeumaierSum::default();
        for &d in &self.deltas {
            acc.add(d.powf(p));
        }
        acc.value()
    }
}

/// `delta_1..delta_N` under the model's eigen rule.
pub fn eigen_deltas(model: &SpectralModel, n_modes: usize) -> Result<EigenSequence> {
    model.validate()?;
    if n_modes == 0 {
        return Err(Error::invalid("N", "number of modes must be >= 1"));
    }
    let deltas = (1..=n_modes).map(|n| model.delta(n)).collect();
    Ok(EigenSequence { deltas })
}

/// Per-mode weights used by the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWeights {
    /// `delta_n^{2 alpha + 2 gamma}`
    pub w2: Vec<f64>,
    /// `delta_n^{4 alpha + 2 gamma}`
    pub w4: Vec<f64>,
    /// `delta_n^{2 alpha}` (v-form numerator weight)
    pub p2: Vec<f64>,
    /// `delta_n^{4 alpha}` (v-form denominator weight)
    pub p4: Vec<f64>,
}

pub fn mode_weights(model: &SpectralModel, n_modes: usize) -> Result<ModeWeights> {
    let seq = eigen_deltas(model, n_modes)?;
    Ok(weights_for(model, seq.deltas()))
}

pub(crate) fn weights_for(model: &SpectralModel, deltas: &[f64]) -> ModeWeights {
    let (a, g) = (model.alpha, model.gamma);
    ModeWeights {
        w2: deltas.iter().map(|d| d.powf(2.0 * a + 2.0 * g)).collect(),
        w4: deltas.iter().map(|d| d.powf(4.0 * a + 2.0 * g)).collect(),
        p2: deltas.iter().map(|d| d.powf(2.0 * a)).collect(),
        p4: deltas.iter().map(|d| d.powf(4.0 * a)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn power_law(alpha: f64, gamma: f64, dim: u32, sigma_bar: f64) -> SpectralModel {
        SpectralModel::new(alpha, gamma, dim, 1.0, sigma_bar, EigenRule::AsymptoticPowerLaw).unwrap()
    }

    #[test]
    fn interval_spectrum_is_integers() {
        let m = SpectralModel::interval_1d(1.0, 1.0, 1.0).unwrap();
        assert_eq!(eigen_deltas(&m, 3).unwrap().deltas(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn power_law_two_dimensions() {
        let m = power_law(1.0, 2.0, 2, 4.0);
        let d = eigen_deltas(&m, 2).unwrap();
        assert_relative_eq!(d.deltas()[0], 2.0);
        assert_relative_eq!(d.deltas()[1], 2.0 * 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn power_law_unit_constant_matches_interval() {
        let m = power_law(1.0, 1.0, 1, 1.0);
        assert_eq!(eigen_deltas(&m, 4).unwrap().deltas(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn weights_examples() {
        let unit = mode_weights(&SpectralModel::interval_1d(0.7, 1.3, 1.0).unwrap(), 1).unwrap();
        assert_eq!(unit.w2, vec![1.0]);
        assert_eq!(unit.w4, vec![1.0]);

        let m = SpectralModel::interval_1d(1.0, 0.0, 1.0).unwrap();
        let w = weights_for(&m, &[2.0]);
        assert_relative_eq!(w.w2[0], 4.0);
        assert_relative_eq!(w.w4[0], 16.0);

        let m = SpectralModel::interval_1d(0.5, 0.5, 1.0).unwrap();
        let w = mode_weights(&m, 2).unwrap();
        assert_relative_eq!(w.w2[1], 4.0, max_relative = 1e-15);
        assert_relative_eq!(w.w4[1], 8.0, max_relative = 1e-15);
        assert_relative_eq!(w.w2[0], 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralModel::interval_1d(0.0, 1.0, 1.0).is_err());
        assert!(SpectralModel::interval_1d(1.0, -1.0, 1.0).is_err());
        assert!(SpectralModel::interval_1d(1.0, 1.0, 0.0).is_err());
        assert!(SpectralModel::new(1.0, 1.0, 2, 1.0, 1.0, EigenRule::ExactInterval1D).is_err());
        assert!(SpectralModel::new(1.0, 1.0, 1, 1.0, 2.0, EigenRule::ExactInterval1D).is_err());
        assert!(SpectralModel::new(1.0, 1.0, 1, 1.0, 0.0, EigenRule::AsymptoticPowerLaw).is_err());
        let m = SpectralModel::interval_1d(1.0, 1.0, 1.0).unwrap();
        assert!(eigen_deltas(&m, 0).is_err());
    }

    #[test]
    fn gamma_zero_is_allowed() {
        assert!(SpectralModel::interval_1d(1.0, 0.0, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn deltas_monotone_and_weyl_exact(
            alpha in 0.1f64..3.0,
            dim in 1u32..4,
            sigma_bar in 0.1f64..10.0,
            n in 1usize..300,
        ) {
            let m = power_law(alpha, 2.0, dim, sigma_bar);
            let seq = eigen_deltas(&m, n).unwrap();
            let d = seq.deltas();
            prop_assert!(d.iter().all(|&x| x > 0.0));
            prop_assert!(d.windows(2).all(|w| w[0] <= w[1]));
            for (i, &x) in d.iter().enumerate() {
                let k = (i + 1) as f64;
                let ratio = x * x * k.powf(-2.0 / dim as f64);
                prop_assert!((ratio - sigma_bar).abs() <= 1e-12 * sigma_bar);
            }
            let w = weights_for(&m, d);
            for i in 0..n {
                let expect = w.w2[i] * d[i].powf(2.0 * alpha);
                prop_assert!((w.w4[i] - expect).abs() <= 1e-12 * w.w4[i]);
            }
        }
    }
}
