//! Flat tabular form of campaign results, one row per (configuration, statistic).
//!
//! Columns: `T, N, M, estimator, statistic, value, std_error, samples, seed`.
//! Rows that do not belong to a single configuration (fits, floors) leave
//! `T`, `N`, `M` empty; statistics without a standard error leave it empty.

use serde::{Deserialize, Serialize};

use super::campaign::{ConsistencyTable, GridPoint, MCSummary, RateSweep};
use super::stats::Estimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    #[serde(rename = "N")]
    pub n_modes: Option<usize>,
    #[serde(rename = "M")]
    pub steps: Option<usize>,
    pub estimator: String,
    pub statistic: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Builds rows sharing estimator, seed and sample count.
pub struct RowBuilder {
    pub estimator: String,
    pub seed: u64,
    pub samples: usize,
    pub rows: Vec<StatRow>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl RowBuilder {
    pub fn new(estimator: impl Into<String>, seed: u64, samples: usize) -> Self {
        RowBuilder {
            estimator: estimator.into(),
            seed,
            samples,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, point: Option<&GridPoint>, statistic: impl Into<String>, value: f64, se: Option<f64>) {
        self.rows.push(StatRow {
            horizon: point.map(|p| p.horizon),
            n_modes: point.map(|p| p.n_modes),
            steps: point.map(|p| p.steps),
            estimator: self.estimator.clone(),
            statistic: statistic.into(),
            value,
            std_error: se.and_then(finite),
            samples: self.samples,
            seed: self.seed,
        });
    }

    pub fn push_estimate(&mut self, point: Option<&GridPoint>, statistic: impl Into<String>, e: Estimate) {
        self.push(point, statistic, e.value, Some(e.se));
    }
}

/// Per-configuration statistics of a campaign plus its null floor.
pub fn summary_rows(summary: &MCSummary) -> Vec<StatRow> {
    let c = &summary.campaign;
    let mut b = RowBuilder::new(c.estimator.to_string(), c.seeds.master_seed, c.replicates);
    for s in &summary.configs {
        let p = Some(&s.point);
        b.push(p, "psi", s.psi, None);
        b.push_estimate(p, "mean", s.mean);
        b.push_estimate(p, "variance", s.variance);
        b.push_estimate(p, "k3", s.kstats.k3);
        b.push_estimate(p, "k4", s.kstats.k4);
        b.push(p, "dw_hat", s.dw_hat, None);
        b.push(p, "median_abs_error", s.abs_error.median, None);
        b.push(p, "iqr_abs_error", s.abs_error.iqr, None);
        for (pw, e) in &s.inverse_moments {
            b.push_estimate(p, format!("inverse_moment_p{pw}"), *e);
        }
    }
    b.push_estimate(None, "null_floor", summary.null_floor);
    b.rows
}

/// Per-point `d_W` with inclusion flags, then the fit.
pub fn rate_rows(sweep: &RateSweep, summary: &MCSummary) -> Vec<StatRow> {
    let c = &summary.campaign;
    let mut b = RowBuilder::new(c.estimator.to_string(), c.seeds.master_seed, c.replicates);
    for (i, s) in summary.configs.iter().enumerate() {
        b.push(Some(&s.point), "rate_point_used", if sweep.used[i] { 1.0 } else { 0.0 }, None);
    }
    b.push(None, "floor_threshold", sweep.floor * sweep.floor_mult, None);
    if let Some(f) = &sweep.fit {
        b.push(None, "rate_slope", f.slope, None);
        b.push(None, "rate_intercept", f.intercept, None);
        b.push(None, "rate_r2", f.r2, None);
    }
    b.rows
}

/// Per-scale medians and condition indicators.
pub fn consistency_rows(table: &ConsistencyTable) -> Vec<StatRow> {
    let c = &table.summary.campaign;
    let mut b = RowBuilder::new(c.estimator.to_string(), c.seeds.master_seed, c.replicates);
    for r in &table.rows {
        let p = Some(&r.point);
        b.push(p, "median_abs_error", r.median_abs_error, None);
        b.push(p, "iqr_abs_error", r.iqr, None);
        b.push(p, "consistency_indicator", r.consistency_indicator, None);
        b.push(p, "clt_indicator", r.clt_indicator, None);
    }
    b.push(None, "condition_warning", if table.condition_warning { 1.0 } else { 0.0 }, None);
    b.rows
}
