//! Replication engine: simulates replicates, reduces them to per-replicate
//! statistics, and summarizes each configuration of a sweep.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{
    inverse_moment_diagnostic, k_statistics, mean_estimate, median_iqr, rate_fit, wasserstein1_to_std_normal,
    Estimate, KStatistics, MedianIqr, RateFit,
};
use crate::error::{Error, Result};
use crate::estimators::{step_decay, summarize_row, EstimatorKind, FieldSummary};
use crate::ou_sim::{fill_row, FieldCoeffs, PathForm, PathMatrix, TimeGrid};
use crate::rng::SeedPolicy;
use crate::spectrum::SpectralModel;
use crate::theory;

/// Tag of the auxiliary seed policy used for null samples.
const NULL_FLOOR_TAG: u64 = 0x4E55_4C4C;
/// Number of null sample sets averaged for the `d_W` floor.
pub const NULL_FLOOR_SETS: usize = 32;

/// One `(T, N, M)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub n_modes: usize,
    #[serde(rename = "M")]
    pub steps: usize,
}

impl GridPoint {
    pub fn new(horizon: f64, n_modes: usize, steps: usize) -> Self {
        GridPoint {
            horizon,
            n_modes,
            steps,
        }
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    fn context(&self, e: Error) -> Error {
        Error::Configuration {
            t: self.horizon,
            n: self.n_modes,
            m: self.steps,
            source: Box::new(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    T,
    M,
    Joint,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" => Ok(SweepAxis::N),
            "t" => Ok(SweepAxis::T),
            "m" => Ok(SweepAxis::M),
            "joint" => Ok(SweepAxis::Joint),
            other => Err(format!("unknown sweep axis `{other}` (N|T|M|joint)")),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::N => "N",
            SweepAxis::T => "T",
            SweepAxis::M => "M",
            SweepAxis::Joint => "joint",
        })
    }
}

impl SweepAxis {
    /// The swept coordinate of a point; `joint` uses `N`.
    pub fn value(self, p: &GridPoint) -> f64 {
        match self {
            SweepAxis::T => p.horizon,
            SweepAxis::M => p.steps as f64,
            SweepAxis::N | SweepAxis::Joint => p.n_modes as f64,
        }
    }
}

/// A replicated experiment over one or more grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub model: SpectralModel,
    pub points: Vec<GridPoint>,
    pub estimator: EstimatorKind,
    pub replicates: usize,
    pub seeds: SeedPolicy,
    pub axis: SweepAxis,
    /// Powers `p` for the inverse-moment diagnostic.
    pub inverse_powers: Vec<f64>,
}

fn broadcast<T: Copy>(xs: &[T], len: usize, name: &'static str) -> Result<Vec<T>> {
    match xs.len() {
        1 => Ok(vec![xs[0]; len]),
        l if l == len => Ok(xs.to_vec()),
        l => Err(Error::invalid(name, format!("list has {l} entries, expected 1 or {len}"))),
    }
}

impl Campaign {
    /// Zip the `T`, `N`, `M` lists into points; length-1 lists are broadcast.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: SpectralModel,
        ts: &[f64],
        ns: &[usize],
        ms: &[usize],
        axis: SweepAxis,
        estimator: EstimatorKind,
        replicates: usize,
        seeds: SeedPolicy,
    ) -> Result<Self> {
        if ts.is_empty() || ns.is_empty() || ms.is_empty() {
            return Err(Error::invalid("grid", "T, N and M lists must be non-empty"));
        }
        let len = ts.len().max(ns.len()).max(ms.len());
        let ts = broadcast(ts, len, "T")?;
        let ns = broadcast(ns, len, "N")?;
        let ms = broadcast(ms, len, "M")?;
        let points = (0..len).map(|i| GridPoint::new(ts[i], ns[i], ms[i])).collect();
        let c = Campaign {
            model,
            points,
            estimator,
            replicates,
            seeds,
            axis,
            inverse_powers: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_inverse_powers(mut self, ps: &[f64]) -> Self {
        self.inverse_powers = ps.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replicates < 2 {
            return Err(Error::invalid(
                "replicates",
                format!("campaign requires R >= 2, got {}", self.replicates),
            ));
        }
        if self.points.is_empty() {
            return Err(Error::invalid("grid", "no grid points"));
        }
        for p in &self.points {
            p.grid()?;
            if p.n_modes == 0 {
                return Err(Error::invalid("N", "number of modes must be >= 1"));
            }
            if self.estimator == EstimatorKind::Discrete && p.steps < 2 {
                return Err(Error::invalid("M", "the discretized estimator needs M >= 2"));
            }
        }
        for &p in &self.inverse_powers {
            if !(p > 0.0) {
                return Err(Error::NonPositive { what: "p", value: p });
            }
        }
        let vals: Vec<f64> = self.points.iter().map(|p| self.axis.value(p)).collect();
        if !vals.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "axis",
                format!("sweep axis {} values must be strictly increasing", self.axis),
            ));
        }
        Ok(())
    }
}

/// Discretized-estimator quantities of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReplicate {
    pub theta_tilde: f64,
    pub s: f64,
    pub lambda: f64,
    pub r: f64,
    /// `(theta0 - theta_tilde) - (R + Lambda) / S`.
    pub residual: f64,
}

/// Everything a campaign keeps from one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateStats {
    pub replicate: u64,
    /// First mode at the horizon.
    pub y_end: f64,
    pub theta_hat: f64,
    pub e_stat: f64,
    pub qv: f64,
    /// Present when `M >= 2`.
    pub discrete: Option<DiscreteReplicate>,
}

impl ReplicateStats {
    pub fn from_summary(summary: &FieldSummary, replicate: u64) -> Result<Self> {
        let theta0 = summary.model().theta0;
        let cont = summary.mle_continuous()?;
        let c = match &cont.stats {
            crate::estimators::SufficientStats::Continuous(c) => c,
            _ => unreachable!(),
        };
        let discrete = if summary.grid().steps() >= 2 {
            let d = summary.decompose_discrete()?;
            Some(DiscreteReplicate {
                theta_tilde: d.theta_tilde,
                s: d.s,
                lambda: d.lambda,
                r: d.r,
                residual: d.decomposition_residual(theta0),
            })
        } else {
            None
        };
        Ok(ReplicateStats {
            replicate,
            y_end: summary.modes()[0].end,
            theta_hat: cont.theta_est,
            e_stat: c.e_stat,
            qv: c.qv,
            discrete,
        })
    }

    /// Through a materialized path matrix.
    pub fn from_paths(paths: &PathMatrix) -> Result<Self> {
        Self::from_summary(&FieldSummary::from_paths(paths), paths.replicate())
    }

    pub fn estimate(&self, kind: EstimatorKind) -> Option<f64> {
        match kind {
            EstimatorKind::Continuous => Some(self.theta_hat),
            EstimatorKind::Discrete => self.discrete.map(|d| d.theta_tilde),
        }
    }
}

/// Simulates a field row by row, keeping only per-mode summaries.
pub struct StreamingSimulator {
    model: SpectralModel,
    grid: TimeGrid,
    coeffs: FieldCoeffs,
    rho: Vec<f64>,
    seeds: SeedPolicy,
}

impl StreamingSimulator {
    pub fn new(model: &SpectralModel, point: &GridPoint, seeds: SeedPolicy, zero_noise: bool) -> Result<Self> {
        let grid = point.grid()?;
        let coeffs = FieldCoeffs::new(model, point.n_modes, &grid, zero_noise)?;
        let rho = step_decay(model, &coeffs.deltas, grid.dt());
        Ok(StreamingSimulator {
            model: *model,
            grid,
            coeffs,
            rho,
            seeds,
        })
    }

    /// Row buffer of the right length.
    pub fn buffer(&self) -> Vec<f64> {
        vec![0.0; self.grid.steps() + 1]
    }

    pub fn summary(&self, replicate: u64, buf: &mut [f64]) -> FieldSummary {
        let dt = self.grid.dt();
        let modes = (0..self.coeffs.deltas.len())
            .map(|n| {
                let mut rng = self.seeds.stream(replicate, n);
                fill_row(self.coeffs.a[n], self.coeffs.s[n], &mut rng, buf);
                summarize_row(buf, dt, self.rho[n])
            })
            .collect();
        FieldSummary::from_modes(self.model, self.grid, PathForm::Y, self.coeffs.deltas.clone(), modes)
    }

    pub fn replicate(&self, replicate: u64, buf: &mut [f64]) -> Result<ReplicateStats> {
        ReplicateStats::from_summary(&self.summary(replicate, buf), replicate)
    }
}

/// Replicates `0..r` of one configuration, in replicate order.
pub fn simulate_replicates(
    model: &SpectralModel,
    point: &GridPoint,
    replicates: usize,
    seeds: SeedPolicy,
) -> Result<Vec<ReplicateStats>> {
    let sim = StreamingSimulator::new(model, point, seeds, false).map_err(|e| point.context(e))?;
    (0..replicates as u64)
        .into_par_iter()
        .map_init(|| sim.buffer(), |buf, rep| sim.replicate(rep, buf))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| point.context(e))
}

/// Mean `d_W` of `sets` null samples of size `r` drawn from `N(0, 1)`.
pub fn null_floor(r: usize, sets: usize, seeds: &SeedPolicy) -> Result<Estimate> {
    if sets < 2 {
        return Err(Error::invalid("sets", "the null floor needs at least 2 sample sets"));
    }
    let aux = seeds.derive(NULL_FLOOR_TAG);
    let ws = (0..sets as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = aux.stream(b, 0);
            let xs: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
            wasserstein1_to_std_normal(&xs)
        })
        .collect::<Result<Vec<_>>>()?;
    mean_estimate(&ws)
}

/// Statistics of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub point: GridPoint,
    pub psi: f64,
    /// `sqrt(psi) (theta0 - theta_est)` per replicate.
    pub normalized_errors: Vec<f64>,
    pub mean: Estimate,
    /// Sample variance (`k2`) with its jackknife error.
    pub variance: Estimate,
    pub kstats: KStatistics,
    pub dw_hat: f64,
    /// Median and IQR of `|theta_est - theta0|`.
    pub abs_error: MedianIqr,
    /// `(p, E[(S/psi)^{-p}])`; continuous campaigns use `<E>/psi` for `S/psi`.
    pub inverse_moments: Vec<(f64, Estimate)>,
    pub replicates: Vec<ReplicateStats>,
}

impl ConfigSummary {
    pub fn from_replicates(
        model: &SpectralModel,
        point: GridPoint,
        kind: EstimatorKind,
        reps: Vec<ReplicateStats>,
        inverse_powers: &[f64],
    ) -> Result<Self> {
        let psi = theory::psi(model, point.horizon, point.n_modes)?;
        let root = psi.sqrt();
        let estimates: Vec<f64> = reps
            .iter()
            .map(|r| {
                r.estimate(kind)
                    .ok_or_else(|| Error::invalid("M", "the discretized estimator needs M >= 2"))
            })
            .collect::<Result<_>>()?;
        let normalized: Vec<f64> = estimates.iter().map(|t| root * (model.theta0 - t)).collect();
        let abs: Vec<f64> = estimates.iter().map(|t| (t - model.theta0).abs()).collect();
        let ratios: Vec<f64> = reps
            .iter()
            .map(|r| match (kind, r.discrete) {
                (EstimatorKind::Discrete, Some(d)) => d.s / psi,
                _ => r.qv / psi,
            })
            .collect();
        let kstats = if normalized.len() >= 5 {
            k_statistics(&normalized)?
        } else {
            let m = mean_estimate(&normalized)?;
            let nan = Estimate {
                value: f64::NAN,
                se: f64::NAN,
            };
            let var = normalized.iter().map(|x| (x - m.value).powi(2)).sum::<f64>() / (normalized.len() - 1) as f64;
            KStatistics {
                n: normalized.len(),
                k2: Estimate { value: var, se: f64::NAN },
                k3: nan,
                k4: nan,
            }
        };
        let inverse_moments = inverse_powers
            .iter()
            .map(|&p| Ok((p, inverse_moment_diagnostic(&ratios, p)?)))
            .collect::<Result<_>>()?;
        Ok(ConfigSummary {
            point,
            psi,
            mean: mean_estimate(&normalized)?,
            variance: kstats.k2,
            kstats,
            dw_hat: wasserstein1_to_std_normal(&normalized)?,
            abs_error: median_iqr(&abs)?,
            inverse_moments,
            normalized_errors: normalized,
            replicates: reps,
        })
    }
}

/// Result of [`run_campaign`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCSummary {
    pub campaign: Campaign,
    pub configs: Vec<ConfigSummary>,
    /// Mean null `d_W` for samples of size `R`.
    pub null_floor: Estimate,
}

/// Run every configuration of `campaign`. Deterministic given the master
/// seed and independent of the number of worker threads.
pub fn run_campaign(campaign: &Campaign) -> Result<MCSummary> {
    campaign.validate()?;
    let mut configs = Vec::with_capacity(campaign.points.len());
    for p in &campaign.points {
        log::info!(
            "campaign point T={} N={} M={} R={}",
            p.horizon,
            p.n_modes,
            p.steps,
            campaign.replicates
        );
        let reps = simulate_replicates(&campaign.model, p, campaign.replicates, campaign.seeds)?;
        let s = ConfigSummary::from_replicates(&campaign.model, *p, campaign.estimator, reps, &campaign.inverse_powers)
            .map_err(|e| p.context(e))?;
        configs.push(s);
    }
    let null_floor = null_floor(campaign.replicates, NULL_FLOOR_SETS, &campaign.seeds)?;
    Ok(MCSummary {
        campaign: campaign.clone(),
        configs,
        null_floor,
    })
}

/// Per-point and fitted outcome of a `d_W` rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub sizes: Vec<f64>,
    pub dw: Vec<f64>,
    /// `false` for points excluded as within `floor_mult` of the null floor.
    pub used: Vec<bool>,
    pub floor: f64,
    pub floor_mult: f64,
    /// `None` when fewer than three points survive exclusion.
    pub fit: Option<RateFit>,
}

pub fn rate_sweep(summary: &MCSummary, floor_mult: f64) -> Result<RateSweep> {
    let axis = summary.campaign.axis;
    let sizes: Vec<f64> = summary.configs.iter().map(|c| axis.value(&c.point)).collect();
    let dw: Vec<f64> = summary.configs.iter().map(|c| c.dw_hat).collect();
    let floor = summary.null_floor.value;
    let used: Vec<bool> = dw.iter().map(|&d| d > floor_mult * floor).collect();
    let xs: Vec<f64> = sizes.iter().zip(&used).filter(|(_, &u)| u).map(|(s, _)| *s).collect();
    let ys: Vec<f64> = dw.iter().zip(&used).filter(|(_, &u)| u).map(|(d, _)| *d).collect();
    let fit = if xs.len() >= 3 { Some(rate_fit(&xs, &ys)?) } else { None };
    Ok(RateSweep {
        sizes,
        dw,
        used,
        floor,
        floor_mult,
        fit,
    })
}

/// One row of a consistency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub point: GridPoint,
    pub median_abs_error: f64,
    pub iqr: f64,
    /// `dt N^{2 alpha/d}`.
    pub consistency_indicator: f64,
    /// `T^{3/2} N^{3 alpha/d + 1/2} / M`.
    pub clt_indicator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyTable {
    pub rows: Vec<ConsistencyRow>,
    /// Set when the indicator `dt N^{2 alpha/d}` does not strictly decrease along the sweep.
    pub condition_warning: bool,
    pub summary: MCSummary,
}

impl ConsistencyTable {
    /// Medians strictly decreasing; `None` with a single row.
    pub fn strictly_decreasing(&self) -> Option<bool> {
        if self.rows.len() < 2 {
            return None;
        }
        Some(self.rows.windows(2).all(|w| w[1].median_abs_error < w[0].median_abs_error))
    }

    /// Last two medians within `mult` times the larger of their IQRs.
    pub fn plateau(&self, mult: f64) -> Option<bool> {
        let n = self.rows.len();
        if n < 2 {
            return None;
        }
        let (a, b) = (self.rows[n - 2], self.rows[n - 1]);
        Some((a.median_abs_error - b.median_abs_error).abs() <= mult * a.iqr.max(b.iqr))
    }
}

/// Median `|theta_tilde - theta0|` per scale of a joint sweep.
pub fn consistency_sweep(campaign: &Campaign) -> Result<ConsistencyTable> {
    let mut c = campaign.clone();
    c.estimator = EstimatorKind::Discrete;
    let summary = run_campaign(&c)?;
    let rows: Vec<ConsistencyRow> = summary
        .configs
        .iter()
        .map(|s| {
            let b = theory::theta_tilde_bound(&c.model, s.point.horizon, s.point.n_modes, s.point.steps);
            ConsistencyRow {
                point: s.point,
                median_abs_error: s.abs_error.median,
                iqr: s.abs_error.iqr,
                consistency_indicator: b.consistency_indicator,
                clt_indicator: b.clt_indicator,
            }
        })
        .collect();
    let condition_warning = rows.len() >= 2
        && !rows
            .windows(2)
            .all(|w| w[1].consistency_indicator < w[0].consistency_indicator);
    if condition_warning {
        log::warn!("consistency indicator dt*N^(2a/d) does not decrease along the sweep");
    }
    Ok(ConsistencyTable {
        rows,
        condition_warning,
        summary,
    })
}

/// Views of a fine simulation: the first `horizon/dt_fine` steps,
/// subsampled to `M` steps. Every view shares the fine path of each replicate.
pub fn run_coupled(
    model: &SpectralModel,
    fine: &GridPoint,
    views: &[GridPoint],
    replicates: usize,
    seeds: SeedPolicy,
) -> Result<Vec<Vec<ReplicateStats>>> {
    let fine_grid = fine.grid()?;
    let dt = fine_grid.dt();
    let mut plan = Vec::with_capacity(views.len());
    for v in views {
        if v.n_modes != fine.n_modes {
            return Err(v.context(Error::invalid("N", "views must keep the fine N")));
        }
        let steps_f = v.horizon / dt;
        let keep = steps_f.round() as usize;
        if (steps_f - keep as f64).abs() > 1e-9 * steps_f || keep > fine.steps || keep == 0 || keep % v.steps != 0 {
            return Err(v.context(Error::invalid(
                "M",
                "view is not a truncation and coarsening of the fine grid",
            )));
        }
        plan.push((keep, keep / v.steps));
    }
    let opts = crate::ou_sim::SimOptions::default();
    let per_rep = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let paths = crate::ou_sim::simulate_field(model, fine.n_modes, &fine_grid, &seeds, rep, &opts)?;
            plan.iter()
                .map(|&(keep, factor)| ReplicateStats::from_paths(&paths.truncate(keep)?.coarsen(factor)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::with_capacity(replicates); views.len()];
    for row in per_rep {
        for (j, s) in row.into_iter().enumerate() {
            out[j].push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou_sim::{simulate_field, SimOptions};

    fn model() -> SpectralModel {
        SpectralModel::interval_1d(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn streaming_matches_materialized_paths_bitwise() {
        let m = model();
        let p = GridPoint::new(2.0, 5, 300);
        let seeds = SeedPolicy::new(11);
        let sim = StreamingSimulator::new(&m, &p, seeds, false).unwrap();
        let mut buf = sim.buffer();
        for rep in 0..5 {
            let a = sim.replicate(rep, &mut buf).unwrap();
            let paths = simulate_field(&m, 5, &p.grid().unwrap(), &seeds, rep, &SimOptions::default()).unwrap();
            let b = ReplicateStats::from_paths(&paths).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn campaign_is_deterministic() {
        let c = Campaign::new(
            model(),
            &[1.0],
            &[2, 3],
            &[20],
            SweepAxis::N,
            EstimatorKind::Discrete,
            6,
            SeedPolicy::new(3),
        )
        .unwrap()
        .with_inverse_powers(&[1.0, 2.0]);
        let a = run_campaign(&c).unwrap();
        let b = run_campaign(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.configs.len(), 2);
        assert_eq!(a.configs[0].normalized_errors.len(), 6);
        assert!(a.configs[0].dw_hat >= 0.0);
        assert!(a.configs[1].inverse_moments[1].1.value > 0.0);
    }

    #[test]
    fn campaign_preconditions() {
        let mk = |r: usize, ns: &[usize]| {
            Campaign::new(model(), &[1.0], ns, &[10], SweepAxis::N, EstimatorKind::Continuous, r, SeedPolicy::new(1))
        };
        assert!(mk(1, &[2]).is_err());
        assert!(mk(2, &[3, 2]).is_err());
        assert!(mk(2, &[2, 3]).is_ok());
        let bad = Campaign::new(model(), &[1.0, 2.0], &[1, 2, 3], &[10], SweepAxis::N, EstimatorKind::Continuous, 2, SeedPolicy::new(1));
        assert!(bad.is_err());
    }

    #[test]
    fn coupled_views_match_direct_coarsening() {
        let m = model();
        let fine = GridPoint::new(4.0, 3, 400);
        let views = [GridPoint::new(2.0, 3, 50), GridPoint::new(4.0, 3, 400)];
        let seeds = SeedPolicy::new(9);
        let out = run_coupled(&m, &fine, &views, 3, seeds).unwrap();
        let full = simulate_replicates(&m, &fine, 3, seeds).unwrap();
        assert_eq!(out[1], full);
        assert_eq!(out[0].len(), 3);
        assert!(run_coupled(&m, &fine, &[GridPoint::new(2.0, 3, 33)], 2, seeds).is_err());
    }

    #[test]
    fn consistency_flags() {
        let c = Campaign::new(
            model(),
            &[1.0, 2.0],
            &[2, 4],
            &[10, 20],
            SweepAxis::Joint,
            EstimatorKind::Discrete,
            20,
            SeedPolicy::new(5),
        )
        .unwrap();
        let t = consistency_sweep(&c).unwrap();
        // dt N^2 grows from 0.4 to 1.6.
        assert!(t.condition_warning);
        assert!(t.strictly_decreasing().is_some());
        let single = Campaign::new(model(), &[1.0], &[2], &[10], SweepAxis::Joint, EstimatorKind::Discrete, 20, SeedPolicy::new(5)).unwrap();
        let t = consistency_sweep(&single).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.strictly_decreasing(), None);
        assert!(!t.condition_warning);
    }

    #[test]
    fn rate_sweep_excludes_floor_points() {
        let c = Campaign::new(model(), &[1.0], &[1, 2, 3], &[10], SweepAxis::N, EstimatorKind::Continuous, 10, SeedPolicy::new(5)).unwrap();
        let mut s = run_campaign(&c).unwrap();
        s.null_floor.value = 0.01;
        s.configs[0].dw_hat = 0.5;
        s.configs[1].dw_hat = 0.2;
        s.configs[2].dw_hat = 0.02;
        let r = rate_sweep(&s, 3.0).unwrap();
        assert_eq!(r.used, vec![true, true, false]);
        assert!(r.fit.is_none());
    }
}
