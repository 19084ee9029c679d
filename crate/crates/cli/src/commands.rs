//! Subcommand implementations. Each returns the data payload and verdicts;
//! `main` decides where they go and which exit code results.

use fracheat::dump::write_paths;
use fracheat::estimators::{EstimatorKind, FieldSummary};
use fracheat::montecarlo::report::{consistency_rows, rate_rows, summary_rows, RowBuilder, StatRow};
use fracheat::montecarlo::{
    consistency_sweep, k_statistics, rate_fit, rate_sweep, run_campaign, Campaign, GridPoint, MCSummary,
};
use fracheat::ou_sim::{marginal_variance, simulate_field, SimOptions, TimeGrid};
use fracheat::rng::SeedPolicy;
use fracheat::theory::{self, TheoryReport};

use crate::config::{ConfigError, ExperimentConfig, OutputFormat};
use crate::output::write_rows;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("config error: {0}")]
    Invalid(fracheat::Error),
    #[error("runtime error: {0}")]
    Runtime(fracheat::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<fracheat::Error> for CliError {
    fn from(e: fracheat::Error) -> Self {
        if is_config_error(&e) {
            CliError::Invalid(e)
        } else {
            CliError::Runtime(e)
        }
    }
}

fn is_config_error(e: &fracheat::Error) -> bool {
    match e {
        fracheat::Error::InvalidParameter { .. } | fracheat::Error::NonPositive { .. } => true,
        fracheat::Error::Configuration { source, .. } => is_config_error(source),
        _ => false,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    fn check(name: impl Into<String>, ok: bool, detail: String) -> Self {
        Verdict {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status, self.name, self.detail)
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Data payload, written to `out` or stdout.
    pub payload: Vec<u8>,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

impl Outcome {
    pub fn failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Fail)
    }
}

fn rows_payload(rows: &[StatRow], format: OutputFormat) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_rows(rows, format, &mut buf)?;
    Ok(buf)
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<GridPoint>, CliError> {
    let len = cfg.horizons.len().max(cfg.modes.len()).max(cfg.steps.len());
    let pick = |l: usize, i: usize, name: &str| -> Result<usize, CliError> {
        match l {
            1 => Ok(0),
            x if x == len => Ok(i),
            x => Err(ConfigError {
                origin: "config".into(),
                field: name.into(),
                message: format!("list has {x} entries, expected 1 or {len}"),
            }
            .into()),
        }
    };
    (0..len)
        .map(|i| {
            Ok(GridPoint::new(
                cfg.horizons[pick(cfg.horizons.len(), i, "T")?],
                cfg.modes[pick(cfg.modes.len(), i, "N")?],
                cfg.steps[pick(cfg.steps.len(), i, "M")?],
            ))
        })
        .collect()
}

fn campaign(cfg: &ExperimentConfig) -> Result<Campaign, CliError> {
    let model = cfg.model()?;
    Ok(Campaign::new(
        model,
        &cfg.horizons,
        &cfg.modes,
        &cfg.steps,
        cfg.axis,
        cfg.estimator,
        cfg.replicates,
        SeedPolicy::new(cfg.seed),
    )?
    .with_inverse_powers(&cfg.inverse_powers))
}

/// ψ, λ, bounds and indicators for each configured point.
pub fn cmd_theory(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let reports = points(cfg)?
        .iter()
        .map(|p| TheoryReport::new(&model, p.horizon, p.n_modes, p.steps))
        .collect::<Result<Vec<_>, _>>()?;
    let payload = match cfg.format {
        OutputFormat::Json => {
            let mut b = serde_json::to_vec_pretty(&reports).map_err(std::io::Error::other)?;
            b.push(b'\n');
            b
        }
        OutputFormat::Csv => reports
            .iter()
            .map(|r| r.to_key_value())
            .collect::<Vec<_>>()
            .join("\n")
            .into_bytes(),
    };
    Ok(Outcome {
        payload,
        ..Default::default()
    })
}

/// Simulate one replicate and write the binary path dump.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let model = cfg.model()?;
    let (t, n, m) = cfg.single_point()?;
    let grid = TimeGrid::new(t, m)?;
    let opts = SimOptions {
        zero_noise: cfg.zero_noise,
        ..Default::default()
    };
    let paths = simulate_field(&model, n, &grid, &SeedPolicy::new(cfg.seed), cfg.replicate, &opts)?;
    let mut payload = Vec::new();
    write_paths(&paths, &mut payload)?;
    let summary = FieldSummary::from_paths(&paths);
    let mut notes = vec![format!(
        "simulated N={n} modes, M={m} steps, T={t}, seed={}, replicate={}",
        cfg.seed, cfg.replicate
    )];
    for (k, (s, &d)) in summary.modes().iter().zip(paths.deltas()).enumerate() {
        notes.push(format!(
            "mode {} delta={d} y(T)={:.6e} energy={:.6e} var_y(T)={:.6e}",
            k + 1,
            s.end,
            s.energy,
            marginal_variance(&model, d, t)
        ));
    }
    Ok(Outcome {
        payload,
        notes,
        verdicts: Vec::new(),
    })
}

/// `Lambda / sqrt(T sum delta^{2 alpha})` samples of one configuration.
fn lambda_samples(summary: &MCSummary, i: usize) -> Vec<f64> {
    let c = &summary.configs[i];
    let scale = (2.0 * summary.campaign.model.theta0 * c.psi).sqrt();
    c.replicates
        .iter()
        .filter_map(|r| r.discrete.map(|d| d.lambda / scale))
        .collect()
}

/// CLT campaign with normality verdicts per configuration.
pub fn cmd_clt(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let camp = campaign(cfg)?;
    let summary = run_campaign(&camp)?;
    let th = &cfg.thresholds;
    let mut rows = summary_rows(&summary);
    let mut verdicts = Vec::new();
    let floor = summary.null_floor.value;
    let mut extra = RowBuilder::new(camp.estimator.to_string(), cfg.seed, cfg.replicates);
    for (i, c) in summary.configs.iter().enumerate() {
        let p = c.point;
        let at = format!("T={} N={} M={}", p.horizon, p.n_modes, p.steps);
        verdicts.push(Verdict::check(
            format!("mean [{at}]"),
            c.mean.within(0.0, th.se_mult_mean),
            format!("{:.5} +- {:.5}, bound {} SE", c.mean.value, c.mean.se, th.se_mult_mean),
        ));
        verdicts.push(Verdict::check(
            format!("variance [{at}]"),
            (c.variance.value - 1.0).abs() <= th.var_rel_tol,
            format!("{:.5}, tolerance {}", c.variance.value, th.var_rel_tol),
        ));
        verdicts.push(Verdict::check(
            format!("dW [{at}]"),
            c.dw_hat <= th.floor_mult * floor,
            format!("{:.5} vs {} x floor {:.5}", c.dw_hat, th.floor_mult, floor),
        ));
        if camp.estimator == EstimatorKind::Discrete {
            let lam = lambda_samples(&summary, i);
            if lam.len() >= 5 {
                let k = k_statistics(&lam)?;
                let exact = theory::k3_exact_lambda(&camp.model, p.horizon, p.n_modes, p.steps)?;
                extra.push_estimate(Some(&p), "lambda_k3", k.k3);
                extra.push(Some(&p), "lambda_k3_exact", exact, None);
                verdicts.push(Verdict::check(
                    format!("lambda k3 [{at}]"),
                    k.k3.within(0.0, th.k_se_mult),
                    format!("{:.5} +- {:.5} (finite-size exact {:.5})", k.k3.value, k.k3.se, exact),
                ));
            }
        }
    }
    rows.extend(extra.rows);
    Ok(Outcome {
        payload: rows_payload(&rows, cfg.format)?,
        notes: vec![format!("null dW floor {:.5} +- {:.5}", floor, summary.null_floor.se)],
        verdicts,
    })
}

/// `d_W` decay over a sweep, or the deterministic `1 - lambda/psi` decay.
pub fn cmd_rate_sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let camp = campaign(cfg)?;
    let th = &cfg.thresholds;
    let sizes: Vec<f64> = camp.points.iter().map(|p| camp.axis.value(p)).collect();
    let mut b = RowBuilder::new(camp.estimator.to_string(), cfg.seed, cfg.replicates);
    let mut verdicts = Vec::new();
    let mut notes = Vec::new();

    if let Some(slope) = cfg.synthetic_slope {
        let ys: Vec<f64> = sizes.iter().map(|s| s.powf(slope)).collect();
        for (p, y) in camp.points.iter().zip(&ys) {
            b.push(Some(p), "synthetic_value", *y, None);
        }
        let fit = rate_fit(&sizes, &ys)?;
        b.push(None, "rate_slope", fit.slope, None);
        b.push(None, "rate_intercept", fit.intercept, None);
        b.push(None, "rate_r2", fit.r2, None);
        verdicts.push(Verdict::check(
            "synthetic slope",
            (fit.slope - slope).abs() <= 1e-9 * slope.abs().max(1.0),
            format!("fitted {} vs injected {slope}", fit.slope),
        ));
        return Ok(Outcome {
            payload: rows_payload(&b.rows, cfg.format)?,
            notes,
            verdicts,
        });
    }

    if cfg.theory_only {
        let ys = camp
            .points
            .iter()
            .map(|p| theory::one_minus_variance_ratio(&camp.model, p.horizon, p.n_modes))
            .collect::<Result<Vec<_>, _>>()?;
        for (p, y) in camp.points.iter().zip(&ys) {
            b.push(Some(p), "one_minus_variance_ratio", *y, None);
        }
        let fit = rate_fit(&sizes, &ys)?;
        b.push(None, "rate_slope", fit.slope, None);
        b.push(None, "rate_intercept", fit.intercept, None);
        b.push(None, "rate_r2", fit.r2, None);
        let expected = match camp.axis {
            fracheat::montecarlo::SweepAxis::N => Some(-2.0 * camp.model.alpha_over_d()),
            fracheat::montecarlo::SweepAxis::T => Some(-1.0),
            _ => None,
        };
        match expected {
            Some(e) => verdicts.push(Verdict::check(
                "theory slope",
                (fit.slope - e).abs() <= th.theory_slope_tol,
                format!("{:.4} vs {e} +- {}", fit.slope, th.theory_slope_tol),
            )),
            None => notes.push(format!("slope {:.4}; no reference exponent for this axis", fit.slope)),
        }
        return Ok(Outcome {
            payload: rows_payload(&b.rows, cfg.format)?,
            notes,
            verdicts,
        });
    }

    let summary = run_campaign(&camp)?;
    let sweep = rate_sweep(&summary, th.floor_mult)?;
    let mut rows = summary_rows(&summary);
    rows.extend(rate_rows(&sweep, &summary));
    notes.push(format!(
        "null dW floor {:.5}; points with dW <= {:.5} excluded; the fitted slope is biased toward 0 near the floor",
        sweep.floor,
        sweep.floor * sweep.floor_mult
    ));
    match &sweep.fit {
        Some(f) => verdicts.push(Verdict::check(
            "dW slope",
            f.slope >= th.slope_lo && f.slope <= th.slope_hi,
            format!("{:.4} in [{}, {}]", f.slope, th.slope_lo, th.slope_hi),
        )),
        None => verdicts.push(Verdict::check(
            "dW slope",
            false,
            format!(
                "insufficient points: {} of {} above the floor",
                sweep.used.iter().filter(|&&u| u).count(),
                sweep.used.len()
            ),
        )),
    }
    Ok(Outcome {
        payload: rows_payload(&rows, cfg.format)?,
        notes,
        verdicts,
    })
}

/// Median `|theta_tilde - theta0|` along a joint schedule.
pub fn cmd_consistency(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut camp = campaign(cfg)?;
    camp.estimator = EstimatorKind::Discrete;
    let table = consistency_sweep(&camp)?;
    let rows = consistency_rows(&table);
    let mut verdicts = Vec::new();
    if table.condition_warning {
        verdicts.push(Verdict {
            name: "condition".into(),
            status: Status::Warn,
            detail: "dt*N^(2a/d) does not decrease along the schedule".into(),
        });
    }
    if let Some(dec) = table.strictly_decreasing() {
        let meds: Vec<String> = table.rows.iter().map(|r| format!("{:.5}", r.median_abs_error)).collect();
        if table.condition_warning {
            let plateau = table.plateau(cfg.thresholds.plateau_iqr_mult).unwrap_or(false);
            verdicts.push(Verdict {
                name: "plateau".into(),
                status: if plateau { Status::Warn } else { Status::Pass },
                detail: format!(
                    "last two medians {} within {} IQR: {plateau}",
                    if plateau { "are" } else { "are not" },
                    cfg.thresholds.plateau_iqr_mult
                ),
            });
            verdicts.push(Verdict {
                name: "decreasing".into(),
                status: Status::Warn,
                detail: format!("medians [{}], strictly decreasing: {dec}", meds.join(", ")),
            });
        } else {
            verdicts.push(Verdict::check(
                "decreasing",
                dec,
                format!("medians [{}]", meds.join(", ")),
            ));
        }
    }
    Ok(Outcome {
        payload: rows_payload(&rows, cfg.format)?,
        notes: Vec::new(),
        verdicts,
    })
}
