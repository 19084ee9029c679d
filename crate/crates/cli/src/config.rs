//! Experiment configuration: a flat `key=value` file, overridden by
//! `FRACHEAT_*` environment variables, overridden by command-line flags.

use std::path::{Path, PathBuf};

use fracheat::estimators::EstimatorKind;
use fracheat::montecarlo::SweepAxis;
use fracheat::spectrum::{EigenRule, SpectralModel};

/// Prefix of environment overrides: `FRACHEAT_THETA0`, `FRACHEAT_T`, ...
pub const ENV_PREFIX: &str = "FRACHEAT_";

#[derive(Debug, thiserror::Error)]
#[error("{origin}: field `{field}`: {message}")]
pub struct ConfigError {
    /// `file:line`, `env VAR` or `flag --name`.
    pub origin: String,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(origin: impl Into<String>, field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            origin: origin.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (csv|json)")),
        }
    }
}

/// Verdict tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub se_mult_mean: f64,
    pub var_rel_tol: f64,
    pub floor_mult: f64,
    pub slope_lo: f64,
    pub slope_hi: f64,
    pub theory_slope_tol: f64,
    pub k_se_mult: f64,
    pub plateau_iqr_mult: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            se_mult_mean: 4.0,
            var_rel_tol: 0.1,
            floor_mult: 3.0,
            slope_lo: -1.8,
            slope_hi: -0.8,
            theory_slope_tol: 0.15,
            k_se_mult: 4.0,
            plateau_iqr_mult: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub dim: u32,
    /// Required; there is no default drift.
    pub theta0: Option<f64>,
    pub sigma_bar: f64,
    pub eigen_rule: EigenRule,
    pub horizons: Vec<f64>,
    pub modes: Vec<usize>,
    pub steps: Vec<usize>,
    pub axis: SweepAxis,
    pub estimator: EstimatorKind,
    pub replicates: usize,
    pub seed: u64,
    pub replicate: u64,
    pub inverse_powers: Vec<f64>,
    pub zero_noise: bool,
    pub theory_only: bool,
    pub synthetic_slope: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub verbosity: String,
    pub thresholds: Thresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha: 1.0,
            gamma: 1.0,
            dim: 1,
            theta0: None,
            sigma_bar: 1.0,
            eigen_rule: EigenRule::ExactInterval1D,
            horizons: vec![1.0],
            modes: vec![4],
            steps: vec![1000],
            axis: SweepAxis::N,
            estimator: EstimatorKind::Continuous,
            replicates: 1000,
            seed: 1,
            replicate: 0,
            inverse_powers: vec![1.0, 2.0, 4.0],
            zero_noise: false,
            theory_only: false,
            synthetic_slope: None,
            out: None,
            format: OutputFormat::Csv,
            verbosity: "warn".into(),
            thresholds: Thresholds::default(),
        }
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "alpha",
    "gamma",
    "dim",
    "theta0",
    "sigma_bar",
    "eigen_rule",
    "T",
    "N",
    "M",
    "axis",
    "estimator",
    "reps",
    "seed",
    "replicate",
    "inverse_powers",
    "zero_noise",
    "theory_only",
    "synthetic_slope",
    "out",
    "format",
    "verbosity",
    "se_mult_mean",
    "var_rel_tol",
    "floor_mult",
    "slope_lo",
    "slope_hi",
    "theory_slope_tol",
    "k_se_mult",
    "plateau_iqr_mult",
];

fn canonical_key(raw: &str) -> Option<&'static str> {
    let k = raw.trim().replace('-', "_");
    KEYS.iter()
        .copied()
        .find(|c| *c == k || (c.len() > 1 && c.eq_ignore_ascii_case(&k)))
        .or(match k.as_str() {
            "t" => Some("T"),
            "n" => Some("N"),
            "m" => Some("M"),
            "replicates" | "R" => Some("reps"),
            _ => None,
        })
}

fn parse<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| format!("cannot parse `{}`: {e}", v.trim()))
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

impl ExperimentConfig {
    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let th = &mut self.thresholds;
        match key {
            "alpha" => self.alpha = parse(value)?,
            "gamma" => self.gamma = parse(value)?,
            "dim" => self.dim = parse(value)?,
            "theta0" => self.theta0 = Some(parse(value)?),
            "sigma_bar" => self.sigma_bar = parse(value)?,
            "eigen_rule" => self.eigen_rule = parse(value)?,
            "T" => self.horizons = parse_list(value)?,
            "N" => self.modes = parse_list(value)?,
            "M" => self.steps = parse_list(value)?,
            "axis" => self.axis = parse(value)?,
            "estimator" => self.estimator = parse(value)?,
            "reps" => self.replicates = parse(value)?,
            "seed" => self.seed = parse(value)?,
            "replicate" => self.replicate = parse(value)?,
            "inverse_powers" => self.inverse_powers = parse_list(value)?,
            "zero_noise" => self.zero_noise = parse_bool(value)?,
            "theory_only" => self.theory_only = parse_bool(value)?,
            "synthetic_slope" => {
                self.synthetic_slope = if value.trim().is_empty() { None } else { Some(parse(value)?) }
            }
            "out" => self.out = if value.trim().is_empty() { None } else { Some(PathBuf::from(value.trim())) },
            "format" => self.format = parse(value)?,
            "verbosity" => self.verbosity = value.trim().to_string(),
            "se_mult_mean" => th.se_mult_mean = parse(value)?,
            "var_rel_tol" => th.var_rel_tol = parse(value)?,
            "floor_mult" => th.floor_mult = parse(value)?,
            "slope_lo" => th.slope_lo = parse(value)?,
            "slope_hi" => th.slope_hi = parse(value)?,
            "theory_slope_tol" => th.theory_slope_tol = parse(value)?,
            "k_se_mult" => th.k_se_mult = parse(value)?,
            "plateau_iqr_mult" => th.plateau_iqr_mult = parse(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Apply a config file: `key=value` lines, `#` comments, blank lines.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let at = format!("{origin}:{}", i + 1);
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&at, line, "expected `key=value`"))?;
            let key = canonical_key(k).ok_or_else(|| ConfigError::new(&at, k.trim(), "unknown key"))?;
            self.set(key, v).map_err(|m| ConfigError::new(&at, key, m))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path.display().to_string(), "config", e.to_string()))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Apply `FRACHEAT_<KEY>` variables from `vars`.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<(), ConfigError> {
        let mut found: Vec<(String, &'static str, String)> = vars
            .into_iter()
            .filter_map(|(name, v)| {
                let rest = name.strip_prefix(ENV_PREFIX)?;
                Some((name.clone(), canonical_key(rest), v))
            })
            .map(|(name, key, v)| match key {
                Some(k) => Ok((name, k, v)),
                None => Err(ConfigError::new(format!("env {name}"), name.clone(), "unknown key")),
            })
            .collect::<Result<_, _>>()?;
        found.sort_by_key(|(_, k, _)| KEYS.iter().position(|c| c == k));
        for (name, key, v) in found {
            self.set(key, &v).map_err(|m| ConfigError::new(format!("env {name}"), key, m))?;
        }
        Ok(())
    }

    /// Apply flag overrides given as `(key, value)`.
    pub fn apply_flags(&mut self, flags: &[(&'static str, String)]) -> Result<(), ConfigError> {
        for (key, v) in flags {
            self.set(key, v)
                .map_err(|m| ConfigError::new(format!("flag --{}", key.replace('_', "-")), *key, m))?;
        }
        Ok(())
    }

    /// Layered load: defaults, then `file`, then environment, then flags.
    pub fn load(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        flags: &[(&'static str, String)],
    ) -> Result<Self, ConfigError> {
        let mut c = ExperimentConfig::default();
        if let Some(f) = file {
            c.apply_file(f)?;
        }
        c.apply_env(env)?;
        c.apply_flags(flags)?;
        Ok(c)
    }

    /// The validated spectral model.
    pub fn model(&self) -> Result<SpectralModel, ConfigError> {
        let theta0 = self
            .theta0
            .ok_or_else(|| ConfigError::new("config", "theta0", "missing required field `theta0`"))?;
        SpectralModel::new(self.alpha, self.gamma, self.dim, theta0, self.sigma_bar, self.eigen_rule)
            .map_err(|e| ConfigError::new("config", "model", e.to_string()))
    }

    /// The single `(T, N, M)` triple, for commands that take one configuration.
    pub fn single_point(&self) -> Result<(f64, usize, usize), ConfigError> {
        for (name, len) in [("T", self.horizons.len()), ("N", self.modes.len()), ("M", self.steps.len())] {
            if len != 1 {
                return Err(ConfigError::new("config", name, "this command takes a single value"));
            }
        }
        Ok((self.horizons[0], self.modes[0], self.steps[0]))
    }

    /// `key=value` text that reproduces this configuration.
    pub fn to_text(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        let th = &self.thresholds;
        let mut lines = vec![
            format!("alpha={}", self.alpha),
            format!("gamma={}", self.gamma),
            format!("dim={}", self.dim),
        ];
        if let Some(t) = self.theta0 {
            lines.push(format!("theta0={t}"));
        }
        lines.extend([
            format!("sigma_bar={}", self.sigma_bar),
            format!("eigen_rule={}", self.eigen_rule),
            format!("T={}", join(self.horizons.iter().map(|x| x.to_string()).collect())),
            format!("N={}", join(self.modes.iter().map(|x| x.to_string()).collect())),
            format!("M={}", join(self.steps.iter().map(|x| x.to_string()).collect())),
            format!("axis={}", self.axis),
            format!("estimator={}", self.estimator),
            format!("reps={}", self.replicates),
            format!("seed={}", self.seed),
            format!("replicate={}", self.replicate),
            format!("inverse_powers={}", join(self.inverse_powers.iter().map(|x| x.to_string()).collect())),
            format!("zero_noise={}", self.zero_noise),
            format!("theory_only={}", self.theory_only),
        ]);
        if let Some(s) = self.synthetic_slope {
            lines.push(format!("synthetic_slope={s}"));
        }
        if let Some(o) = &self.out {
            lines.push(format!("out={}", o.display()));
        }
        lines.extend([
            format!("format={}", if self.format == OutputFormat::Csv { "csv" } else { "json" }),
            format!("verbosity={}", self.verbosity),
            format!("se_mult_mean={}", th.se_mult_mean),
            format!("var_rel_tol={}", th.var_rel_tol),
            format!("floor_mult={}", th.floor_mult),
            format!("slope_lo={}", th.slope_lo),
            format!("slope_hi={}", th.slope_hi),
            format!("theory_slope_tol={}", th.theory_slope_tol),
            format!("k_se_mult={}", th.k_se_mult),
            format!("plateau_iqr_mult={}", th.plateau_iqr_mult),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}
