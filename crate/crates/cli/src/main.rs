use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracheat_cli::commands::{self, CliError, Outcome};
use fracheat_cli::config::ExperimentConfig;
use fracheat_cli::output::emit;

/// Simulation and estimator diagnostics for the fractional stochastic heat equation.
///
/// Settings are layered: defaults, then the --config file, then FRACHEAT_<KEY>
/// environment variables (e.g. FRACHEAT_THETA0, FRACHEAT_T), then flags.
/// Exit codes: 0 success, 1 config error, 2 runtime error, 3 verdict FAIL.
#[derive(Parser)]
#[command(name = "fracheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form normalizers, bounds and condition indicators.
    Theory(Common),
    /// Simulate one replicate and write the binary path dump.
    Simulate(Common),
    /// Normality campaign for the chosen estimator.
    Clt(Common),
    /// Wasserstein decay over a sweep (or the deterministic 1 - lambda/psi decay).
    RateSweep(Common),
    /// Median error of the discretized estimator along a joint schedule.
    Consistency(Common),
}

#[derive(Args, Default)]
struct Common {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    /// continuous | discrete
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    theta0: Option<String>,
    #[arg(long = "sigma-bar")]
    sigma_bar: Option<String>,
    /// exact_interval1d | power_law
    #[arg(long = "eigen-rule")]
    eigen_rule: Option<String>,
    /// Horizon(s), comma-separated.
    #[arg(long = "T")]
    t: Option<String>,
    /// Mode count(s), comma-separated.
    #[arg(long = "N")]
    n: Option<String>,
    /// Step count(s), comma-separated.
    #[arg(long = "M")]
    m: Option<String>,
    /// N | T | M | joint
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    replicate: Option<String>,
    /// Powers p for E[(S/psi)^-p], comma-separated.
    #[arg(long = "inverse-powers")]
    inverse_powers: Option<String>,
    /// Force zero innovations (simulate).
    #[arg(long = "zero-noise")]
    zero_noise: bool,
    /// rate-sweep: fit 1 - lambda/psi instead of simulating.
    #[arg(long = "theory-only")]
    theory_only: bool,
    /// rate-sweep: fit an injected power law with this slope.
    #[arg(long = "synthetic-slope", allow_hyphen_values = true)]
    synthetic_slope: Option<String>,
    #[arg(long = "se-mult-mean")]
    se_mult_mean: Option<String>,
    #[arg(long = "var-rel-tol")]
    var_rel_tol: Option<String>,
    #[arg(long = "floor-mult")]
    floor_mult: Option<String>,
    #[arg(long = "slope-lo", allow_hyphen_values = true)]
    slope_lo: Option<String>,
    #[arg(long = "slope-hi", allow_hyphen_values = true)]
    slope_hi: Option<String>,
    #[arg(long = "theory-slope-tol")]
    theory_slope_tol: Option<String>,
    #[arg(long = "k-se-mult")]
    k_se_mult: Option<String>,
    #[arg(long = "plateau-iqr-mult")]
    plateau_iqr_mult: Option<String>,
    /// error | warn | info | debug
    #[arg(long)]
    verbosity: Option<String>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let pairs: [(&'static str, &Option<String>); 26] = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
            ("reps", &self.reps),
            ("estimator", &self.estimator),
            ("alpha", &self.alpha),
            ("gamma", &self.gamma),
            ("dim", &self.dim),
            ("theta0", &self.theta0),
            ("sigma_bar", &self.sigma_bar),
            ("eigen_rule", &self.eigen_rule),
            ("T", &self.t),
            ("N", &self.n),
            ("M", &self.m),
            ("axis", &self.axis),
            ("replicate", &self.replicate),
            ("inverse_powers", &self.inverse_powers),
            ("synthetic_slope", &self.synthetic_slope),
            ("se_mult_mean", &self.se_mult_mean),
            ("var_rel_tol", &self.var_rel_tol),
            ("floor_mult", &self.floor_mult),
            ("slope_lo", &self.slope_lo),
            ("slope_hi", &self.slope_hi),
            ("theory_slope_tol", &self.theory_slope_tol),
            ("k_se_mult", &self.k_se_mult),
            ("plateau_iqr_mult", &self.plateau_iqr_mult),
        ];
        let mut out: Vec<(&'static str, String)> = pairs
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (*k, v.clone())))
            .collect();
        if self.zero_noise {
            out.push(("zero_noise", "true".into()));
        }
        if self.theory_only {
            out.push(("theory_only", "true".into()));
        }
        if let Some(v) = &self.verbosity {
            out.push(("verbosity", v.clone()));
        }
        out
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    let (common, f): (Common, fn(&ExperimentConfig) -> Result<Outcome, CliError>) = match command {
        Command::Theory(c) => (c, commands::cmd_theory),
        Command::Simulate(c) => (c, commands::cmd_simulate),
        Command::Clt(c) => (c, commands::cmd_clt),
        Command::RateSweep(c) => (c, commands::cmd_rate_sweep),
        Command::Consistency(c) => (c, commands::cmd_consistency),
    };
    let cfg = ExperimentConfig::load(common.config.as_deref(), std::env::vars(), &common.flags())?;
    env_logger::Builder::new().parse_filters(&cfg.verbosity).try_init().ok();
    let outcome = f(&cfg)?;
    emit(&outcome.payload, cfg.out.as_deref())?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            for n in &outcome.notes {
                eprintln!("{n}");
            }
            for v in &outcome.verdicts {
                eprintln!("{v}");
            }
            if outcome.failed() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
