//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass a criterion id (e.g. `C7b`) to run
//! only that criterion.

#[path = "../../core/tests/common/w1_oracle.rs"]
mod w1_oracle;

use std::process::Command;
use std::time::Instant;

use fracheat::estimators::{mle_discrete, EstimatorKind};
use fracheat::montecarlo::{
    consistency_sweep, inverse_moment_diagnostic, k_statistics, mean_estimate, rate_fit, rate_sweep, run_campaign,
    run_coupled, simulate_replicates, wasserstein1_to_std_normal, Campaign, ConsistencyTable, Estimate, GridPoint,
    ReplicateStats, SweepAxis,
};
use fracheat::ou_sim::{simulate_field, to_vform, SimOptions};
use fracheat::theory;
use fracheat::{SeedPolicy, SpectralModel, TimeGrid};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn unit_model() -> SpectralModel {
    SpectralModel::interval_1d(1.0, 1.0, 1.0).unwrap()
}

/// Worst `|residual| / max(1, |theta0 - theta_tilde|)` over every discrete replicate seen.
#[derive(Default)]
struct ResidualTracker {
    worst: f64,
    count: usize,
}

impl ResidualTracker {
    fn observe(&mut self, theta0: f64, reps: &[ReplicateStats]) {
        for r in reps {
            if let Some(d) = r.discrete {
                let scale = (theta0 - d.theta_tilde).abs().max(1.0);
                self.worst = self.worst.max(d.residual.abs() / scale);
                self.count += 1;
            }
        }
    }
}

fn c1_ou_exactness() -> Outcome {
    let start = Instant::now();
    let m = SpectralModel::interval_1d(1.0, 0.0, 1.0).unwrap();
    let reps = simulate_replicates(&m, &GridPoint::new(1.0, 1, 1), 100_000, SeedPolicy::new(SEED)).unwrap();
    let ys: Vec<f64> = reps.iter().map(|r| r.y_end).collect();
    let k = k_statistics(&ys).unwrap();
    let target = (1.0 - (-2.0f64).exp()) / 2.0;
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: k.k2.within(target, 4.0) && secs < 5.0,
        detail: format!(
            "var y(T) = {:.5} +- {:.5}, target {target:.5} (z = {:.2}); {secs:.2}s (limit 5s)",
            k.k2.value,
            k.k2.se,
            k.k2.z_score(target)
        ),
    }
}

fn c2_second_moment(res: &mut ResidualTracker) -> Outcome {
    let start = Instant::now();
    let m = unit_model();
    let (t, n, steps) = (5.0, 5, 10_000);
    let reps = simulate_replicates(&m, &GridPoint::new(t, n, steps), 10_000, SeedPolicy::new(SEED)).unwrap();
    res.observe(m.theta0, &reps);
    let psi = theory::psi(&m, t, n).unwrap();
    let e: Vec<f64> = reps.iter().map(|r| r.e_stat / psi.sqrt()).collect();
    let k = k_statistics(&e).unwrap();
    let target = theory::lambda_tn(&m, t, n).unwrap() / psi;
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: k.k2.within(target, 3.0) && secs < 120.0,
        detail: format!(
            "Var(E/sqrt(psi)) = {:.5} +- {:.5}, lambda/psi = {target:.5} (z = {:.2}); M = {steps}; {secs:.1}s (limit 120s)",
            k.k2.value,
            k.k2.se,
            k.k2.z_score(target)
        ),
    }
}

fn c3_decomposition(res: &ResidualTracker) -> Outcome {
    let m = SpectralModel::interval_1d(1.0, 1.3, 0.7).unwrap();
    let seeds = SeedPolicy::new(SEED);
    let mut worst_rel = 0.0f64;
    let mut worst_res = res.worst;
    let mut count = res.count;
    for (i, &(t, n, steps)) in [(1.0, 3, 50), (5.0, 8, 400), (10.0, 12, 2000), (0.5, 20, 30)].iter().enumerate() {
        let grid = TimeGrid::new(t, steps).unwrap();
        for rep in 0..50u64 {
            let p = simulate_field(&m, n, &grid, &seeds, 1000 * i as u64 + rep, &SimOptions::default()).unwrap();
            let ty = mle_discrete(&p).unwrap().theta_est;
            let tv = mle_discrete(&to_vform(&p)).unwrap().theta_est;
            worst_rel = worst_rel.max((ty - tv).abs() / ty.abs());
            let d = ReplicateStats::from_paths(&p).unwrap().discrete.unwrap();
            worst_res = worst_res.max(d.residual.abs() / (m.theta0 - d.theta_tilde).abs().max(1.0));
            count += 1;
        }
    }
    Outcome {
        pass: worst_res <= 1e-10 && worst_rel <= 1e-12,
        detail: format!(
            "max scaled residual {worst_res:.2e} over {count} replicates (limit 1e-10); max y/v relative gap {worst_rel:.2e} (limit 1e-12)"
        ),
    }
}

fn c4_cumulant_bounds(res: &mut ResidualTracker) -> Outcome {
    let start = Instant::now();
    let m = unit_model();
    let mut pass = true;
    let mut cells = Vec::new();
    for &t in &[1.0, 2.0, 4.0] {
        for &n in &[1usize, 2, 4] {
            let steps = (50.0 * (n * n) as f64 * t) as usize;
            let reps = simulate_replicates(&m, &GridPoint::new(t, n, steps), 100_000, SeedPolicy::new(SEED)).unwrap();
            res.observe(m.theta0, &reps);
            let psi = theory::psi(&m, t, n).unwrap();
            let e: Vec<f64> = reps.iter().map(|r| r.e_stat / psi.sqrt()).collect();
            let k = k_statistics(&e).unwrap();
            let b3 = theory::k3_bound_e(&m, t, n).unwrap();
            let b4 = theory::k4_bound_e(&m, t, n).unwrap();
            let ok3 = k.k3.value.abs() <= b3 + 4.0 * k.k3.se;
            let ok4 = k.k4.value.abs() <= b4 + 4.0 * k.k4.se;
            pass &= ok3 && ok4;
            cells.push(format!(
                "T={t} N={n} M={steps}: |k3| {:.4} <= {b3:.4} + {:.4}{}; |k4| {:.4} <= {b4:.4} + {:.4}{}",
                k.k3.value.abs(),
                4.0 * k.k3.se,
                if ok3 { "" } else { " (violated)" },
                k.k4.value.abs(),
                4.0 * k.k4.se,
                if ok4 { "" } else { " (violated)" },
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    Outcome {
        pass,
        detail: format!("{secs:.1}s (limit 900s)\n      {}", cells.join("\n      ")),
    }
}

fn c5_lambda_cumulants(res: &mut ResidualTracker) -> Outcome {
    let m = unit_model();
    let (t, n, steps) = (10.0, 10, 1000);
    let reps = simulate_replicates(&m, &GridPoint::new(t, n, steps), 10_000, SeedPolicy::new(SEED)).unwrap();
    res.observe(m.theta0, &reps);
    // 2 theta0 psi = T sum delta^{2 alpha}
    let scale = (2.0 * m.theta0 * theory::psi(&m, t, n).unwrap()).sqrt();
    let lam: Vec<f64> = reps.iter().map(|r| r.discrete.unwrap().lambda / scale).collect();
    let k = k_statistics(&lam).unwrap();
    let sq: Vec<f64> = lam.iter().map(|x| x * x).collect();
    let second = mean_estimate(&sq).unwrap();
    let bound = theory::lambda_moment_bound(&m, t, n, steps).unwrap();
    let half = 1.0 / (2.0 * m.theta0);
    let ok_k3 = k.k3.within(theory::K3_LAMBDA_LIMIT, 4.0);
    let ok_2 = (second.value - half).abs() <= bound + 3.0 * second.se;
    let exact = theory::k3_exact_lambda(&m, t, n, steps).unwrap();
    let exact2 = theory::lambda_second_moment_exact(&m, t, n, steps).unwrap();
    Outcome {
        pass: ok_k3 && ok_2,
        detail: format!(
            "k3 {:.4} +- {:.4} (z vs 0 = {:.2}; exact finite-size k3 {exact:.4}); E[L^2] {:.4} +- {:.4} vs {half} (bound {bound:.3}; exact finite-M value {exact2:.4})",
            k.k3.value,
            k.k3.se,
            k.k3.z_score(0.0),
            second.value,
            second.se
        ),
    }
}

fn c6_clt(res: &mut ResidualTracker) -> Outcome {
    let start = Instant::now();
    let c = Campaign::new(
        unit_model(),
        &[10.0],
        &[20],
        &[10_000],
        SweepAxis::N,
        EstimatorKind::Continuous,
        10_000,
        SeedPolicy::new(SEED),
    )
    .unwrap();
    let s = run_campaign(&c).unwrap();
    let cs = &s.configs[0];
    res.observe(1.0, &cs.replicates);
    let floor = s.null_floor.value;
    let ok_mean = cs.mean.within(0.0, 4.0);
    let ok_var = (cs.variance.value - 1.0).abs() <= 0.1;
    let ok_dw = cs.dw_hat <= 3.0 * floor;
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: ok_mean && ok_var && ok_dw && secs < 600.0,
        detail: format!(
            "mean {:.4} +- {:.4}; var {:.4}; dW {:.4} vs 3 x floor {:.4}; {secs:.1}s (limit 600s)",
            cs.mean.value,
            cs.mean.se,
            cs.variance.value,
            cs.dw_hat,
            3.0 * floor
        ),
    }
}

fn c7a_theory_slope() -> Outcome {
    let m = unit_model();
    let ns = [8.0, 16.0, 32.0, 64.0];
    let ys: Vec<f64> = ns
        .iter()
        .map(|&n| theory::one_minus_variance_ratio(&m, 1.0, n as usize).unwrap())
        .collect();
    let f = rate_fit(&ns, &ys).unwrap();
    Outcome {
        pass: (f.slope + 2.0).abs() <= 0.15,
        detail: format!("T=1: slope {:.4} (target -2 +- 0.15), r2 {:.6}", f.slope, f.r2),
    }
}

fn c7b_dw_slope(res: &mut ResidualTracker) -> Outcome {
    let start = Instant::now();
    let t = 0.25;
    let ns = [8usize, 16, 32, 64];
    let ms: Vec<usize> = ns.iter().map(|&n| (5.0 * (n * n) as f64 * t).ceil() as usize).collect();
    let c = Campaign::new(
        unit_model(),
        &[t],
        &ns,
        &ms,
        SweepAxis::N,
        EstimatorKind::Continuous,
        100_000,
        SeedPolicy::new(SEED),
    )
    .unwrap();
    let s = run_campaign(&c).unwrap();
    for cs in &s.configs {
        res.observe(1.0, &cs.replicates);
    }
    let sweep = rate_sweep(&s, 3.0).unwrap();
    let points: Vec<String> = sweep
        .sizes
        .iter()
        .zip(&sweep.dw)
        .zip(&sweep.used)
        .map(|((n, d), u)| format!("N={n}: {d:.4}{}", if *u { "" } else { " (excluded)" }))
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let (pass, fit) = match &sweep.fit {
        Some(f) => (
            (-1.8..=-0.8).contains(&f.slope),
            format!("slope {:.3} in [-1.8, -0.8] (theory -1.5)", f.slope),
        ),
        None => (false, "fewer than 3 points above the floor".to_string()),
    };
    Outcome {
        pass,
        detail: format!(
            "soft band; T={t}, M=5N^2T; {fit}; 3 x floor {:.5}; {}; {secs:.0}s",
            sweep.floor * sweep.floor_mult,
            points.join(", ")
        ),
    }
}

fn c8_consistency(res: &mut ResidualTracker) -> Outcome {
    let run = |mult: f64| {
        let scales = [1.0f64, 2.0, 3.0];
        let ts: Vec<f64> = scales.iter().map(|s| 5.0 * s).collect();
        let ns: Vec<usize> = scales.iter().map(|s| (4.0 * s) as usize).collect();
        let ms: Vec<usize> = scales.iter().map(|s| (mult * s.powi(3)).ceil() as usize).collect();
        let c = Campaign::new(
            unit_model(),
            &ts,
            &ns,
            &ms,
            SweepAxis::Joint,
            EstimatorKind::Discrete,
            1000,
            SeedPolicy::new(SEED),
        )
        .unwrap();
        consistency_sweep(&c).unwrap()
    };
    let valid = run(40.0);
    let violating = run(10.0);
    for t in [&valid, &violating] {
        for cs in &t.summary.configs {
            res.observe(1.0, &cs.replicates);
        }
    }
    let show = |t: &ConsistencyTable| {
        t.rows
            .iter()
            .map(|r| {
                format!(
                    "{:.4} (IQR {:.4}, dt N^2 {:.2})",
                    r.median_abs_error, r.iqr, r.consistency_indicator
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let dec = valid.strictly_decreasing().unwrap();
    let plateau = violating.plateau(2.0).unwrap();
    Outcome {
        pass: dec && plateau,
        detail: format!(
            "M=40s^3 medians [{}] strictly decreasing: {dec}\n      M=10s^3 medians [{}] plateau: {plateau}",
            show(&valid),
            show(&violating)
        ),
    }
}

fn c9_inverse_moments(res: &mut ResidualTracker) -> Outcome {
    let start = Instant::now();
    let m = unit_model();
    let ts = [5.0, 10.0, 20.0];
    let ms = [1_000usize, 10_000];
    let powers = [1.0, 2.0, 4.0];
    let fine = GridPoint::new(20.0, 10, 40_000);
    let views: Vec<GridPoint> = ms
        .iter()
        .flat_map(|&mm| ts.iter().map(move |&t| GridPoint::new(t, 10, mm)))
        .collect();
    let out = run_coupled(&m, &fine, &views, 1000, SeedPolicy::new(SEED)).unwrap();
    for reps in &out {
        res.observe(1.0, reps);
    }
    // table[p][m][t]
    let mut table: Vec<Vec<Vec<Estimate>>> = Vec::new();
    for &p in &powers {
        let mut by_m = Vec::new();
        for mi in 0..ms.len() {
            let mut by_t = Vec::new();
            for (ti, &t) in ts.iter().enumerate() {
                let psi = theory::psi(&m, t, 10).unwrap();
                let ratios: Vec<f64> = out[mi * ts.len() + ti]
                    .iter()
                    .map(|r| r.discrete.unwrap().s / psi)
                    .collect();
                by_t.push(inverse_moment_diagnostic(&ratios, p).unwrap());
            }
            by_m.push(by_t);
        }
        table.push(by_m);
    }
    let band = |a: &Estimate, b: &Estimate| 2.0 * (a.se.powi(2) + b.se.powi(2)).sqrt();
    let mut pass = true;
    let mut lines = Vec::new();
    for (pi, &p) in powers.iter().enumerate() {
        for (mi, &mm) in ms.iter().enumerate() {
            let row = &table[pi][mi];
            pass &= row.iter().all(|e| e.value.is_finite() && e.se.is_finite());
            for k in 0..row.len() - 1 {
                pass &= row[k + 1].value <= row[k].value + band(&row[k], &row[k + 1]);
            }
            lines.push(format!(
                "p={p} M={mm}: {}",
                row.iter()
                    .zip(&ts)
                    .map(|(e, t)| format!("T={t} {:.4} +- {:.4}", e.value, e.se))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        for ti in 0..ts.len() {
            let (a, b) = (&table[pi][0][ti], &table[pi][1][ti]);
            pass &= (a.value - b.value).abs() <= band(a, b);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass,
        detail: format!("{secs:.1}s\n      {}", lines.join("\n      ")),
    }
}

fn c10_wasserstein() -> Outcome {
    let single = wasserstein1_to_std_normal(&[0.0]).unwrap();
    let target = (2.0 / std::f64::consts::PI).sqrt();
    let mut rng = SeedPolicy::new(SEED).stream(0, 0);
    let mut worst = 0.0f64;
    for set in 0..100 {
        let n = 1 + (set * 37) % 500;
        let shift: f64 = rng.gen_range(-3.0..3.0);
        let scale: f64 = rng.gen_range(0.1..4.0);
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                if set % 5 == 0 {
                    // heavy ties
                    (rng.gen_range(-4.0f64..4.0) * 4.0).round() / 4.0 + shift * (i % 2) as f64
                } else {
                    shift + scale * rng.sample::<f64, _>(StandardNormal)
                }
            })
            .collect();
        let exact = wasserstein1_to_std_normal(&xs).unwrap();
        worst = worst.max((exact - w1_oracle::w1_by_quadrature(&xs)).abs());
    }
    Outcome {
        pass: (single - target).abs() <= 1e-8 && worst <= 1e-8,
        detail: format!(
            "single sample {single:.12} vs sqrt(2/pi) {target:.12}; max gap to quadrature over 100 sets {worst:.2e}"
        ),
    }
}

fn c11_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fracheat");
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str]); 6] = [
        ("theory", &["--T", "1,2", "--N", "4,8", "--M", "100"]),
        ("simulate", &["--T", "1", "--N", "3", "--M", "50"]),
        ("clt", &["--T", "1", "--N", "4", "--M", "200", "--reps", "300", "--estimator", "discrete"]),
        ("clt", &["--T", "2", "--N", "2,4", "--M", "100", "--reps", "200", "--format", "json"]),
        ("rate-sweep", &["--T", "0.5", "--N", "2,4,8", "--M", "100", "--reps", "200"]),
        ("consistency", &["--T", "1,2", "--N", "2,4", "--M", "40,320", "--reps", "100", "--axis", "joint", "--estimator", "discrete"]),
    ];
    let mut mismatches = Vec::new();
    for (i, (cmd, args)) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (j, threads) in ["1", "4", "4"].iter().enumerate() {
            let out = dir.path().join(format!("{i}-{j}"));
            let run = Command::new(bin)
                .arg(cmd)
                .args(*args)
                .args(["--theta0", "1", "--seed", "99", "--out"])
                .arg(&out)
                .env("RAYON_NUM_THREADS", threads)
                .output()
                .unwrap();
            if !matches!(run.status.code(), Some(0) | Some(3)) {
                return Outcome {
                    pass: false,
                    detail: format!("{cmd} exited with {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr)),
                };
            }
            outputs.push(std::fs::read(&out).unwrap());
        }
        if !outputs.windows(2).all(|w| w[0] == w[1]) {
            mismatches.push(format!("{cmd} #{i}"));
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "{} command configurations, each run with 1, 4 and 4 worker threads; mismatches: {}",
            runs.len(),
            if mismatches.is_empty() { "none".to_string() } else { mismatches.join(", ") }
        ),
    }
}

fn main() {
    let only: Option<String> = std::env::args().skip(1).find(|a| a.starts_with('C'));
    let mut res = ResidualTracker::default();
    let mut results: Vec<(&str, bool)> = Vec::new();
    let mut run = |id: &'static str, name: &str, f: &mut dyn FnMut() -> Outcome| {
        if only.as_deref().is_some_and(|o| o != id) {
            return;
        }
        let o = f();
        println!("{id} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, o.pass));
    };
    run("C10", "W1 estimator correctness", &mut c10_wasserstein);
    run("C1", "OU exactness", &mut c1_ou_exactness);
    run("C7a", "rate exponent, deterministic", &mut c7a_theory_slope);
    run("C2", "second-moment identity", &mut || c2_second_moment(&mut res));
    run("C5", "Lambda cumulants", &mut || c5_lambda_cumulants(&mut res));
    run("C8", "discrete consistency", &mut || c8_consistency(&mut res));
    run("C9", "inverse moments", &mut || c9_inverse_moments(&mut res));
    run("C6", "CLT normality", &mut || c6_clt(&mut res));
    run("C4", "cumulant bounds", &mut || c4_cumulant_bounds(&mut res));
    run("C7b", "rate exponent, stochastic (soft)", &mut || c7b_dw_slope(&mut res));
    run("C3", "exact decomposition", &mut || c3_decomposition(&res));
    run("C11", "determinism", &mut c11_determinism);
    let failed: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
