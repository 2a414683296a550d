//! Acceptance criteria. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use twopt_core::exact::{brute_force, held_karp};
use twopt_core::lower_bound::{
    build_layered, build_long_tour, certify_two_optimality, check_containers, ratio_lower_bound,
};
use twopt_core::stochastic::{
    chi_inverse_moment, chi_inverse_moment_quadrature, chi_pdf, derive_seed, perturb, uniform_origins,
};
use twopt_core::tour::{max_violation, min_improvement, run_two_opt, CostTable, RunConfig};
use twopt_core::{InitRule, Metric, PivotRule};
use twopt_harness::config::{Model, OptMode, OriginSource, SweepConfig};
use twopt_harness::fit::{columns, group_means, linear_fit, scaling_fit};
use twopt_harness::ratio::{increases, is_non_increasing, run_ratio, RatioConfig};
use twopt_harness::verify::{verify_suite, Suite};

const BASE_SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Exact-oracle agreement.
fn c1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for metric in Metric::ALL {
        for k in 0..100u64 {
            let n = 5 + (k % 6) as usize;
            let seed = derive_seed(BASE_SEED, &[1, k]);
            let sigma = [0.0, 0.01, 0.1, 0.5][(k % 4) as usize];
            let inst = perturb(&uniform_origins(n, 2, seed), sigma, seed).unwrap();
            let hk = held_karp(&inst, metric).unwrap().optimal_length;
            let bf = brute_force(&inst, metric).unwrap().optimal_length;
            worst = worst.max(rel_diff(hk, bf));
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && count == 300 && within(elapsed, Duration::from_secs(60)),
        format!("{count} instances, worst relative gap {worst:.2e}, {elapsed:.2?}"),
    )
}

/// Local-optimality certification.
fn c2() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    let mut failures = 0;
    for k in 0..200u64 {
        let metric = Metric::ALL[(k % 3) as usize];
        let pivot = [PivotRule::First, PivotRule::Best, PivotRule::Random][((k / 3) % 3) as usize];
        let n = 10 + (k as usize * 37) % 191;
        let seed = derive_seed(BASE_SEED, &[2, k]);
        let inst = perturb(&uniform_origins(n, 2, seed), 0.05, seed).unwrap();
        let cfg = RunConfig {
            metric,
            init: InitRule::Random,
            pivot,
            eps: 1e-12,
            seed,
            max_iter: u64::MAX,
            record_changes: false,
        };
        let rec = run_two_opt(&inst, &cfg).unwrap();
        let costs = CostTable::new(&inst, metric);
        if !rec.certified || max_violation(&rec.final_order, &costs, 1e-12).is_some() {
            failures += 1;
        }
        runs += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && within(elapsed, Duration::from_secs(120)),
        format!("{runs} runs (n ≤ 200, 3 metrics × 3 pivots), {failures} with an improving pair, {elapsed:.2?}"),
    )
}

/// Iteration count against initial length over the smallest improvement.
fn c3() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for k in 0..100u64 {
        let n = 5 + (k % 8) as usize;
        let metric = Metric::ALL[(k % 3) as usize];
        let pivot = [PivotRule::First, PivotRule::Best, PivotRule::Random][(k % 3) as usize];
        let seed = derive_seed(BASE_SEED, &[3, k]);
        let inst = perturb(&uniform_origins(n, 2, seed), 0.1, seed).unwrap();
        let cfg = RunConfig {
            metric,
            init: InitRule::Random,
            pivot,
            eps: 1e-12,
            seed,
            max_iter: u64::MAX,
            record_changes: false,
        };
        let rec = run_two_opt(&inst, &cfg).unwrap();
        if let Some(dmin) = min_improvement(&inst, metric, 1e-12).unwrap() {
            checked += 1;
            let bound = rec.initial_length / dmin;
            if rec.iterations as f64 > bound {
                violations += 1;
            }
            tightest = tightest.max(rec.iterations as f64 / bound);
        }
    }
    outcome(
        violations == 0 && checked > 0,
        format!("{checked}/100 instances with Δ_min, {violations} violations, max iterations/bound {tightest:.3e}"),
    )
}

/// Chi closed forms.
fn c4() -> Outcome {
    let mut worst_moment: f64 = 0.0;
    for d in 2..=12u32 {
        for c in 1..=2u32 {
            if d <= c {
                continue;
            }
            for sigma in [0.1, 1.0, 3.0] {
                let closed = chi_inverse_moment(d, c, sigma).unwrap();
                let quad = chi_inverse_moment_quadrature(d, c, sigma).unwrap();
                worst_moment = worst_moment.max(rel_diff(quad, closed));
            }
        }
    }
    let mut worst_pdf: f64 = 0.0;
    let two_pi = 2.0 * std::f64::consts::PI;
    for sigma in [0.2, 1.0, 2.5] {
        for i in 1..=200 {
            let x = i as f64 * sigma / 25.0;
            let z = (-(x * x) / (2.0 * sigma * sigma)).exp();
            let rayleigh = x / (sigma * sigma) * z;
            let maxwell = (2.0 / std::f64::consts::PI).sqrt() * x * x / sigma.powi(3) * z;
            let half_normal = 2.0 / (sigma * two_pi.sqrt()) * z;
            for (d, expected) in [(1, half_normal), (2, rayleigh), (3, maxwell)] {
                let got = chi_pdf(x, d, sigma).unwrap();
                let err = if expected > 1e-300 {
                    rel_diff(got, expected)
                } else {
                    got.abs()
                };
                worst_pdf = worst_pdf.max(err);
            }
        }
    }
    outcome(
        worst_moment <= 1e-6 && worst_pdf <= 1e-10,
        format!("moment vs quadrature {worst_moment:.2e} (≤ 1e-6), pdf specializations {worst_pdf:.2e} (≤ 1e-10)"),
    )
}

/// Monte Carlo probability suites.
fn c5() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, suite) in [Suite::Ball, Suite::Line, Suite::Dominance, Suite::Tail]
        .into_iter()
        .enumerate()
    {
        let report = verify_suite(suite, 1_000_000, derive_seed(BASE_SEED, &[5, k as u64])).unwrap();
        let passed = report.checks.iter().filter(|c| c.passed).count();
        ok &= report.passed() && report.checks.len() == 12;
        parts.push(format!("{suite} {passed}/{}", report.checks.len()));
        for c in report.checks.iter().filter(|c| !c.passed) {
            parts.push(c.to_string());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, Duration::from_secs(300)),
        format!("10^6 samples, {}, {elapsed:.2?}", parts.join(", ")),
    )
}

/// Linked-pair bound on recorded runs.
fn c6() -> Outcome {
    let report = verify_suite(Suite::Linked, 0, derive_seed(BASE_SEED, &[6])).unwrap();
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let min_margin = report
        .checks
        .iter()
        .map(|c| c.statistic - c.bound)
        .fold(f64::INFINITY, f64::min);
    outcome(
        report.passed() && report.checks.len() == 50,
        format!(
            "{passed}/{} runs meet ⌈t/7 − 3n/28⌉, smallest margin {min_margin}",
            report.checks.len()
        ),
    )
}

/// Tour-length scaling in n and in σ.
fn c7() -> Outcome {
    let start = Instant::now();
    let by_n = SweepConfig {
        n: vec![100, 200, 400, 800, 1600],
        model: Model::Gaussian(vec![0.0]),
        origins: vec![OriginSource::Uniform],
        seeds: 30,
        base_seed: derive_seed(BASE_SEED, &[7, 0]),
        opt: OptMode::None,
        ..SweepConfig::default()
    };
    let rows = twopt_harness::run_sweep(&by_n).unwrap();
    let fit_n = scaling_fit(&rows, "n", "final_length").unwrap();

    let by_sigma = SweepConfig {
        n: vec![200],
        model: Model::Gaussian(vec![0.05, 0.1, 0.2, 0.4, 0.8]),
        origins: vec![OriginSource::SinglePoint],
        seeds: 30,
        base_seed: derive_seed(BASE_SEED, &[7, 1]),
        opt: OptMode::Bound,
        ..SweepConfig::default()
    };
    let rows = twopt_harness::run_sweep(&by_sigma).unwrap();
    let (xs, ys) = columns(&rows, "sigma", "opt_length").unwrap();
    let means = group_means(&xs, &ys);
    let mx: Vec<f64> = means.iter().map(|g| g.x).collect();
    let my: Vec<f64> = means.iter().map(|g| g.mean).collect();
    let fit_sigma = linear_fit(&mx, &my).unwrap();
    let elapsed = start.elapsed();
    outcome(
        (0.45..=0.55).contains(&fit_n.slope)
            && fit_sigma.r2 >= 0.95
            && fit_sigma.slope > 0.0
            && within(elapsed, Duration::from_secs(600)),
        format!(
            "log-log slope in n {:.4} (R² {:.4}); 2·MST vs σ slope {:.3}, intercept {:.3e}, R² {:.6}; {elapsed:.2?}",
            fit_n.slope, fit_n.r2, fit_sigma.slope, fit_sigma.intercept, fit_sigma.r2
        ),
    )
}

fn hard_origins() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("hard12.json")
}

/// Approximation-ratio trend in σ.
fn c8() -> Outcome {
    let cfg = RatioConfig {
        n: 12,
        sigmas: vec![0.01, 0.03, 0.1, 0.3, 1.0],
        restarts: 50,
        seeds: 50,
        base_seed: derive_seed(BASE_SEED, &[8]),
        origins: OriginSource::File(hard_origins()),
        metric: Metric::Euclidean,
        pivot: PivotRule::First,
        paired: true,
        threads: None,
    };
    let (_, summary) = run_ratio(&cfg).unwrap();
    let means: Vec<String> = summary
        .by_sigma
        .iter()
        .map(|g| format!("σ={}: {:.4}", g.x, g.mean))
        .collect();
    let ups = increases(&summary.by_sigma);
    let curve = summary
        .log_fit
        .map(|f| format!("{:.4} + {:.4}·ln(1/σ) (R² {:.3})", f.intercept, f.slope, f.r2))
        .unwrap_or_default();
    outcome(
        summary.min_ratio >= 1.0 - 1e-9 && is_non_increasing(&summary.by_sigma, 1, 0.02),
        format!(
            "min ratio {:.12}, means [{}], rises {ups:?}, fit {curve}",
            summary.min_ratio,
            means.join(", ")
        ),
    )
}

/// Layered lower-bound construction.
fn c9() -> Outcome {
    let start = Instant::now();
    let li1 = build_layered(3, 1e-4, Some(1)).unwrap();
    let mut contained = 0;
    let mut certified = 0;
    for k in 0..50u64 {
        let x = li1.perturb(derive_seed(BASE_SEED, &[9, k])).unwrap();
        if !check_containers(&li1, &x).unwrap().passed {
            continue;
        }
        contained += 1;
        let tour = build_long_tour(&li1, &x, 1e-15).unwrap();
        if certify_two_optimality(&x, &tour, Metric::Euclidean, 1e-12)
            .unwrap()
            .is_none()
        {
            certified += 1;
        }
    }

    let li3 = build_layered(3, 1e-4, Some(3)).unwrap();
    let mut exact_ok = true;
    let mut ratios = Vec::new();
    for li in [&li1, &li3] {
        let x = li.instance.clone();
        let tour = build_long_tour(li, &x, 1e-15).unwrap();
        exact_ok &= certify_two_optimality(&x, &tour, Metric::Euclidean, 1e-15)
            .unwrap()
            .is_none();
        ratios.push(ratio_lower_bound(li, &x, &tour).unwrap());
    }
    let elapsed = start.elapsed();
    outcome(
        contained >= 45
            && certified == contained
            && exact_ok
            && ratios[1] > ratios[0]
            && within(elapsed, Duration::from_secs(300)),
        format!(
            "containers {contained}/50, certified {certified}/{contained} at 1e-12, unperturbed t=1,3 2-optimal at 1e-15: {exact_ok}, ratio bound {:.4} (n={}) → {:.4} (n={}), {elapsed:.2?}",
            ratios[0],
            li1.n(),
            ratios[1],
            li3.n()
        ),
    )
}

/// Determinism of `sweep`.
fn c10() -> Outcome {
    let dir = std::env::temp_dir().join(format!("twopt-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("det.cfg");
    fs::write(
        &cfg,
        "n = 8..12, 40\nsigma = 0.01, 0.1\nmetric = l1, l2\npivot = first, random\nseeds = 3\nseed = 5\nrestarts = 3\nlinked = true\ndelta_min = false\n",
    )
    .unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_twopt"))
            .args([
                "sweep",
                "--config",
                cfg.to_str().unwrap(),
                "-o",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ])
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "3");
    let rows = a.iter().filter(|&&b| b == b'\n').count() - 1;
    let _ = fs::remove_dir_all(&dir);
    outcome(
        a == b && a == c && rows == 6 * 2 * 2 * 2 * 3,
        format!(
            "{rows} rows, {} bytes, identical across two runs and across widths 1 and 3",
            a.len()
        ),
    )
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [Criterion; 10] = [
        ("1 exact-oracle agreement", c1),
        ("2 local-optimality certification", c2),
        ("3 iteration-count bound", c3),
        ("4 chi closed forms", c4),
        ("5 Monte Carlo probability suites", c5),
        ("6 linked-pair bound", c6),
        ("7 tour-length scaling", c7),
        ("8 approximation-ratio trend", c8),
        ("9 lower-bound construction", c9),
        ("10 sweep determinism", c10),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
