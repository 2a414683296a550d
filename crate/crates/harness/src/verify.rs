//! Verification suites for the Gaussian concentration bounds, the chi
//! closed forms and the linked-pair count.
//!
//! Every Monte Carlo sub-check is one-sided: the empirical statistic must
//! not exceed its bound by more than three standard errors (evaluated at
//! the bound). Sub-check `k` of a suite samples with seed
//! `derive_seed(seed, [k])`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use twopt_core::linked::{disjoint_pairs_with_fallback, linked_pair_lower_bound};
use twopt_core::stochastic::{
    chi_inverse_moment, chi_inverse_moment_quadrature, chi_pdf, chi_square_tail, derive_seed, integrate, mc_ball_mass,
    mc_dominance, mc_inverse_norm_power, mc_line_closeness, mc_tail_exceedance, uniform_origins, Frequency,
};
use twopt_core::tour::{run_two_opt, RunConfig};
use twopt_core::{Instance, Point};

use crate::error::{validation, HarnessError, Result};
use crate::sweep::EXHAUSTIVE_MATCHING_LIMIT;

/// Standard errors of slack for Monte Carlo checks.
pub const SE_SLACK: f64 = 3.0;
/// Quantiles `q/20` at which the dominance CDFs are compared.
pub const DOMINANCE_QUANTILES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Ball,
    Line,
    Dominance,
    Chi,
    Integral,
    Tail,
    Linked,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Ball,
        Suite::Line,
        Suite::Dominance,
        Suite::Chi,
        Suite::Integral,
        Suite::Tail,
        Suite::Linked,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ball => "ball",
            Self::Line => "line",
            Self::Dominance => "dominance",
            Self::Chi => "chi",
            Self::Integral => "integral",
            Self::Tail => "tail",
            Self::Linked => "linked",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| validation(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub statistic: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

impl SubCheck {
    fn upper(name: String, statistic: f64, bound: f64, slack: f64) -> Self {
        Self {
            passed: statistic <= bound + slack,
            name,
            statistic,
            bound,
            slack,
        }
    }

    fn frequency(name: String, f: Frequency, bound: f64) -> Self {
        let slack = SE_SLACK * f.standard_error_at(bound);
        Self {
            passed: f.within(bound, SE_SLACK),
            name,
            statistic: f.value(),
            bound,
            slack,
        }
    }
}

impl fmt::Display for SubCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: statistic {:.6e}, bound {:.6e}, slack {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.bound,
            self.slack
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub samples: u64,
    pub seed: u64,
    pub checks: Vec<SubCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {c}", self.suite)?;
        }
        write!(
            f,
            "suite {}: {} ({} checks, {} samples, seed {})",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.samples,
            self.seed
        )
    }
}

fn axis(d: usize, x: f64) -> Point {
    let mut v = vec![0.0; d];
    v[0] = x;
    Point::from(v)
}

pub fn verify_suite(suite: Suite, samples: u64, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Ball => ball(samples, seed)?,
        Suite::Line => line(samples, seed)?,
        Suite::Dominance => dominance(samples, seed)?,
        Suite::Chi => chi(samples, seed)?,
        Suite::Integral => integral(samples, seed)?,
        Suite::Tail => tail(samples, seed)?,
        Suite::Linked => linked(seed)?,
    };
    Ok(SuiteReport {
        suite,
        samples,
        seed,
        checks,
    })
}

/// `P(a ∈ B(c, ε)) ≤ (ε/σ)^d` for `a ~ N(0, σ²I_d)`.
fn ball(samples: u64, seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    let cases = [(0.2, 0.0, 1.0), (0.5, 0.0, 1.0), (0.9, 0.0, 0.1), (0.5, 1.0, 0.1)];
    for d in 1..=3 {
        for &(eps_ratio, offset_ratio, sigma) in &cases {
            let k = out.len() as u64;
            let eps = eps_ratio * sigma;
            let center = axis(d, offset_ratio * sigma);
            let f = mc_ball_mass(d, sigma, &center, eps, samples, derive_seed(seed, &[k]))?;
            let bound = (eps / sigma).powi(d as i32);
            out.push(SubCheck::frequency(
                format!("d={d} sigma={sigma} eps={eps} offset={}", offset_ratio * sigma),
                f,
                bound,
            ));
        }
    }
    Ok(out)
}

/// `P(c is ε-close to L(a, b)) ≤ (ε/σ)^{d−1}` for `c ~ N(0, σ²I_d)`.
fn line(samples: u64, seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    // (eps/σ, perpendicular offset of the line in units of σ)
    let cases = [(0.1, 0.0), (0.3, 0.0), (0.6, 0.5), (0.9, 0.0)];
    for d in 2..=4 {
        for &(eps_ratio, offset) in &cases {
            let k = out.len() as u64;
            let sigma = if k.is_multiple_of(2) { 1.0 } else { 0.25 };
            let mut a = vec![0.0; d];
            a[1] = offset * sigma;
            let mut b = a.clone();
            b[0] = 1.0;
            let eps = eps_ratio * sigma;
            let f = mc_line_closeness(
                d,
                sigma,
                &Point::from(a),
                &Point::from(b),
                eps,
                samples,
                derive_seed(seed, &[k]),
            )?;
            out.push(SubCheck::frequency(
                format!("d={d} sigma={sigma} eps={eps} offset={}", offset * sigma),
                f,
                eps_ratio.powi(d as i32 - 1),
            ));
        }
    }
    Ok(out)
}

/// `‖b‖` with `b ~ N(μ, σ²I)` stochastically dominates `‖a‖` with
/// `a ~ N(0, σ²I)`: the largest standardised excess of `F̂_b` over `F̂_a`
/// across quantiles stays below the slack.
fn dominance(samples: u64, seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    for d in 1..=3 {
        for mu_ratio in [0.0, 0.5, 1.0, 3.0] {
            let k = out.len() as u64;
            let sigma = 1.0;
            let mu = axis(d, mu_ratio * sigma);
            let s = mc_dominance(d, sigma, &mu, samples, derive_seed(seed, &[k]))?;
            let excess = s.max_standardized_excess(DOMINANCE_QUANTILES);
            let excess = if excess == f64::NEG_INFINITY { 0.0 } else { excess };
            out.push(SubCheck::upper(
                format!("d={d} |mu|={}", mu_ratio * sigma),
                excess,
                0.0,
                SE_SLACK,
            ));
        }
    }
    Ok(out)
}

fn half_normal(x: f64, s: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() / s * (-(x * x) / (2.0 * s * s)).exp()
}

fn rayleigh(x: f64, s: f64) -> f64 {
    x / (s * s) * (-(x * x) / (2.0 * s * s)).exp()
}

fn maxwell(x: f64, s: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * x * x / (s * s * s) * (-(x * x) / (2.0 * s * s)).exp()
}

/// Chi densities against their named special cases, unit mass, and (with
/// samples) `E[1/‖b‖] ≤ E[1/‖a‖]` for shifted Gaussians.
/// Dimension, closed-form density `(x, σ)` and its name.
type Special = (u32, fn(f64, f64) -> f64, &'static str);

fn chi(samples: u64, seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    let specials: [Special; 3] = [
        (1, half_normal, "half-normal"),
        (2, rayleigh, "rayleigh"),
        (3, maxwell, "maxwell"),
    ];
    for (d, f, name) in specials {
        for sigma in [0.5, 1.0, 2.0] {
            let mut worst: f64 = 0.0;
            for j in 0..=60 {
                let x = j as f64 * sigma / 10.0;
                let expect = f(x, sigma);
                let got = chi_pdf(x, d, sigma)?;
                let err = if expect == 0.0 {
                    got.abs()
                } else {
                    ((got - expect) / expect).abs()
                };
                worst = worst.max(err);
            }
            out.push(SubCheck::upper(
                format!("pdf d={d} sigma={sigma} vs {name}"),
                worst,
                1e-10,
                0.0,
            ));
        }
    }
    for d in 1..=8u32 {
        let mass = integrate(|x| chi_pdf(x, d, 1.0).unwrap_or(0.0), 0.0, 20.0, 1e-12);
        out.push(SubCheck::upper(format!("mass d={d}"), (mass - 1.0).abs(), 1e-8, 0.0));
    }
    if samples >= 2 {
        for d in 3..=5usize {
            for mu_ratio in [0.0, 0.5, 1.0, 2.0] {
                let k = 100 + out.len() as u64;
                let sigma = 1.0;
                let (mean, se) = mc_inverse_norm_power(
                    d,
                    sigma,
                    &axis(d, mu_ratio * sigma),
                    1,
                    samples,
                    derive_seed(seed, &[k]),
                )?;
                let bound = chi_inverse_moment(d as u32, 1, sigma)?;
                out.push(SubCheck::upper(
                    format!("E[1/|b|] d={d} |mu|={}", mu_ratio * sigma),
                    mean,
                    bound,
                    SE_SLACK * se,
                ));
            }
        }
    }
    Ok(out)
}

/// Closed-form inverse moments of the chi law against quadrature, and (with
/// samples) against Monte Carlo means where the variance is finite.
fn integral(samples: u64, seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    for d in 2..=12u32 {
        for c in 1..=2u32 {
            if d <= c {
                continue;
            }
            for sigma in [0.5, 1.0] {
                let closed = chi_inverse_moment(d, c, sigma)?;
                let quad = chi_inverse_moment_quadrature(d, c, sigma)?;
                out.push(SubCheck::upper(
                    format!("closed vs quadrature d={d} c={c} sigma={sigma}"),
                    ((closed - quad) / closed).abs(),
                    1e-6,
                    0.0,
                ));
            }
        }
    }
    if samples >= 2 {
        // d > 4c keeps the sample variance estimate itself well behaved.
        let grid = [
            (5, 1, 1.0),
            (6, 1, 0.5),
            (7, 1, 1.0),
            (8, 1, 0.5),
            (10, 1, 1.0),
            (12, 1, 0.5),
            (9, 2, 1.0),
            (10, 2, 0.5),
            (11, 2, 1.0),
            (12, 2, 0.5),
            (9, 2, 0.5),
            (12, 2, 1.0),
        ];
        for (j, &(d, c, sigma)) in grid.iter().enumerate() {
            let (mean, se) = mc_inverse_norm_power(
                d,
                sigma,
                &axis(d, 0.0),
                c,
                samples,
                derive_seed(seed, &[200 + j as u64]),
            )?;
            let closed = chi_inverse_moment(d as u32, c as u32, sigma)?;
            out.push(SubCheck::upper(
                format!("|MC - closed| d={d} c={c} sigma={sigma}"),
                (mean - closed).abs(),
                0.0,
                SE_SLACK * se,
            ));
        }
    }
    Ok(out)
}

/// `P(‖x‖ ≥ 3σ√(d ln t)) ≤ t^{−2.9d}`.
fn tail(samples: u64, seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    for d in 1..=4u32 {
        for t in [3.0, 4.0, 6.0] {
            let k = out.len() as u64;
            let sigma = if k.is_multiple_of(2) { 1.0 } else { 0.2 };
            let tb = chi_square_tail(d, sigma, t)?;
            let f = mc_tail_exceedance(d as usize, sigma, tb.threshold, samples, derive_seed(seed, &[k]))?;
            out.push(SubCheck::frequency(format!("d={d} sigma={sigma} t={t}"), f, tb.bound));
        }
    }
    Ok(out)
}

/// Number of runs in the linked-pair suite.
pub const LINKED_RUNS: usize = 50;

/// Disjoint linked pairs in recorded first-improvement runs from random
/// tours on uniform instances with `20 ≤ n ≤ 100` meet `⌈(4t − 3n)/28⌉`.
fn linked(seed: u64) -> Result<Vec<SubCheck>> {
    let mut out = Vec::new();
    for k in 0..LINKED_RUNS {
        let n = 20 + k * 80 / (LINKED_RUNS - 1);
        let s = derive_seed(seed, &[k as u64]);
        let inst = Instance::from_points(uniform_origins(n, 2, s))?;
        let rec = run_two_opt(
            &inst,
            &RunConfig {
                seed: s,
                record_changes: true,
                ..RunConfig::default()
            },
        )?;
        let changes = rec.changes.as_deref().unwrap_or_default();
        let found = disjoint_pairs_with_fallback(changes, n, EXHAUSTIVE_MATCHING_LIMIT);
        let bound = linked_pair_lower_bound(changes.len(), n);
        out.push(SubCheck {
            name: format!("run {k}: n={n} t={}", changes.len()),
            statistic: found.count() as f64,
            bound: bound as f64,
            slack: 0.0,
            passed: found.count() as i64 >= bound && found.is_valid_for(changes),
        });
    }
    Ok(out)
}
