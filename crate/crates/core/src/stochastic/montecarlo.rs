//! Monte Carlo probes for the Gaussian concentration bounds.
//!
//! Each probe returns raw counts; the caller decides the slack. The harness
//! uses a one-sided test with three standard errors evaluated at the bound.

use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::{stream_rng, streams, StreamRng};
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;

/// Hit count of a Bernoulli experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub hits: u64,
    pub samples: u64,
}

impl Frequency {
    pub fn value(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.hits as f64 / self.samples as f64
        }
    }

    /// Binomial standard error `√(p(1−p)/N)` at probability `p` (clamped to `[0,1]`).
    pub fn standard_error_at(&self, p: f64) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let p = p.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// `value ≤ bound + k·SE(bound)`; vacuous when `bound ≥ 1`.
    pub fn within(&self, bound: f64, k: f64) -> bool {
        bound >= 1.0 || self.value() <= bound + k * self.standard_error_at(bound)
    }
}

fn gaussian_into(rng: &mut StreamRng, sigma: f64, out: &mut [f64]) {
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = sigma * z;
    }
}

fn check_sampling(d: usize, sigma: f64) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Frequency with which `a ~ N(0, σ²I_d)` lands in the ball of radius `eps` around `center`.
pub fn mc_ball_mass(d: usize, sigma: f64, center: &Point, eps: f64, samples: u64, seed: u64) -> Result<Frequency> {
    check_sampling(d, sigma)?;
    if center.dim() != d {
        return Err(Error::DimensionMismatch(d, center.dim()));
    }
    if !(eps >= 0.0) {
        return Err(invalid("eps must be nonnegative"));
    }
    let mut rng = stream_rng(seed, streams::MONTE_CARLO);
    let mut a = vec![0.0; d];
    let eps2 = eps * eps;
    let mut hits = 0;
    for _ in 0..samples {
        gaussian_into(&mut rng, sigma, &mut a);
        let r2: f64 = a.iter().zip(&center.coords).map(|(x, c)| (x - c) * (x - c)).sum();
        if eps > 0.0 && r2 <= eps2 {
            hits += 1;
        }
    }
    Ok(Frequency { hits, samples })
}

/// Frequency with which `c ~ N(0, σ²I_d)` is within `eps` of the line through `a` and `b`.
pub fn mc_line_closeness(
    d: usize,
    sigma: f64,
    a: &Point,
    b: &Point,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<Frequency> {
    check_sampling(d, sigma)?;
    if d < 2 {
        return Err(invalid("line closeness needs d ≥ 2"));
    }
    for p in [a, b] {
        if p.dim() != d {
            return Err(Error::DimensionMismatch(d, p.dim()));
        }
    }
    if !(eps >= 0.0) {
        return Err(invalid("eps must be nonnegative"));
    }
    let dir: Vec<f64> = b.coords.iter().zip(&a.coords).map(|(y, x)| y - x).collect();
    let len2: f64 = dir.iter().map(|v| v * v).sum();
    if len2 == 0.0 {
        return Err(invalid("line through two equal points is undefined"));
    }
    let unit: Vec<f64> = dir.iter().map(|v| v / len2.sqrt()).collect();
    let mut rng = stream_rng(seed, streams::MONTE_CARLO);
    let mut c = vec![0.0; d];
    let mut hits = 0;
    for _ in 0..samples {
        gaussian_into(&mut rng, sigma, &mut c);
        let rel: Vec<f64> = c.iter().zip(&a.coords).map(|(x, y)| x - y).collect();
        let along: f64 = rel.iter().zip(&unit).map(|(r, u)| r * u).sum();
        let perp2: f64 = rel
            .iter()
            .zip(&unit)
            .map(|(r, u)| {
                let q = r - along * u;
                q * q
            })
            .sum();
        if eps > 0.0 && perp2.sqrt() <= eps {
            hits += 1;
        }
    }
    Ok(Frequency { hits, samples })
}

/// Sorted norms of `a ~ N(0, σ²I)` and `b ~ N(μ, σ²I)`, drawn from separate streams.
#[derive(Debug, Clone)]
pub struct DominanceSample {
    pub norms_a: Vec<f64>,
    pub norms_b: Vec<f64>,
}

fn ecdf(sorted: &[f64], t: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.partition_point(|&x| x <= t) as f64 / sorted.len() as f64
}

impl DominanceSample {
    pub fn cdf_a(&self, t: f64) -> f64 {
        ecdf(&self.norms_a, t)
    }

    pub fn cdf_b(&self, t: f64) -> f64 {
        ecdf(&self.norms_b, t)
    }

    /// Two-sample standard error of `F̂_b(t) − F̂_a(t)` under equal laws,
    /// using the pooled CDF estimate.
    pub fn two_sample_se(&self, t: f64) -> f64 {
        let (na, nb) = (self.norms_a.len() as f64, self.norms_b.len() as f64);
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let pooled = (self.cdf_a(t) * na + self.cdf_b(t) * nb) / (na + nb);
        (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt()
    }

    /// Largest standardised excess `(F̂_b − F̂_a)/SE` over the pooled quantiles
    /// `q/k` for `q = 1..k−1`; 0 where the SE vanishes.
    pub fn max_standardized_excess(&self, k: usize) -> f64 {
        let mut pooled: Vec<f64> = self.norms_a.iter().chain(&self.norms_b).copied().collect();
        pooled.sort_by(f64::total_cmp);
        if pooled.is_empty() {
            return 0.0;
        }
        (1..k)
            .map(|q| {
                let t = pooled[(q * pooled.len() / k).min(pooled.len() - 1)];
                let se = self.two_sample_se(t);
                let diff = self.cdf_b(t) - self.cdf_a(t);
                if se > 0.0 {
                    diff / se
                } else if diff > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn mc_dominance(d: usize, sigma: f64, mu: &Point, samples: u64, seed: u64) -> Result<DominanceSample> {
    check_sampling(d, sigma)?;
    if mu.dim() != d {
        return Err(Error::DimensionMismatch(d, mu.dim()));
    }
    let mut ra = stream_rng(seed, streams::MONTE_CARLO);
    let mut rb = stream_rng(seed, streams::MONTE_CARLO_ALT);
    let mut v = vec![0.0; d];
    let mut norms_a = Vec::with_capacity(samples as usize);
    let mut norms_b = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        gaussian_into(&mut ra, sigma, &mut v);
        norms_a.push(v.iter().map(|x| x * x).sum::<f64>().sqrt());
        gaussian_into(&mut rb, sigma, &mut v);
        norms_b.push(
            v.iter()
                .zip(&mu.coords)
                .map(|(x, m)| (x + m) * (x + m))
                .sum::<f64>()
                .sqrt(),
        );
    }
    norms_a.sort_by(f64::total_cmp);
    norms_b.sort_by(f64::total_cmp);
    Ok(DominanceSample { norms_a, norms_b })
}

/// Frequency of `‖x‖ ≥ threshold` for `x ~ N(0, σ²I_d)`.
pub fn mc_tail_exceedance(d: usize, sigma: f64, threshold: f64, samples: u64, seed: u64) -> Result<Frequency> {
    check_sampling(d, sigma)?;
    let mut rng = stream_rng(seed, streams::MONTE_CARLO);
    let mut v = vec![0.0; d];
    let thr2 = threshold * threshold;
    let mut hits = 0;
    for _ in 0..samples {
        gaussian_into(&mut rng, sigma, &mut v);
        if v.iter().map(|x| x * x).sum::<f64>() >= thr2 {
            hits += 1;
        }
    }
    Ok(Frequency { hits, samples })
}

/// Sample mean and standard error of `1/‖b‖` for `b ~ N(μ, σ²I_d)`.
pub fn mc_inverse_norm_mean(d: usize, sigma: f64, mu: &Point, samples: u64, seed: u64) -> Result<(f64, f64)> {
    mc_inverse_norm_power(d, sigma, mu, 1, samples, seed)
}

/// Sample mean and standard error of `‖b‖^{−c}` for `b ~ N(μ, σ²I_d)`.
pub fn mc_inverse_norm_power(d: usize, sigma: f64, mu: &Point, c: i32, samples: u64, seed: u64) -> Result<(f64, f64)> {
    check_sampling(d, sigma)?;
    if mu.dim() != d {
        return Err(Error::DimensionMismatch(d, mu.dim()));
    }
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let mut rng = stream_rng(seed, streams::MONTE_CARLO);
    let mut v = vec![0.0; d];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        gaussian_into(&mut rng, sigma, &mut v);
        let r = v
            .iter()
            .zip(&mu.coords)
            .map(|(x, m)| (x + m) * (x + m))
            .sum::<f64>()
            .sqrt();
        let h = r.powi(-c);
        sum += h;
        sum2 += h * h;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::chi::{chi_inverse_moment, chi_square_tail};
    use statrs::function::erf::erf;

    const N: u64 = 200_000;

    #[test]
    fn ball_examples() {
        let c = Point::from([0.0, 0.0]);
        assert_eq!(mc_ball_mass(2, 1.0, &c, 0.0, 1000, 1).unwrap().hits, 0);
        // Vacuous regime.
        let f = mc_ball_mass(2, 1.0, &c, 1.5, 1000, 1).unwrap();
        assert!(f.within((1.5f64).powi(2), 3.0));

        let f = mc_ball_mass(2, 1.0, &c, 0.5, N, 2).unwrap();
        let exact = 1.0 - (-0.125f64).exp();
        assert!((f.value() - exact).abs() <= 3.0 * f.standard_error_at(exact));
        assert!(exact <= 0.25);
        assert!(f.within(0.25, 3.0));
    }

    #[test]
    fn line_examples() {
        let a = Point::from([0.0, 0.0]);
        let b = Point::from([1.0, 0.0]);
        assert_eq!(mc_line_closeness(2, 1.0, &a, &b, 0.0, 1000, 1).unwrap().hits, 0);
        let f = mc_line_closeness(2, 1.0, &a, &b, 0.1, N, 3).unwrap();
        let exact = erf(0.1 / 2f64.sqrt());
        assert!((exact - 0.0797).abs() < 1e-4);
        assert!((f.value() - exact).abs() <= 3.0 * f.standard_error_at(exact));
        assert!(f.within(0.1, 3.0));
        assert!(mc_line_closeness(2, 1.0, &a, &a, 0.1, 10, 1).is_err());
        assert!(mc_line_closeness(1, 1.0, &Point::from([0.0]), &Point::from([1.0]), 0.1, 10, 1).is_err());
    }

    #[test]
    fn dominance_examples() {
        let same = mc_dominance(2, 1.0, &Point::from([0.0, 0.0]), 50_000, 4).unwrap();
        assert!(same.max_standardized_excess(20) <= 3.0);
        assert_eq!(same.cdf_a(-1.0), 0.0);
        assert_eq!(same.cdf_b(-1.0), 0.0);

        let shifted = mc_dominance(2, 1.0, &Point::from([3.0, 0.0]), 50_000, 5).unwrap();
        let med = shifted.norms_a[shifted.norms_a.len() / 2];
        assert!(shifted.cdf_b(med) < shifted.cdf_a(med) - 0.3);
        assert!(shifted.max_standardized_excess(20) <= 3.0);
    }

    #[test]
    fn tail_exceedance_below_bound() {
        let tb = chi_square_tail(2, 1.0, 3.0).unwrap();
        let f = mc_tail_exceedance(2, 1.0, tb.threshold, N, 6).unwrap();
        let exact = (-tb.threshold * tb.threshold / 2.0).exp();
        assert!(exact < 0.0017);
        assert!((f.value() - exact).abs() <= 3.0 * f.standard_error_at(exact) + 1e-12);
        assert!(f.within(tb.bound, 3.0));
    }

    #[test]
    fn inverse_norm_mean_is_dominated_by_chi() {
        let closed = chi_inverse_moment(3, 1, 1.0).unwrap();
        let (centred, se) = mc_inverse_norm_mean(3, 1.0, &Point::from([0.0, 0.0, 0.0]), N, 7).unwrap();
        assert!((centred - closed).abs() <= 4.0 * se, "{centred} vs {closed}");
        let (shifted, se) = mc_inverse_norm_mean(3, 1.0, &Point::from([1.5, -0.5, 0.0]), N, 8).unwrap();
        assert!(shifted <= closed + 3.0 * se);
    }

    #[test]
    fn zero_samples_give_zero_frequency() {
        let f = mc_ball_mass(3, 1.0, &Point::from([0.0, 0.0, 0.0]), 0.5, 0, 1).unwrap();
        assert_eq!(f.value(), 0.0);
        assert!(f.within(0.1, 3.0));
    }
}
