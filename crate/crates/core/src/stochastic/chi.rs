//! Closed forms around the chi distribution and the Gaussian bounding box.

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};

/// `D_max = c·(σ·√(n ln n) + 1)`, the half-width of a box that contains all
/// perturbed points with high probability once `c` is large enough.
pub fn d_max_bound(n: usize, sigma: f64, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("d_max_bound needs n ≥ 2"));
    }
    if !(c >= 2.0) {
        return Err(invalid(format!("d_max_bound needs c ≥ 2, got {c}")));
    }
    if !(sigma >= 0.0) {
        return Err(invalid("sigma must be nonnegative"));
    }
    let n = n as f64;
    Ok(c * (sigma * (n * n.ln()).sqrt() + 1.0))
}

/// Density of the norm of a centred `d`-dimensional Gaussian with per-coordinate
/// standard deviation `sigma`:
/// `χ_{d,σ}(x) = 2^{1−d/2} (x/σ)^{d−1} e^{−(x/σ)²/2} / (σ Γ(d/2))`.
///
/// Negative `x` has density 0.
pub fn chi_pdf(x: f64, d: u32, sigma: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid("chi density needs d ≥ 1"));
    }
    if !(sigma > 0.0) {
        return Err(invalid(format!("chi density needs sigma > 0, got {sigma}")));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let r = x / sigma;
    let df = d as f64;
    if r == 0.0 {
        return Ok(if d == 1 {
            (2.0 / std::f64::consts::PI).sqrt() / sigma
        } else {
            0.0
        });
    }
    let log =
        (1.0 - df / 2.0) * std::f64::consts::LN_2 + (df - 1.0) * r.ln() - r * r / 2.0 - sigma.ln() - ln_gamma(df / 2.0);
    Ok(log.exp())
}

/// `∫₀^∞ χ_{d,σ}(x) x^{−c} dx = 2^{−c/2} Γ((d−c)/2) / (σ^c Γ(d/2))` for `d > c`.
pub fn chi_inverse_moment(d: u32, c: u32, sigma: f64) -> Result<f64> {
    if c < 1 || d <= c {
        return Err(invalid(format!(
            "inverse moment of order {c} diverges or is undefined for d = {d}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let (df, cf) = (d as f64, c as f64);
    let log = -cf / 2.0 * std::f64::consts::LN_2 + ln_gamma((df - cf) / 2.0) - cf * sigma.ln() - ln_gamma(df / 2.0);
    Ok(log.exp())
}

/// Threshold and probability of the Gaussian norm tail bound
/// `P(‖x‖ ≥ 3σ√(d ln t)) ≤ t^{−2.9d}`, valid for `t ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub threshold: f64,
    pub bound: f64,
}

pub fn chi_square_tail(d: u32, sigma: f64, t: f64) -> Result<TailBound> {
    if !(t >= 3.0) {
        return Err(invalid(format!("tail bound requires t ≥ 3, got {t}")));
    }
    if d == 0 || !(sigma >= 0.0) {
        return Err(invalid("tail bound requires d ≥ 1 and sigma ≥ 0"));
    }
    let df = d as f64;
    Ok(TailBound {
        threshold: sigma * 3.0 * (df * t.ln()).sqrt(),
        bound: t.powf(-2.9 * df),
    })
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }

    // Split into panels first so narrow features are not missed by the initial estimate.
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == PANELS { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            step(&f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 48)
        })
        .sum()
}

/// `∫ χ_{d,σ}(x)·x^{−c} dx` by quadrature over `[0, 40σ]`, the independent
/// check on [`chi_inverse_moment`].
pub fn chi_inverse_moment_quadrature(d: u32, c: u32, sigma: f64) -> Result<f64> {
    if c < 1 || d <= c {
        return Err(invalid("inverse moment diverges for d ≤ c"));
    }
    chi_pdf(1.0, d, sigma)?;
    let f = |x: f64| {
        if x <= 0.0 {
            // Limit at 0 is finite only when d − 1 − c = 0.
            if d - 1 == c {
                let df = d as f64;
                (2.0f64).powf(1.0 - df / 2.0) / (sigma.powi(d as i32) * statrs::function::gamma::gamma(df / 2.0))
            } else {
                0.0
            }
        } else {
            chi_pdf(x, d, sigma).unwrap() * x.powi(-(c as i32))
        }
    };
    Ok(integrate(f, 0.0, 40.0 * sigma, 1e-13 / sigma.powi(c as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn d_max_examples() {
        for n in [2, 10, 1000] {
            assert_eq!(d_max_bound(n, 0.0, 2.0).unwrap(), 2.0);
        }
        let v = d_max_bound(2, 1.0, 2.0).unwrap();
        assert_relative_eq!(v, 2.0 * ((2.0 * 2f64.ln()).sqrt() + 1.0), max_relative = 1e-15);
        assert_relative_eq!(v, 4.3548, epsilon = 1e-4);
        assert!(d_max_bound(50, 0.2, 2.0).unwrap() > d_max_bound(50, 0.1, 2.0).unwrap());
        assert!(d_max_bound(51, 0.1, 2.0).unwrap() > d_max_bound(50, 0.1, 2.0).unwrap());
        assert!(d_max_bound(1, 1.0, 2.0).is_err());
        assert!(d_max_bound(10, 1.0, 1.5).is_err());
    }

    #[test]
    fn chi_pdf_examples() {
        assert_eq!(chi_pdf(0.0, 2, 1.0).unwrap(), 0.0);
        assert_eq!(chi_pdf(0.0, 5, 0.3).unwrap(), 0.0);
        assert_relative_eq!(chi_pdf(1.0, 2, 1.0).unwrap(), (-0.5f64).exp(), max_relative = 1e-14);
        assert_eq!(chi_pdf(-1.0, 3, 1.0).unwrap(), 0.0);
        assert!(chi_pdf(1.0, 3, 0.0).is_err());
    }

    #[test]
    fn chi_pdf_matches_named_specialisations() {
        for &sigma in &[0.1, 0.5, 1.0, 2.7] {
            for k in 1..200 {
                let x = k as f64 * 0.05 * sigma;
                let r = x / sigma;
                let half_normal = (2.0 / PI).sqrt() / sigma * (-r * r / 2.0).exp();
                let rayleigh = x / (sigma * sigma) * (-r * r / 2.0).exp();
                let maxwell = (2.0 / PI).sqrt() * x * x / sigma.powi(3) * (-r * r / 2.0).exp();
                assert_relative_eq!(chi_pdf(x, 1, sigma).unwrap(), half_normal, max_relative = 1e-10);
                assert_relative_eq!(chi_pdf(x, 2, sigma).unwrap(), rayleigh, max_relative = 1e-10);
                assert_relative_eq!(chi_pdf(x, 3, sigma).unwrap(), maxwell, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn chi_pdf_integrates_to_one() {
        for d in 1..=12 {
            for &sigma in &[0.2, 1.0, 3.0] {
                let total = integrate(|x| chi_pdf(x, d, sigma).unwrap(), 0.0, 20.0 * sigma, 1e-12);
                assert!((total - 1.0).abs() <= 1e-8, "d {d} sigma {sigma}: {total}");
            }
        }
    }

    #[test]
    fn inverse_moment_examples() {
        assert_relative_eq!(chi_inverse_moment(4, 2, 1.0).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(
            chi_inverse_moment(3, 1, 1.0).unwrap(),
            (2.0 / PI).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(chi_inverse_moment(4, 2, 2.0).unwrap(), 0.125, max_relative = 1e-14);
        assert!(chi_inverse_moment(2, 2, 1.0).is_err());
        assert!(chi_inverse_moment(3, 0, 1.0).is_err());
    }

    #[test]
    fn inverse_moment_matches_quadrature() {
        for d in 2..=12 {
            for c in 1..=2 {
                if d <= c {
                    continue;
                }
                for &sigma in &[0.3, 1.0] {
                    let closed = chi_inverse_moment(d, c, sigma).unwrap();
                    let quad = chi_inverse_moment_quadrature(d, c, sigma).unwrap();
                    assert!(
                        ((closed - quad) / closed).abs() <= 1e-6,
                        "d {d} c {c} sigma {sigma}: {closed} vs {quad}"
                    );
                }
            }
        }
    }

    #[test]
    fn tail_bound_examples() {
        let tb = chi_square_tail(1, 1.0, 3.0).unwrap();
        assert_relative_eq!(tb.threshold, 3.0 * 3f64.ln().sqrt(), max_relative = 1e-15);
        assert_relative_eq!(tb.threshold, 3.14444, epsilon = 1e-5);
        assert_relative_eq!(tb.bound, 3f64.powf(-2.9), max_relative = 1e-15);
        assert_relative_eq!(tb.bound, 0.0414, epsilon = 1e-4);
        assert!(chi_square_tail(2, 1.0, 4.0).unwrap().bound < chi_square_tail(2, 1.0, 3.0).unwrap().bound);
        assert!(chi_square_tail(2, 1.0, 2.9).is_err());
    }

    #[test]
    fn quadrature_on_polynomials_and_gaussian() {
        assert_relative_eq!(integrate(|x| x * x, 0.0, 3.0, 1e-12), 9.0, max_relative = 1e-12);
        let g = integrate(|x| (-x * x / 2.0).exp(), -10.0, 10.0, 1e-13);
        assert_relative_eq!(g, (2.0 * PI).sqrt(), max_relative = 1e-11);
    }
}
