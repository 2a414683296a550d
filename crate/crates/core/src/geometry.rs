//! Points, distance measures and the gain arithmetic of a single 2-change.
//!
//! Everything here is a pure function over `f64` values. Comparisons against
//! zero are left to callers, who pass an explicit tolerance where it matters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point in ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinate lists.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("point must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl<const D: usize> From<[f64; D]> for Point {
    fn from(coords: [f64; D]) -> Self {
        Self {
            coords: coords.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "l1")]
    Manhattan,
    #[serde(rename = "l2")]
    Euclidean,
    #[serde(rename = "l2sq")]
    SquaredEuclidean,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Manhattan, Metric::Euclidean, Metric::SquaredEuclidean];

    /// Distance between two coordinate slices of equal length. No checks.
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => squared_norm_diff(a, b).sqrt(),
            Metric::SquaredEuclidean => squared_norm_diff(a, b),
        }
    }

    /// Whether the measure obeys the triangle inequality.
    pub fn is_metric(self) -> bool {
        !matches!(self, Metric::SquaredEuclidean)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Manhattan => "l1",
            Metric::Euclidean => "l2",
            Metric::SquaredEuclidean => "l2sq",
        }
    }
}

#[inline]
fn squared_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "manhattan" => Ok(Metric::Manhattan),
            "l2" | "euclidean" => Ok(Metric::Euclidean),
            "l2sq" | "squared-euclidean" => Ok(Metric::SquaredEuclidean),
            other => Err(invalid(format!("unknown metric `{other}`"))),
        }
    }
}

fn check_dims(points: &[&Point]) -> Result<()> {
    let d = points[0].dim();
    for p in &points[1..] {
        if p.dim() != d {
            return Err(Error::DimensionMismatch(d, p.dim()));
        }
    }
    Ok(())
}

pub fn distance(a: &Point, b: &Point, metric: Metric) -> Result<f64> {
    check_dims(&[a, b])?;
    Ok(metric.eval(&a.coords, &b.coords))
}

/// `Δ_{a,b}(c) = d(c, a) − d(c, b)`.
pub fn delta(a: &Point, b: &Point, c: &Point, metric: Metric) -> Result<f64> {
    check_dims(&[a, b, c])?;
    Ok(metric.eval(&c.coords, &a.coords) - metric.eval(&c.coords, &b.coords))
}

/// Improvement of replacing edges `{x1,x2}`, `{x3,x4}` by `{x1,x3}`, `{x2,x4}`.
#[inline]
pub fn gain_from_distances(d12: f64, d34: f64, d13: f64, d24: f64) -> f64 {
    (d12 + d34) - (d13 + d24)
}

pub fn two_change_gain(x1: &Point, x2: &Point, x3: &Point, x4: &Point, metric: Metric) -> Result<f64> {
    check_dims(&[x1, x2, x3, x4])?;
    let d = |a: &Point, b: &Point| metric.eval(&a.coords, &b.coords);
    Ok(gain_from_distances(d(x1, x2), d(x3, x4), d(x1, x3), d(x2, x4)))
}

/// Height `y ≥ 0` of a planar point `z = (x, y)` whose distance difference to
/// `a = (0, −δ/2)` and `b = (0, δ/2)` equals `eta`:
/// `y² = η²/4 + η²x²/(δ² − η²)`.
///
/// `eta == delta` is rejected: the formula degenerates on the collinear exterior ray.
pub fn eta_geometry_y(eta: f64, x: f64, delta_ab: f64) -> Result<f64> {
    if !(eta.is_finite() && x.is_finite() && delta_ab.is_finite()) {
        return Err(invalid("eta, x and delta must be finite"));
    }
    if eta < 0.0 || x < 0.0 {
        return Err(invalid("eta and x must be nonnegative"));
    }
    if eta >= delta_ab {
        return Err(invalid(format!(
            "eta = {eta} must be strictly below delta = {delta_ab}"
        )));
    }
    let eta2 = eta * eta;
    let y2 = eta2 / 4.0 + eta2 * x * x / (delta_ab * delta_ab - eta2);
    Ok(y2.sqrt())
}
