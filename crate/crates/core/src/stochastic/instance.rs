use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{stream_rng, streams};
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;

/// A perturbed point set together with everything needed to regenerate it.
///
/// For the Gaussian model `origins` are the adversarial positions and
/// `points = origins + N(0, σ²·I)`. For the one-step model (`phi` set),
/// `origins` are the subcube centres and `points` are uniform in the subcubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub dim: usize,
    pub sigma: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    pub origins: Vec<Point>,
    pub points: Vec<Point>,
}

impl Instance {
    /// Unperturbed instance whose points are the given coordinates.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        let dim = common_dim(&points)?;
        Ok(Self {
            dim,
            sigma: 0.0,
            seed: 0,
            phi: None,
            origins: points.clone(),
            points,
        })
    }

    /// Convenience for literal coordinate lists in tests and examples.
    pub fn from_coords<const D: usize>(coords: &[[f64; D]]) -> Result<Self> {
        Self::from_points(coords.iter().map(|&c| Point::from(c)).collect())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn coords(&self, i: usize) -> &[f64] {
        &self.points[i].coords
    }

    /// Checks internal consistency: matching lengths, common dimension, finite coordinates.
    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.origins.len() {
            return Err(invalid(format!(
                "{} points but {} origins",
                self.points.len(),
                self.origins.len()
            )));
        }
        if self.points.is_empty() {
            return Err(invalid("instance has no points"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma must be finite and nonnegative"));
        }
        for p in self.points.iter().chain(&self.origins) {
            if p.dim() != self.dim {
                return Err(Error::DimensionMismatch(self.dim, p.dim()));
            }
            if p.coords.iter().any(|c| !c.is_finite()) {
                return Err(invalid("non-finite coordinate"));
            }
        }
        Ok(())
    }

    /// Re-runs the generating process from `(origins, sigma | phi, seed)`.
    pub fn regenerate(&self) -> Result<Instance> {
        match self.phi {
            Some(phi) => {
                let spec = OneStepSpec::new(phi, self.dim, self.origins.clone())?;
                one_step_sample(&spec, self.n(), self.seed)
            }
            None => perturb_unrestricted(&self.origins, self.sigma, self.seed),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn common_dim(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or_else(|| invalid("empty point list"))?;
    let d = first.dim();
    if d == 0 {
        return Err(invalid("points must have dimension at least 1"));
    }
    for p in points {
        if p.dim() != d {
            return Err(Error::DimensionMismatch(d, p.dim()));
        }
    }
    Ok(d)
}

/// Gaussian perturbation with the convention `σ ≤ 1`.
pub fn perturb(origins: &[Point], sigma: f64, seed: u64) -> Result<Instance> {
    if sigma > 1.0 {
        return Err(invalid(format!(
            "sigma = {sigma} exceeds 1; use perturb_unrestricted to override"
        )));
    }
    perturb_unrestricted(origins, sigma, seed)
}

/// Adds independent `N(0, σ²)` noise to every coordinate of every origin.
///
/// Noise is drawn point by point, coordinate by coordinate, from the
/// [`streams::NOISE`] stream of `seed`.
pub fn perturb_unrestricted(origins: &[Point], sigma: f64, seed: u64) -> Result<Instance> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be finite and nonnegative, got {sigma}")));
    }
    let dim = common_dim(origins)?;
    let mut rng = stream_rng(seed, streams::NOISE);
    let points = origins
        .iter()
        .map(|o| {
            let coords = o
                .coords
                .iter()
                .map(|&x| {
                    let z: f64 = rng.sample(StandardNormal);
                    x + sigma * z
                })
                .collect();
            Point { coords }
        })
        .collect();
    Ok(Instance {
        dim,
        sigma,
        seed,
        phi: None,
        origins: origins.to_vec(),
        points,
    })
}

/// A φ-bounded density family: point `i` is uniform on an axis-parallel
/// subcube of `[0,1]^d` of side `φ^{-1/d}` centred at `cells[i]` (or at the
/// single shared centre when only one cell is given).
#[derive(Debug, Clone, PartialEq)]
pub struct OneStepSpec {
    pub phi: f64,
    pub dim: usize,
    pub cells: Vec<Point>,
}

impl OneStepSpec {
    pub fn new(phi: f64, dim: usize, cells: Vec<Point>) -> Result<Self> {
        if !(phi >= 1.0 && phi.is_finite()) {
            return Err(invalid(format!("phi must be at least 1, got {phi}")));
        }
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if cells.is_empty() {
            return Err(invalid("at least one cell is required"));
        }
        let spec = Self { phi, dim, cells };
        let half = spec.side() / 2.0;
        for c in &spec.cells {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(dim, c.dim()));
            }
            for &x in &c.coords {
                if x - half < -1e-12 || x + half > 1.0 + 1e-12 {
                    return Err(invalid(format!(
                        "subcube centred at {:?} with side {} leaves [0,1]^{}",
                        c.coords,
                        spec.side(),
                        dim
                    )));
                }
            }
        }
        Ok(spec)
    }

    /// `φ = 1`: the uniform distribution on the unit cube.
    pub fn uniform(dim: usize) -> Self {
        Self {
            phi: 1.0,
            dim,
            cells: vec![Point { coords: vec![0.5; dim] }],
        }
    }

    /// One subcube per point, each placed uniformly at random inside the unit cube.
    pub fn random_cells(phi: f64, dim: usize, n: usize, seed: u64) -> Result<Self> {
        if !(phi >= 1.0 && phi.is_finite()) {
            return Err(invalid(format!("phi must be at least 1, got {phi}")));
        }
        let side = phi.powf(-1.0 / dim as f64);
        let half = side / 2.0;
        let mut rng = stream_rng(seed, streams::CELLS);
        let cells = (0..n)
            .map(|_| Point {
                coords: (0..dim).map(|_| half + (1.0 - side) * rng.random::<f64>()).collect(),
            })
            .collect();
        Self::new(phi, dim, cells)
    }

    pub fn side(&self) -> f64 {
        self.phi.powf(-1.0 / self.dim as f64)
    }
}

pub fn one_step_sample(spec: &OneStepSpec, n: usize, seed: u64) -> Result<Instance> {
    if spec.cells.len() != 1 && spec.cells.len() != n {
        return Err(invalid(format!(
            "{} cells for {} points; give one shared cell or one per point",
            spec.cells.len(),
            n
        )));
    }
    let side = spec.side();
    let mut rng = stream_rng(seed, streams::NOISE);
    let mut origins = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let cell = if spec.cells.len() == 1 {
            &spec.cells[0]
        } else {
            &spec.cells[i]
        };
        let coords = cell
            .coords
            .iter()
            .map(|&c| (c + side * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0))
            .collect();
        origins.push(cell.clone());
        points.push(Point { coords });
    }
    Ok(Instance {
        dim: spec.dim,
        sigma: 0.0,
        seed,
        phi: Some(spec.phi),
        origins,
        points,
    })
}

/// Origins drawn uniformly from `[0,1]^d`.
pub fn uniform_origins(n: usize, dim: usize, seed: u64) -> Vec<Point> {
    let mut rng = stream_rng(seed, streams::ORIGINS);
    (0..n)
        .map(|_| Point {
            coords: (0..dim).map(|_| rng.random::<f64>()).collect(),
        })
        .collect()
}

/// The first `n` nodes (row-major) of the smallest `k^d` lattice with
/// `k^d ≥ n`, scaled into `[0,1]^d`.
pub fn grid_origins(n: usize, dim: usize) -> Vec<Point> {
    let mut k = 1usize;
    while k.pow(dim as u32) < n {
        k += 1;
    }
    let step = if k > 1 { 1.0 / (k - 1) as f64 } else { 0.0 };
    (0..n)
        .map(|mut idx| {
            let mut coords = vec![0.0; dim];
            for c in coords.iter_mut().rev() {
                *c = (idx % k) as f64 * step;
                idx /= k;
            }
            Point { coords }
        })
        .collect()
}

/// All origins at the centre of the unit cube.
pub fn single_point_origins(n: usize, dim: usize) -> Vec<Point> {
    vec![Point { coords: vec![0.5; dim] }; n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_keeps_origins() {
        let origins = uniform_origins(20, 3, 5);
        let inst = perturb(&origins, 0.0, 99).unwrap();
        assert_eq!(inst.points, origins);
    }

    #[test]
    fn perturb_is_deterministic() {
        let origins = uniform_origins(50, 2, 1);
        let a = perturb(&origins, 0.3, 11).unwrap();
        let b = perturb(&origins, 0.3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.regenerate().unwrap(), a);
        let c = perturb(&origins, 0.3, 12).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn perturb_rejects_bad_sigma() {
        let origins = uniform_origins(3, 2, 1);
        assert!(perturb(&origins, -0.1, 0).is_err());
        assert!(perturb(&origins, f64::NAN, 0).is_err());
        assert!(perturb(&origins, 2.0, 0).is_err());
        assert!(perturb_unrestricted(&origins, 2.0, 0).is_ok());
        assert!(perturb(&[], 0.1, 0).is_err());
    }

    #[test]
    fn perturbation_variance_matches_sigma() {
        let n = 100_000;
        let sigma = 0.25;
        let origins = single_point_origins(n, 2);
        let inst = perturb(&origins, sigma, 3).unwrap();
        let disp: Vec<f64> = inst.points.iter().map(|p| p.coords[0] - 0.5).collect();
        let mean = disp.iter().sum::<f64>() / n as f64;
        let var = disp.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Var of the sample variance for a Gaussian is 2σ⁴/(n−1).
        let se = (2.0 * sigma.powi(4) / (n - 1) as f64).sqrt();
        assert!((var - sigma * sigma).abs() <= 3.0 * se, "var {var}");

        // Coordinate independence.
        let other: Vec<f64> = inst.points.iter().map(|p| p.coords[1] - 0.5).collect();
        let cov = disp.iter().zip(&other).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        let corr = cov / (sigma * sigma);
        assert!(corr.abs() <= 3.0 / (n as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn one_step_uniform_mean_and_quadrant() {
        let n = 100_000;
        let inst = one_step_sample(&OneStepSpec::uniform(2), n, 8).unwrap();
        let se_mean = (1.0f64 / 12.0 / n as f64).sqrt();
        for k in 0..2 {
            let m = inst.points.iter().map(|p| p.coords[k]).sum::<f64>() / n as f64;
            assert!((m - 0.5).abs() <= 3.0 * se_mean, "mean {m}");
        }
        let hits = inst
            .points
            .iter()
            .filter(|p| p.coords[0] < 0.5 && p.coords[1] < 0.5)
            .count() as f64;
        let freq = hits / n as f64;
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((freq - 0.25).abs() <= 3.0 * se, "freq {freq}");
    }

    #[test]
    fn one_step_respects_support() {
        // Side 0.1 in d = 2 means φ = 100.
        let spec = OneStepSpec::new(100.0, 2, vec![Point::from([0.05, 0.05])]).unwrap();
        let inst = one_step_sample(&spec, 10_000, 2).unwrap();
        assert!(inst
            .points
            .iter()
            .all(|p| p.coords.iter().all(|&x| (0.0..=0.1 + 1e-12).contains(&x))));
        assert_eq!(inst.regenerate().unwrap(), inst);
    }

    #[test]
    fn one_step_rejects_escaping_cells() {
        assert!(OneStepSpec::new(100.0, 2, vec![Point::from([0.01, 0.5])]).is_err());
        assert!(OneStepSpec::new(0.5, 2, vec![Point::from([0.5, 0.5])]).is_err());
        let spec = OneStepSpec::random_cells(16.0, 2, 7, 1).unwrap();
        assert!(one_step_sample(&spec, 5, 0).is_err());
        assert!(one_step_sample(&spec, 7, 0).is_ok());
    }

    #[test]
    fn grid_origins_fill_unit_square() {
        let g = grid_origins(9, 2);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0].coords, vec![0.0, 0.0]);
        assert_eq!(g[8].coords, vec![1.0, 1.0]);
        assert_eq!(grid_origins(5, 2).len(), 5);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let origins = uniform_origins(30, 3, 4);
        let inst = perturb(&origins, 0.123456789, 77).unwrap();
        let text = inst.to_json().unwrap();
        assert!(text.starts_with("{\"dim\":3,\"sigma\":"));
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn json_rejects_inconsistent_instances() {
        let bad = r#"{"dim":2,"sigma":0.0,"seed":0,"origins":[[0,0]],"points":[[0,0],[1,1]]}"#;
        assert!(Instance::from_json(bad).is_err());
        let bad_dim = r#"{"dim":3,"sigma":0.0,"seed":0,"origins":[[0,0]],"points":[[0,0]]}"#;
        assert!(Instance::from_json(bad_dim).is_err());
    }
}
