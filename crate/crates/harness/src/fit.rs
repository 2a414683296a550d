//! Least-squares fits and per-x aggregation.

use serde::Serialize;

use crate::error::{validation, Result};
use crate::sweep::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`; needs at least three
/// distinct x values.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() {
        return Err(validation("x and y lengths differ"));
    }
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(validation("fit needs at least three distinct x values"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(validation("fit inputs must be finite"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(Fit { slope, intercept, r2 })
}

/// Least squares on `(ln x, ln y)`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.iter().chain(ys).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(validation("log-log fit needs positive x and y"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupMean {
    pub x: f64,
    pub mean: f64,
    /// Standard error of the mean (0 for single observations).
    pub se: f64,
    pub count: usize,
}

/// Mean of `ys` per distinct `x`, in increasing `x`.
pub fn group_means(xs: &[f64], ys: &[f64]) -> Vec<GroupMean> {
    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut k = 0;
    while k < pairs.len() {
        let x = pairs[k].0;
        let group: Vec<f64> = pairs[k..].iter().take_while(|p| p.0 == x).map(|p| p.1).collect();
        k += group.len();
        let m = group.len() as f64;
        let mean = group.iter().sum::<f64>() / m;
        let se = if group.len() > 1 {
            (group.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (m - 1.0) / m).sqrt()
        } else {
            0.0
        };
        out.push(GroupMean {
            x,
            mean,
            se,
            count: group.len(),
        });
    }
    out
}

/// Values of two columns over the rows where both are present.
pub fn columns(rows: &[SweepRow], x_field: &str, y_field: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        if let (Some(x), Some(y)) = (r.field(x_field), r.field(y_field)) {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(validation(format!("no rows carry both {x_field} and {y_field}")));
    }
    Ok((xs, ys))
}

/// Log-log fit of the per-x mean of `y_field` against `x_field`.
pub fn scaling_fit(rows: &[SweepRow], x_field: &str, y_field: &str) -> Result<Fit> {
    let (xs, ys) = columns(rows, x_field, y_field)?;
    let means = group_means(&xs, &ys);
    let mx: Vec<f64> = means.iter().map(|g| g.x).collect();
    let my: Vec<f64> = means.iter().map(|g| g.mean).collect();
    loglog_fit(&mx, &my)
}
