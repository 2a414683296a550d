//! Parameter sweeps.
//!
//! Grid points are enumerated with `n` outermost, then σ (or φ), `dim`,
//! `metric`, `pivot`, `init` and `origins` innermost. Row `r` belongs to grid
//! point `r / seeds` and seed index `r % seeds`, and its task seed is
//! `derive_seed(base_seed, [grid_index, seed_index])`, a splitmix64 fold.
//! Rows are computed in parallel and written in row order, so the output
//! depends only on the configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use twopt_core::exact::{estimate_two_opt_max, held_karp, mst_length, HELD_KARP_LIMIT};
use twopt_core::linked::{disjoint_pairs_with_fallback, linked_pair_lower_bound};
use twopt_core::stochastic::{
    derive_seed, grid_origins, one_step_sample, perturb, single_point_origins, uniform_origins, Instance, OneStepSpec,
};
use twopt_core::tour::{min_improvement, run_two_opt, RunConfig};
use twopt_core::{InitRule, Metric, PivotRule, Point};

use crate::config::{OptMode, OriginSource, SweepConfig};
use crate::error::{validation, HarnessError, Result};

/// Exact matching is used for linked-pair counts only on sequences this short.
pub const EXHAUSTIVE_MATCHING_LIMIT: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    /// σ for the Gaussian model, φ for the one-step model.
    pub model_value: f64,
    pub dim: usize,
    pub metric: Metric,
    pub pivot: PivotRule,
    pub init: InitRule,
    pub origins: OriginSource,
}

pub fn grid_points(cfg: &SweepConfig) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(cfg.points());
    for &n in &cfg.n {
        for &model_value in cfg.model_values() {
            for &dim in &cfg.dim {
                for &metric in &cfg.metric {
                    for &pivot in &cfg.pivot {
                        for &init in &cfg.init {
                            for origins in &cfg.origins {
                                out.push(GridPoint {
                                    n,
                                    model_value,
                                    dim,
                                    metric,
                                    pivot,
                                    init,
                                    origins: origins.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub row_id: usize,
    pub grid_index: usize,
    pub seed_index: usize,
    pub seed: u64,
    pub n: usize,
    pub dim: usize,
    pub model: &'static str,
    pub sigma: Option<f64>,
    pub phi: Option<f64>,
    pub origins: String,
    pub metric: Metric,
    pub pivot: PivotRule,
    pub init: InitRule,
    pub eps: f64,
    pub restarts: usize,
    pub iterations: u64,
    pub initial_length: f64,
    pub final_length: f64,
    pub converged: bool,
    pub certified: bool,
    pub delta_min: Option<f64>,
    pub linked_pairs: Option<usize>,
    pub linked_bound: Option<i64>,
    pub opt_length: Option<f64>,
    /// `exact` (Held-Karp) or `bound` (2·MST).
    pub opt_kind: Option<&'static str>,
    pub two_opt_max: Option<f64>,
    /// `two_opt_max` (or `final_length` without restarts) over `opt_length`.
    pub ratio: Option<f64>,
}

pub const HEADER: [&str; 27] = [
    "row_id",
    "grid_index",
    "seed_index",
    "seed",
    "n",
    "dim",
    "model",
    "sigma",
    "phi",
    "origins",
    "metric",
    "pivot",
    "init",
    "eps",
    "restarts",
    "iterations",
    "initial_length",
    "final_length",
    "converged",
    "certified",
    "delta_min",
    "linked_pairs",
    "linked_bound",
    "opt_length",
    "opt_kind",
    "two_opt_max",
    "ratio",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.row_id.to_string(),
            self.grid_index.to_string(),
            self.seed_index.to_string(),
            self.seed.to_string(),
            self.n.to_string(),
            self.dim.to_string(),
            self.model.to_string(),
            opt(self.sigma),
            opt(self.phi),
            self.origins.clone(),
            self.metric.to_string(),
            self.pivot.to_string(),
            self.init.to_string(),
            self.eps.to_string(),
            self.restarts.to_string(),
            self.iterations.to_string(),
            self.initial_length.to_string(),
            self.final_length.to_string(),
            self.converged.to_string(),
            self.certified.to_string(),
            opt(self.delta_min),
            opt(self.linked_pairs),
            opt(self.linked_bound),
            opt(self.opt_length),
            opt(self.opt_kind),
            opt(self.two_opt_max),
            opt(self.ratio),
        ]
    }

    /// Numeric value of a column, for fits and plot data.
    pub fn field(&self, name: &str) -> Option<f64> {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        match name {
            "row_id" => Some(self.row_id as f64),
            "seed_index" => Some(self.seed_index as f64),
            "n" => Some(self.n as f64),
            "dim" => Some(self.dim as f64),
            "sigma" => self.sigma,
            "phi" => self.phi,
            "eps" => Some(self.eps),
            "restarts" => Some(self.restarts as f64),
            "iterations" => Some(self.iterations as f64),
            "initial_length" => Some(self.initial_length),
            "final_length" => Some(self.final_length),
            "converged" => Some(b(self.converged)),
            "certified" => Some(b(self.certified)),
            "delta_min" => self.delta_min,
            "linked_pairs" => self.linked_pairs.map(|x| x as f64),
            "linked_bound" => self.linked_bound.map(|x| x as f64),
            "opt_length" => self.opt_length,
            "two_opt_max" => self.two_opt_max,
            "ratio" => self.ratio,
            _ => None,
        }
    }
}

pub fn task_seed(base_seed: u64, grid_index: usize, seed_index: usize) -> u64 {
    derive_seed(base_seed, &[grid_index as u64, seed_index as u64])
}

/// Grid index used for seeding: with `paired`, the σ/φ coordinate is dropped so
/// that one seed index draws the same origins and noise at every model value.
pub fn seed_grid_index(cfg: &SweepConfig, grid_index: usize) -> usize {
    if !cfg.paired {
        return grid_index;
    }
    let models = cfg.model_values().len();
    let inner = cfg.points() / (cfg.n.len() * models);
    (grid_index / (models * inner)) * inner + grid_index % inner
}

pub fn make_origins(source: &OriginSource, n: usize, dim: usize, seed: u64) -> Result<Vec<Point>> {
    Ok(match source {
        OriginSource::Uniform => uniform_origins(n, dim, seed),
        OriginSource::Grid => grid_origins(n, dim),
        OriginSource::SinglePoint => single_point_origins(n, dim),
        OriginSource::File(path) => {
            let inst = Instance::load(path)?;
            if inst.n() != n || inst.dim != dim {
                return Err(validation(format!(
                    "{}: has n = {}, dim = {}; expected n = {n}, dim = {dim}",
                    path.display(),
                    inst.n(),
                    inst.dim
                )));
            }
            inst.origins
        }
    })
}

fn make_instance(cfg: &SweepConfig, gp: &GridPoint, seed: u64) -> Result<Instance> {
    if cfg.is_one_step() {
        let spec = OneStepSpec::random_cells(gp.model_value, gp.dim, gp.n, seed)?;
        Ok(one_step_sample(&spec, gp.n, seed)?)
    } else {
        let origins = make_origins(&gp.origins, gp.n, gp.dim, seed)?;
        Ok(perturb(&origins, gp.model_value, seed)?)
    }
}

/// Computes one row from scratch.
pub fn compute_row(cfg: &SweepConfig, grid: &[GridPoint], row_id: usize) -> Result<SweepRow> {
    let grid_index = row_id / cfg.seeds;
    let seed_index = row_id % cfg.seeds;
    let gp = grid
        .get(grid_index)
        .ok_or_else(|| validation(format!("row {row_id} is outside the sweep ({} rows)", cfg.rows())))?;
    let seed = task_seed(cfg.base_seed, seed_grid_index(cfg, grid_index), seed_index);
    let inst = make_instance(cfg, gp, seed)?;

    let run_cfg = RunConfig {
        metric: gp.metric,
        init: gp.init,
        pivot: gp.pivot,
        eps: cfg.eps,
        seed,
        max_iter: cfg.max_iter.unwrap_or(u64::MAX),
        record_changes: cfg.linked,
    };
    let rec = run_two_opt(&inst, &run_cfg)?;

    let delta_min = if cfg.delta_min {
        min_improvement(&inst, gp.metric, cfg.eps)?
    } else {
        None
    };
    let (linked_pairs, linked_bound) = match &rec.changes {
        Some(changes) => (
            Some(disjoint_pairs_with_fallback(changes, gp.n, EXHAUSTIVE_MATCHING_LIMIT).count()),
            Some(linked_pair_lower_bound(changes.len(), gp.n)),
        ),
        None => (None, None),
    };
    let (opt_length, opt_kind) = match cfg.opt {
        OptMode::None => (None, None),
        OptMode::Exact => (Some(held_karp(&inst, gp.metric)?.optimal_length), Some("exact")),
        OptMode::Auto if gp.n <= HELD_KARP_LIMIT => (Some(held_karp(&inst, gp.metric)?.optimal_length), Some("exact")),
        OptMode::Auto | OptMode::Bound => (Some(2.0 * mst_length(&inst, gp.metric)?), Some("bound")),
    };
    let two_opt_max = if cfg.restarts > 0 {
        Some(estimate_two_opt_max(
            &inst,
            gp.metric,
            cfg.restarts,
            gp.pivot,
            cfg.eps,
            seed,
        )?)
    } else {
        None
    };
    let ratio = opt_length.map(|o| two_opt_max.unwrap_or(rec.final_length) / o);

    let (sigma, phi) = if cfg.is_one_step() {
        (None, Some(gp.model_value))
    } else {
        (Some(gp.model_value), None)
    };
    Ok(SweepRow {
        row_id,
        grid_index,
        seed_index,
        seed,
        n: gp.n,
        dim: gp.dim,
        model: if cfg.is_one_step() { "one_step" } else { "gaussian" },
        sigma,
        phi,
        origins: if cfg.is_one_step() {
            "cells".into()
        } else {
            gp.origins.as_string()
        },
        metric: gp.metric,
        pivot: gp.pivot,
        init: gp.init,
        eps: cfg.eps,
        restarts: cfg.restarts,
        iterations: rec.iterations,
        initial_length: rec.initial_length,
        final_length: rec.final_length,
        converged: rec.converged,
        certified: rec.certified,
        delta_min,
        linked_pairs,
        linked_bound,
        opt_length,
        opt_kind,
        two_opt_max,
        ratio,
    })
}

/// Worker count: the explicit setting, else `TWOPT_THREADS`, else all cores.
pub fn thread_width(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("TWOPT_THREADS").ok().and_then(|v| v.parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// All rows in row order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let grid = grid_points(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_width(cfg.threads))
        .build()
        .map_err(|e| validation(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..cfg.rows())
            .into_par_iter()
            .map(|r| compute_row(cfg, &grid, r))
            .collect()
    })
}

/// Recomputes a single row of the sweep.
pub fn replay(cfg: &SweepConfig, row_id: usize) -> Result<SweepRow> {
    cfg.validate()?;
    compute_row(cfg, &grid_points(cfg), row_id)
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes through a sibling temporary file that is renamed on success and
/// removed on failure, so a failed write leaves no partial output behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut fs::File) -> Result<()>,
{
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .ok_or_else(|| validation(format!("{}: not a file path", path.display())))?;
    tmp.set_file_name(format!(".{}.partial", name.to_string_lossy()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        fill(&mut f)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok::<(), HarnessError>(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Runs the sweep and writes the CSV; returns the row count.
pub fn sweep_to_path(cfg: &SweepConfig, path: &Path) -> Result<usize> {
    let rows = run_sweep(cfg)?;
    write_atomic(path, |f| write_rows(&rows, f))?;
    Ok(rows.len())
}

/// Reads rows back from a sweep CSV as column-name → value maps.
pub fn read_table(path: &Path) -> Result<Vec<std::collections::BTreeMap<String, String>>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(header.iter().cloned().zip(rec.iter().map(str::to_string)).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Model;

    fn small() -> SweepConfig {
        SweepConfig {
            n: vec![8, 9],
            model: Model::Gaussian(vec![0.01, 0.1]),
            seeds: 3,
            base_seed: 5,
            restarts: 4,
            linked: true,
            threads: Some(2),
            ..SweepConfig::default()
        }
    }

    #[test]
    fn rows_come_in_canonical_order() {
        let cfg = small();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.row_id, r);
            assert_eq!(row.grid_index * 3 + row.seed_index, r);
            assert_eq!(row.seed, task_seed(5, row.grid_index, row.seed_index));
            assert_eq!(row.opt_kind, Some("exact"));
            assert!(row.ratio.unwrap() >= 1.0 - 1e-9);
            assert!(row.linked_pairs.is_some());
        }
        assert_eq!((rows[0].n, rows[0].sigma), (8, Some(0.01)));
        assert_eq!((rows[3].n, rows[3].sigma), (8, Some(0.1)));
        assert_eq!((rows[6].n, rows[6].sigma), (9, Some(0.01)));
    }

    #[test]
    fn width_does_not_change_output() {
        let mut cfg = small();
        let a = run_sweep(&cfg).unwrap();
        cfg.threads = Some(1);
        assert_eq!(run_sweep(&cfg).unwrap(), a);
        assert_eq!(replay(&cfg, 7).unwrap(), a[7]);
        assert!(replay(&cfg, 12).is_err());
    }

    #[test]
    fn one_step_rows() {
        let cfg = SweepConfig {
            n: vec![10],
            model: Model::OneStep(vec![1.0, 4.0]),
            opt: OptMode::Bound,
            ..SweepConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].phi, Some(4.0));
        assert_eq!(rows[1].sigma, None);
        assert_eq!(rows[1].opt_kind, Some("bound"));
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let err = write_atomic(&path, |f| {
            f.write_all(b"partial")?;
            Err(validation("boom"))
        });
        assert!(err.is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
