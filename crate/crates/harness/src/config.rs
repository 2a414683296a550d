//! Sweep configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment. List values are
//! comma-separated and integer lists accept inclusive ranges `a..b`.
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `n` | integer list | required |
//! | `sigma` | real list | `0` unless `phi` is set |
//! | `phi` | real list (one-step model) | unset |
//! | `dim` | integer list | `2` |
//! | `metric` | `l1`, `l2`, `l2sq` | `l2` |
//! | `pivot` | `first`, `best`, `random` | `first` |
//! | `init` | `random`, `nn`, `greedy` | `random` |
//! | `origins` | `uniform`, `grid`, `single-point`, `file:PATH` | `uniform` |
//! | `seeds` | seeds per grid point | `1` |
//! | `seed` | base seed | `0` |
//! | `restarts` | 2-opt restarts for the longest-local-optimum estimate | `0` |
//! | `eps` | improvement tolerance | `1e-12` |
//! | `max_iter` | iteration cap per run | unlimited |
//! | `opt` | `auto`, `exact`, `bound`, `none` | `auto` |
//! | `delta_min` | `true`/`false` | `false` |
//! | `linked` | `true`/`false` | `false` |
//! | `paired` | `true`/`false`: share each seed index's draws across the σ/φ axis | `false` |
//! | `threads` | worker count | all cores or `TWOPT_THREADS` |
//! | `output` | CSV path | unset |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use twopt_core::{InitRule, Metric, PivotRule};

use crate::error::{validation, Result};

/// How a run's origins are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OriginSource {
    Uniform,
    Grid,
    SinglePoint,
    File(PathBuf),
}

impl OriginSource {
    pub fn as_string(&self) -> String {
        match self {
            Self::Uniform => "uniform".into(),
            Self::Grid => "grid".into(),
            Self::SinglePoint => "single-point".into(),
            Self::File(p) => format!("file:{}", p.display()),
        }
    }
}

impl FromStr for OriginSource {
    type Err = crate::HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "grid" => Ok(Self::Grid),
            "single-point" | "single_point" => Ok(Self::SinglePoint),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Self::File(PathBuf::from(path))),
                _ => Err(validation(format!("unknown origin source {s:?}"))),
            },
        }
    }
}

/// Which reference length the ratio column uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMode {
    /// Held-Karp when n ≤ 20, otherwise the 2·MST bound.
    Auto,
    Exact,
    Bound,
    None,
}

impl FromStr for OptMode {
    type Err = crate::HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "bound" => Ok(Self::Bound),
            "none" => Ok(Self::None),
            _ => Err(validation(format!("unknown opt mode {s:?}"))),
        }
    }
}

/// The perturbation model axis: Gaussian σ values or one-step φ values.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Gaussian(Vec<f64>),
    OneStep(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub model: Model,
    pub dim: Vec<usize>,
    pub metric: Vec<Metric>,
    pub pivot: Vec<PivotRule>,
    pub init: Vec<InitRule>,
    pub origins: Vec<OriginSource>,
    pub seeds: usize,
    pub base_seed: u64,
    pub restarts: usize,
    pub eps: f64,
    pub max_iter: Option<u64>,
    pub opt: OptMode,
    pub delta_min: bool,
    pub linked: bool,
    /// Seed depends on the seed index and the non-model coordinates only.
    pub paired: bool,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: vec![10],
            model: Model::Gaussian(vec![0.0]),
            dim: vec![2],
            metric: vec![Metric::Euclidean],
            pivot: vec![PivotRule::First],
            init: vec![InitRule::Random],
            origins: vec![OriginSource::Uniform],
            seeds: 1,
            base_seed: 0,
            restarts: 0,
            eps: twopt_core::DEFAULT_EPS,
            max_iter: None,
            opt: OptMode::Auto,
            delta_min: false,
            linked: false,
            paired: false,
            threads: None,
            output: None,
        }
    }
}

const KEYS: &[&str] = &[
    "n",
    "sigma",
    "phi",
    "dim",
    "metric",
    "pivot",
    "init",
    "origins",
    "seeds",
    "seed",
    "restarts",
    "eps",
    "max_iter",
    "opt",
    "delta_min",
    "linked",
    "paired",
    "threads",
    "output",
];

fn list<T, F>(key: &str, value: &str, parse: F) -> Result<Vec<T>>
where
    F: Fn(&str) -> Result<T>,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(&parse)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(validation(format!("{key}: empty list")));
    }
    Ok(items)
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| validation(format!("{key}: cannot parse {value:?}")))
}

/// Integer list with inclusive ranges, e.g. `8..12,20`.
fn int_list(key: &str, value: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (scalar(key, a)?, scalar(key, b)?);
                if a > b {
                    return Err(validation(format!("{key}: empty range {item}")));
                }
                out.extend(a..=b);
            }
            None => out.push(scalar(key, item)?),
        }
    }
    if out.is_empty() {
        return Err(validation(format!("{key}: empty list")));
    }
    Ok(out)
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(validation(format!("{key}: expected true or false, got {other:?}"))),
    }
}

fn core_err(key: &str) -> impl Fn(twopt_core::Error) -> crate::HarnessError + '_ {
    move |e| validation(format!("{key}: {e}"))
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| validation(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(validation(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(validation(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }

        let mut cfg = SweepConfig::default();
        let get = |k: &str| entries.get(k).map(String::as_str);
        cfg.n = int_list("n", get("n").ok_or_else(|| validation("missing key n"))?)?;
        cfg.model = match (get("sigma"), get("phi")) {
            (Some(_), Some(_)) => return Err(validation("sigma and phi are mutually exclusive")),
            (Some(s), None) => Model::Gaussian(list("sigma", s, |v| scalar("sigma", v))?),
            (None, Some(p)) => Model::OneStep(list("phi", p, |v| scalar("phi", v))?),
            (None, None) => Model::Gaussian(vec![0.0]),
        };
        if let Some(v) = get("dim") {
            cfg.dim = int_list("dim", v)?;
        }
        if let Some(v) = get("metric") {
            cfg.metric = list("metric", v, |s| s.parse().map_err(core_err("metric")))?;
        }
        if let Some(v) = get("pivot") {
            cfg.pivot = list("pivot", v, |s| s.parse().map_err(core_err("pivot")))?;
        }
        if let Some(v) = get("init") {
            cfg.init = list("init", v, |s| s.parse().map_err(core_err("init")))?;
        }
        if let Some(v) = get("origins") {
            cfg.origins = list("origins", v, str::parse)?;
        }
        if let Some(v) = get("seeds") {
            cfg.seeds = scalar("seeds", v)?;
        }
        if let Some(v) = get("seed") {
            cfg.base_seed = scalar("seed", v)?;
        }
        if let Some(v) = get("restarts") {
            cfg.restarts = scalar("restarts", v)?;
        }
        if let Some(v) = get("eps") {
            cfg.eps = scalar("eps", v)?;
        }
        if let Some(v) = get("max_iter") {
            cfg.max_iter = Some(scalar("max_iter", v)?);
        }
        if let Some(v) = get("opt") {
            cfg.opt = v.parse()?;
        }
        if let Some(v) = get("delta_min") {
            cfg.delta_min = boolean("delta_min", v)?;
        }
        if let Some(v) = get("linked") {
            cfg.linked = boolean("linked", v)?;
        }
        if let Some(v) = get("paired") {
            cfg.paired = boolean("paired", v)?;
        }
        if let Some(v) = get("threads") {
            cfg.threads = Some(scalar("threads", v)?);
        }
        if let Some(v) = get("output") {
            cfg.output = Some(PathBuf::from(v));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.iter().any(|&n| n < 4) {
            return Err(validation("n: every instance needs at least 4 points"));
        }
        if self.dim.contains(&0) {
            return Err(validation("dim: must be ≥ 1"));
        }
        match &self.model {
            Model::Gaussian(s) if s.is_empty() || s.iter().any(|&x| !(0.0..=1.0).contains(&x)) => {
                return Err(validation("sigma: values must lie in [0, 1]"));
            }
            Model::OneStep(p) if p.is_empty() || p.iter().any(|&x| !(x >= 1.0 && x.is_finite())) => {
                return Err(validation("phi: values must be ≥ 1"));
            }
            _ => {}
        }
        if self.dim.is_empty()
            || self.metric.is_empty()
            || self.pivot.is_empty()
            || self.init.is_empty()
            || self.origins.is_empty()
        {
            return Err(validation("every grid must be nonempty"));
        }
        if self.seeds == 0 {
            return Err(validation("seeds: must be ≥ 1"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(validation("eps: must be finite and nonnegative"));
        }
        if self.threads == Some(0) {
            return Err(validation("threads: must be ≥ 1"));
        }
        if self.opt == OptMode::Exact && self.n.iter().any(|&n| n > twopt_core::exact::HELD_KARP_LIMIT) {
            return Err(validation("opt = exact needs n ≤ 20"));
        }
        Ok(())
    }

    /// Model-axis values (σ or φ).
    pub fn model_values(&self) -> &[f64] {
        match &self.model {
            Model::Gaussian(v) | Model::OneStep(v) => v,
        }
    }

    pub fn is_one_step(&self) -> bool {
        matches!(self.model, Model::OneStep(_))
    }

    /// Number of grid points.
    pub fn points(&self) -> usize {
        self.n.len()
            * self.model_values().len()
            * self.dim.len()
            * self.metric.len()
            * self.pivot.len()
            * self.init.len()
            * self.origins.len()
    }

    pub fn rows(&self) -> usize {
        self.points() * self.seeds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_ranges_and_defaults() {
        let cfg = SweepConfig::parse(
            "# grid\n n = 8..10, 20\nsigma = 0.01,0.1\nmetric = l1, l2sq\npivot=best\nseeds = 3\nseed = 9\nlinked = true\n",
        )
        .unwrap();
        assert_eq!(cfg.n, vec![8, 9, 10, 20]);
        assert_eq!(cfg.model, Model::Gaussian(vec![0.01, 0.1]));
        assert_eq!(cfg.metric, vec![Metric::Manhattan, Metric::SquaredEuclidean]);
        assert_eq!(cfg.pivot, vec![PivotRule::Best]);
        assert_eq!(cfg.init, vec![InitRule::Random]);
        assert_eq!((cfg.seeds, cfg.base_seed, cfg.linked), (3, 9, true));
        assert_eq!(cfg.points(), 4 * 2 * 2);
        assert_eq!(cfg.rows(), 48);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "n = 10\nbogus = 1",
            "sigma = 0.1",
            "n = 10\nsigma = 0.1\nphi = 2",
            "n = 10\nn = 12",
            "n = 12..10",
            "n = 10\nmetric = l3",
            "n = 10\nseeds = 0",
            "n = 10\nsigma = 2",
            "n = 10\nphi = 0.5",
            "n = 30\nopt = exact",
            "n = 10\norigins = file:",
            "n = 10\ndelta_min = maybe",
            "n = ",
            "just text",
        ] {
            assert!(SweepConfig::parse(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn origin_sources_round_trip() {
        for s in ["uniform", "grid", "single-point", "file:/tmp/x.json"] {
            assert_eq!(s.parse::<OriginSource>().unwrap().as_string(), s);
        }
    }
}
