//! Command-line interface of the `twopt` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use twopt_core::exact::{brute_force, held_karp};
use twopt_core::lower_bound::{
    build_layered, build_long_tour, certify_two_optimality, check_containers, ratio_lower_bound, LayeredInstance,
};
use twopt_core::stochastic::{one_step_sample, perturb, OneStepSpec};
use twopt_core::tour::{run_two_opt, RunConfig};
use twopt_core::{InitRule, Instance, Metric, PivotRule};

use crate::config::{OriginSource, SweepConfig};
use crate::error::{validation, HarnessError, Result};
use crate::fit::{group_means, linear_fit, loglog_fit};
use crate::ratio::{run_ratio, RatioConfig};
use crate::sweep::{make_origins, read_table, replay, sweep_to_path, write_atomic, write_rows};
use crate::verify::{verify_suite, Suite};

#[derive(Debug, Parser)]
#[command(
    name = "twopt",
    version,
    about = "2-opt experiments on perturbed Euclidean instances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance (origins plus Gaussian or one-step noise) as JSON.
    Gen(GenArgs),
    /// Run 2-opt on an instance and write the run record as JSON.
    Run(RunArgs),
    /// Solve an instance exactly.
    Exact(ExactArgs),
    /// Longest 2-opt local optimum over restarts versus Held-Karp, across σ.
    Ratio(RatioArgs),
    /// Layered lower-bound construction.
    #[command(subcommand)]
    Lb(LbCommand),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Run a parameter sweep from a config file and write CSV.
    Sweep(SweepArgs),
    /// Recompute one row of a sweep.
    Replay(ReplayArgs),
    /// Tidy per-x means of sweep columns for external plotting.
    PlotData(PlotDataArgs),
    /// Least-squares fit of per-x means of two sweep columns.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// One-step model density bound; replaces Gaussian noise.
    #[arg(long, conflicts_with = "sigma")]
    pub phi: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub origins: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "l2")]
    pub metric: Metric,
    #[arg(long, default_value = "random")]
    pub init: InitRule,
    #[arg(long, default_value = "first")]
    pub pivot: PivotRule,
    #[arg(long, default_value_t = twopt_core::DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iter: Option<u64>,
    #[arg(long)]
    pub record_changes: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// `heldkarp` or `brute`.
    #[arg(long, default_value = "heldkarp")]
    pub algo: String,
    #[arg(long, default_value = "l2")]
    pub metric: Metric,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma_grid: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub origins: String,
    #[arg(long, default_value = "l2")]
    pub metric: Metric,
    #[arg(long, default_value = "first")]
    pub pivot: PivotRule,
    /// Draw fresh instances at every σ instead of sharing them per seed index.
    #[arg(long)]
    pub unpaired: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum LbCommand {
    /// Build the layered instance (origins only) as JSON.
    Build {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Perturb, build the designated tour and check it for improving 2-changes.
    Certify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = twopt_core::DEFAULT_EPS)]
        eps: f64,
        /// Perturbation seed; without it the origins are used as they are.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-15)]
        path_eps: f64,
    },
    /// Tour length over twice the spanning-tree weight.
    Ratio {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-15)]
        path_eps: f64,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub row_id: usize,
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotDataArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub y: Vec<String>,
    /// Column whose values split the output into series.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Fit y against x directly instead of ln y against ln x.
    #[arg(long)]
    pub linear: bool,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, |f| {
            f.write_all(text.as_bytes())?;
            f.write_all(b"\n")?;
            Ok(())
        }),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run_cmd(a),
        Command::Exact(a) => exact(a),
        Command::Ratio(a) => ratio(a),
        Command::Lb(c) => lb(c),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Replay(a) => {
            let cfg = SweepConfig::load(&a.config)?;
            let row = replay(&cfg, a.row_id)?;
            let mut buf = Vec::new();
            write_rows(std::slice::from_ref(&row), &mut buf)?;
            io::stdout().write_all(&buf)?;
            Ok(())
        }
        Command::PlotData(a) => plot_data(a),
        Command::Fit(a) => fit(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let inst = match a.phi {
        Some(phi) => {
            let spec = OneStepSpec::random_cells(phi, a.dim, a.n, a.seed)?;
            one_step_sample(&spec, a.n, a.seed)?
        }
        None => {
            let source: OriginSource = a.origins.parse()?;
            let origins = make_origins(&source, a.n, a.dim, a.seed)?;
            perturb(&origins, a.sigma, a.seed)?
        }
    };
    emit(a.output.as_deref(), &inst.to_json()?)
}

fn run_cmd(a: RunArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let cfg = RunConfig {
        metric: a.metric,
        init: a.init,
        pivot: a.pivot,
        eps: a.eps,
        seed: a.seed,
        max_iter: a.max_iter.unwrap_or(u64::MAX),
        record_changes: a.record_changes,
    };
    let rec = run_two_opt(&inst, &cfg)?;
    emit(a.output.as_deref(), &serde_json::to_string(&rec)?)
}

fn exact(a: ExactArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let res = match a.algo.as_str() {
        "heldkarp" | "held_karp" => held_karp(&inst, a.metric)?,
        "brute" | "brute_force" => brute_force(&inst, a.metric)?,
        other => return Err(validation(format!("unknown algorithm {other:?}"))),
    };
    emit(a.output.as_deref(), &serde_json::to_string(&res)?)
}

fn ratio(a: RatioArgs) -> Result<()> {
    let cfg = RatioConfig {
        n: a.n,
        sigmas: a.sigma_grid,
        restarts: a.restarts,
        seeds: a.seeds,
        base_seed: a.seed,
        origins: a.origins.parse()?,
        metric: a.metric,
        pivot: a.pivot,
        paired: !a.unpaired,
        threads: a.threads,
    };
    let (rows, summary) = run_ratio(&cfg)?;
    write_atomic(&a.output, |f| write_rows(&rows, f))?;
    emit(None, &pretty(&summary)?)?;
    if summary.min_ratio < 1.0 - 1e-9 {
        return Err(HarnessError::Verification(format!(
            "ratio {} below the exact optimum",
            summary.min_ratio
        )));
    }
    Ok(())
}

fn layered_points(li: &LayeredInstance, seed: Option<u64>) -> Result<Instance> {
    Ok(match seed {
        Some(s) => li.perturb(s)?,
        None => li.instance.clone(),
    })
}

fn lb(c: LbCommand) -> Result<()> {
    match c {
        LbCommand::Build { p, t, sigma, output } => {
            let li = build_layered(p, sigma, t)?;
            emit(output.as_deref(), &li.to_json()?)
        }
        LbCommand::Certify {
            instance,
            eps,
            seed,
            path_eps,
        } => {
            let li = LayeredInstance::from_json(&fs::read_to_string(&instance)?)?;
            let x = layered_points(&li, seed)?;
            let containers = check_containers(&li, &x)?;
            let tour = build_long_tour(&li, &x, path_eps)?;
            let violation = certify_two_optimality(&x, &tour, Metric::Euclidean, eps)?;
            let report = json!({
                "n": li.n(),
                "p": li.params.p,
                "t": li.params.t,
                "sigma": li.params.sigma,
                "seed": seed,
                "eps": eps,
                "containers": containers,
                "tour_length": tour.length(),
                "two_optimal": violation.is_none(),
                "violation": violation.map(|v| json!({
                    "positions": [v.positions.0, v.positions.1],
                    "change": v.change,
                })),
            });
            emit(None, &pretty(&report)?)?;
            if violation.is_some() {
                return Err(HarnessError::Verification(
                    "designated tour has an improving 2-change".into(),
                ));
            }
            Ok(())
        }
        LbCommand::Ratio {
            instance,
            seed,
            path_eps,
        } => {
            let li = LayeredInstance::from_json(&fs::read_to_string(&instance)?)?;
            let x = layered_points(&li, seed)?;
            let tour = build_long_tour(&li, &x, path_eps)?;
            let r = ratio_lower_bound(&li, &x, &tour)?;
            let report = json!({
                "n": li.n(),
                "p": li.params.p,
                "t": li.params.t,
                "seed": seed,
                "tour_length": tour.length(),
                "ratio_lower_bound": r,
            });
            emit(None, &pretty(&report)?)
        }
    }
}

fn verify(a: VerifyArgs) -> Result<()> {
    let report = verify_suite(a.suite, a.samples, a.seed)?;
    if a.json {
        emit(None, &pretty(&report)?)?;
    } else {
        emit(None, &report.to_string())?;
    }
    if !report.passed() {
        return Err(HarnessError::Verification(format!("suite {} failed", a.suite)));
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::load(&a.config)?;
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    let path = a
        .output
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| validation("no output path: pass -o or set output in the config"))?;
    let rows = sweep_to_path(&cfg, &path)?;
    eprintln!("wrote {rows} rows to {}", path.display());
    Ok(())
}

fn numeric_columns(path: &Path, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = read_table(path)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in &table {
        let get = |k: &str| -> Result<Option<f64>> {
            match row.get(k) {
                None => Err(validation(format!("no column {k:?}"))),
                Some(v) if v.is_empty() => Ok(None),
                Some(v) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| validation(format!("column {k:?}: not a number: {v:?}"))),
            }
        };
        if let (Some(a), Some(b)) = (get(x)?, get(y)?) {
            xs.push(a);
            ys.push(b);
        }
    }
    Ok((xs, ys))
}

fn plot_data(a: PlotDataArgs) -> Result<()> {
    let table = read_table(&a.input)?;
    let groups: Vec<String> = match &a.group {
        Some(g) => table
            .iter()
            .map(|r| r.get(g).cloned().ok_or_else(|| validation(format!("no column {g:?}"))))
            .collect::<Result<_>>()?,
        None => vec![String::new(); table.len()],
    };
    let mut keys = groups.clone();
    keys.sort();
    keys.dedup();

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["group", "x", "variable", "mean", "se", "count"])?;
        for key in &keys {
            for var in &a.y {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for (row, g) in table.iter().zip(&groups) {
                    if g != key {
                        continue;
                    }
                    let (Some(xv), Some(yv)) = (row.get(&a.x), row.get(var)) else {
                        return Err(validation(format!("missing column {:?} or {var:?}", a.x)));
                    };
                    if let (Ok(xv), Ok(yv)) = (xv.parse::<f64>(), yv.parse::<f64>()) {
                        xs.push(xv);
                        ys.push(yv);
                    }
                }
                for m in group_means(&xs, &ys) {
                    w.write_record([
                        key.clone(),
                        m.x.to_string(),
                        var.clone(),
                        m.mean.to_string(),
                        m.se.to_string(),
                        m.count.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    match a.output {
        Some(path) => write_atomic(&path, |f| Ok(f.write_all(&buf)?)),
        None => Ok(io::stdout().write_all(&buf)?),
    }
}

fn fit(a: FitArgs) -> Result<()> {
    let (xs, ys) = numeric_columns(&a.input, &a.x, &a.y)?;
    let means = group_means(&xs, &ys);
    let mx: Vec<f64> = means.iter().map(|g| g.x).collect();
    let my: Vec<f64> = means.iter().map(|g| g.mean).collect();
    let f = if a.linear {
        linear_fit(&mx, &my)?
    } else {
        loglog_fit(&mx, &my)?
    };
    let report = json!({
        "x": a.x,
        "y": a.y,
        "kind": if a.linear { "linear" } else { "log-log" },
        "points": means.len(),
        "slope": f.slope,
        "intercept": f.intercept,
        "r2": f.r2,
    });
    emit(None, &pretty(&report)?)
}
