//! Layered instance with a long 2-optimal tour under small perturbations.
//!
//! Points live in three blocks of `t+1` horizontal layers plus a cluster of
//! padding copies. Layer `i` of the left block has `p^{2i}+1` points spaced
//! `a_i = p^{2p−2i}/P` apart at height `y_i = c_0 + … + c_{i−1}`, where
//! `c_i = p^{2p−2i−1}/P` and `P = 3p^{2p}`, so every layer spans exactly 1/3.
//! The right block is the left one shifted by 2/3 and the middle block is the
//! interior of layer `t` shifted by 1/3. The padding points sit on the middle
//! block's point `C` and are threaded in by a 2-optimal path between its
//! neighbours `C_ℓ` and `C_r`.
//!
//! The designated tour snakes through the left block bottom to top (odd
//! layers left to right, even layers right to left), crosses the middle block
//! along layer `t`, snakes down the right block and closes along the bottom.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::mst_length_with;
use crate::geometry::{Metric, Point};
use crate::stochastic::{perturb, Instance};
use crate::tour::{max_violation, CostTable, Tour, Violation};

/// Largest padding cluster the path optimiser accepts.
pub const PADDING_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayeredParams {
    pub p: u32,
    pub t: u32,
    pub sigma: f64,
    #[serde(rename = "P")]
    pub big_p: f64,
    pub beta: f64,
}

fn pow(p: u32, e: u32) -> u64 {
    u64::from(p).pow(e)
}

impl LayeredParams {
    /// Validates `p` and picks `t` (the override, or the largest odd `t ≤ p`
    /// with `p^{2t+1} ≤ 1/(3σ)`).
    pub fn new(p: u32, sigma: f64, t_override: Option<u32>) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(invalid(format!("p must be an odd integer ≥ 3, got {p}")));
        }
        if p > 5 {
            return Err(Error::Budget {
                algorithm: "layered construction",
                n: p as usize,
                limit: 5,
            });
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma must be finite and nonnegative"));
        }
        let t = match t_override {
            Some(t) => {
                if t % 2 == 0 || t < 1 || t > p {
                    return Err(invalid(format!("t must be odd with 1 ≤ t ≤ p, got {t}")));
                }
                t
            }
            None => default_t(p, sigma)?,
        };
        let big_p = 3.0 * pow(p, 2 * p) as f64;
        let mut params = Self {
            p,
            t,
            sigma,
            big_p,
            beta: 0.0,
        };
        params.beta = params.a(t) / 8.0;
        Ok(params)
    }

    /// Horizontal spacing in layer `i`.
    pub fn a(&self, i: u32) -> f64 {
        pow(self.p, 2 * self.p - 2 * i) as f64 / self.big_p
    }

    /// Vertical gap between layers `i` and `i+1`.
    pub fn c(&self, i: u32) -> f64 {
        pow(self.p, 2 * self.p - 2 * i - 1) as f64 / self.big_p
    }

    /// Height of layer `i`.
    pub fn y(&self, i: u32) -> f64 {
        (0..i).map(|k| pow(self.p, 2 * self.p - 2 * k - 1)).sum::<u64>() as f64 / self.big_p
    }

    /// x-coordinate of the `k`-th point of layer `i` (left block).
    pub fn x(&self, i: u32, k: u64) -> f64 {
        (k * pow(self.p, 2 * self.p - 2 * i)) as f64 / self.big_p
    }

    /// Points per layer minus one: `p^{2i}`.
    pub fn segments(&self, i: u32) -> u64 {
        pow(self.p, 2 * i)
    }

    pub fn padding_count(&self) -> usize {
        pow(self.p, 2 * self.p) as usize - 1
    }

    /// Index of `C` within layer `t`.
    pub fn center_k(&self) -> u64 {
        (self.segments(self.t) - 1) / 2
    }

    fn block_len(&self) -> usize {
        (0..=self.t).map(|i| self.segments(i) as usize + 1).sum()
    }

    fn layer_offset(&self, i: u32) -> usize {
        (0..i).map(|l| self.segments(l) as usize + 1).sum()
    }

    /// Vertex id of point `k` of layer `i` in block 1 or 2.
    pub fn block_vertex(&self, block: Part, i: u32, k: u64) -> usize {
        let base = match block {
            Part::V1 => 0,
            Part::V2 => self.block_len(),
            _ => panic!("block_vertex takes V1 or V2"),
        };
        base + self.layer_offset(i) + k as usize
    }

    /// Vertex id of the middle-block point `k` (1 ≤ k < p^{2t}).
    pub fn middle_vertex(&self, k: u64) -> usize {
        2 * self.block_len() + k as usize - 1
    }

    fn padding_start(&self) -> usize {
        2 * self.block_len() + self.segments(self.t) as usize - 1
    }

    pub fn n(&self) -> usize {
        self.padding_start() + self.padding_count()
    }
}

/// Largest odd `t ≤ p` with `p^{2t+1} ≤ 1/(3σ)`, allowing a 1e−12 relative
/// slack so exact powers of `p` qualify.
pub fn default_t(p: u32, sigma: f64) -> Result<u32> {
    let limit = if sigma == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / (3.0 * sigma)) * (1.0 + 1e-12)
    };
    let best = (1..=p)
        .step_by(2)
        .filter(|&t| (pow(p, 2 * t + 1) as f64) <= limit)
        .max();
    best.ok_or_else(|| invalid(format!("sigma = {sigma} is too large for p = {p}: no odd t ≥ 1 fits")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    V1,
    V2,
    V3,
    Padding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub part: Part,
    pub layer: u32,
    /// Position within the layer; padding points carry `C`'s position.
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredInstance {
    /// Unperturbed: `points` equal `origins`.
    #[serde(flatten)]
    pub instance: Instance,
    pub labels: Vec<Label>,
    pub params: LayeredParams,
}

pub fn build_layered(p: u32, sigma: f64, t_override: Option<u32>) -> Result<LayeredInstance> {
    let params = LayeredParams::new(p, sigma, t_override)?;
    let t = params.t;
    let mut origins = Vec::with_capacity(params.n());
    let mut labels = Vec::with_capacity(params.n());
    for (part, shift) in [(Part::V1, 0.0), (Part::V2, 2.0 / 3.0)] {
        for i in 0..=t {
            let y = params.y(i);
            for k in 0..=params.segments(i) {
                origins.push(Point::from([params.x(i, k) + shift, y]));
                labels.push(Label { part, layer: i, k });
            }
        }
    }
    let yt = params.y(t);
    for k in 1..params.segments(t) {
        origins.push(Point::from([params.x(t, k) + 1.0 / 3.0, yt]));
        labels.push(Label {
            part: Part::V3,
            layer: t,
            k,
        });
    }
    let c = origins[params.middle_vertex(params.center_k())].clone();
    for _ in 0..params.padding_count() {
        origins.push(c.clone());
        labels.push(Label {
            part: Part::Padding,
            layer: t,
            k: params.center_k(),
        });
    }
    debug_assert_eq!(origins.len(), params.n());
    let instance = Instance::from_points(origins)?;
    Ok(LayeredInstance {
        instance,
        labels,
        params,
    })
}

impl LayeredInstance {
    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn origins(&self) -> &[Point] {
        &self.instance.origins
    }

    /// Gaussian perturbation of the origins with the construction's σ.
    pub fn perturb(&self, seed: u64) -> Result<Instance> {
        perturb(self.origins(), self.params.sigma, seed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses and checks the labels and coordinates against a fresh build.
    pub fn from_json(text: &str) -> Result<Self> {
        let li: Self = serde_json::from_str(text)?;
        li.instance.validate()?;
        let fresh = build_layered(li.params.p, li.params.sigma, Some(li.params.t))?;
        if fresh.labels != li.labels || fresh.origins() != li.origins() {
            return Err(invalid("layered instance does not match its parameters"));
        }
        Ok(li)
    }

    /// Vertices of the designated tour with `C`'s cluster left out; `C_ℓ`
    /// and `C_r` are adjacent in the returned sequence.
    fn skeleton(&self) -> Vec<usize> {
        let pr = &self.params;
        let t = pr.t;
        let mut order = Vec::with_capacity(pr.padding_start());
        let layer = |block: Part, i: u32, order: &mut Vec<usize>| {
            let s = pr.segments(i);
            if i % 2 == 1 {
                order.extend((0..=s).map(|k| pr.block_vertex(block, i, k)));
            } else {
                order.extend((0..=s).rev().map(|k| pr.block_vertex(block, i, k)));
            }
        };
        for i in 0..=t {
            layer(Part::V1, i, &mut order);
        }
        let ck = pr.center_k();
        order.extend((1..pr.segments(t)).filter(|&k| k != ck).map(|k| pr.middle_vertex(k)));
        for i in (0..=t).rev() {
            layer(Part::V2, i, &mut order);
        }
        order
    }

    /// `C` and its padding copies.
    fn cluster(&self) -> Vec<usize> {
        let pr = &self.params;
        std::iter::once(pr.middle_vertex(pr.center_k()))
            .chain(pr.padding_start()..pr.n())
            .collect()
    }

    fn c_neighbours(&self) -> (usize, usize) {
        let ck = self.params.center_k();
        (self.params.middle_vertex(ck - 1), self.params.middle_vertex(ck + 1))
    }
}

/// The designated tour on `perturbed`: the layered skeleton with a
/// 2-optimal `C_ℓ → C_r` path through the padding cluster spliced in.
pub fn build_long_tour(li: &LayeredInstance, perturbed: &Instance, path_2opt_eps: f64) -> Result<Tour> {
    check_correspondence(li, perturbed)?;
    if li.params.padding_count() > PADDING_LIMIT {
        return Err(Error::Budget {
            algorithm: "padding path 2-opt",
            n: li.params.padding_count(),
            limit: PADDING_LIMIT,
        });
    }
    let metric = Metric::Euclidean;
    let (cl, cr) = li.c_neighbours();
    let path = padding_path(perturbed, cl, cr, &li.cluster(), metric, path_2opt_eps);
    let mut order = Vec::with_capacity(li.n());
    for v in li.skeleton() {
        order.push(v);
        if v == cl {
            order.extend_from_slice(&path[1..path.len() - 1]);
        }
    }
    Tour::new(order, perturbed, metric)
}

fn check_correspondence(li: &LayeredInstance, perturbed: &Instance) -> Result<()> {
    if perturbed.n() != li.n() {
        return Err(invalid(format!(
            "perturbed instance has {} points, construction has {}",
            perturbed.n(),
            li.n()
        )));
    }
    if perturbed.origins != li.instance.origins {
        return Err(invalid("perturbed instance was not generated from these origins"));
    }
    Ok(())
}

/// Nearest-neighbour path from `start` through `inner` to `end`, improved by
/// 2-changes that keep both endpoints fixed until none gains more than `eps`.
fn padding_path(inst: &Instance, start: usize, end: usize, inner: &[usize], metric: Metric, eps: f64) -> Vec<usize> {
    let d = |a: usize, b: usize| metric.eval(inst.coords(a), inst.coords(b));
    let mut path = Vec::with_capacity(inner.len() + 2);
    path.push(start);
    let mut left: Vec<usize> = inner.to_vec();
    let mut cur = start;
    while !left.is_empty() {
        let (idx, _) = left
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| d(cur, a).total_cmp(&d(cur, b)).then(a.cmp(&b)))
            .expect("nonempty");
        cur = left.swap_remove(idx);
        path.push(cur);
    }
    path.push(end);

    let m = path.len();
    loop {
        let mut improved = false;
        for i in 0..m.saturating_sub(3) {
            let mut j = i + 2;
            while j + 1 < m {
                let (a, b, c, e) = (path[i], path[i + 1], path[j], path[j + 1]);
                let gain = (d(a, b) + d(c, e)) - (d(a, c) + d(b, e));
                if gain > eps {
                    path[i + 1..=j].reverse();
                    improved = true;
                }
                j += 1;
            }
        }
        if !improved {
            break;
        }
    }
    path
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainerCheck {
    pub passed: bool,
    /// Largest displacement divided by β.
    pub worst_ratio: f64,
    pub worst_index: usize,
}

/// Every perturbed point lies within β of its origin.
pub fn check_containers(li: &LayeredInstance, perturbed: &Instance) -> Result<ContainerCheck> {
    if perturbed.n() != li.n() {
        return Err(invalid("perturbed instance does not match the construction"));
    }
    let mut worst = (0.0, 0);
    for (j, (x, o)) in perturbed.points.iter().zip(li.origins()).enumerate() {
        let r = Metric::Euclidean.eval(&x.coords, &o.coords) / li.params.beta;
        if r > worst.0 {
            worst = (r, j);
        }
    }
    Ok(ContainerCheck {
        passed: worst.0 <= 1.0,
        worst_ratio: worst.0,
        worst_index: worst.1,
    })
}

/// All-pairs scan for the best improving 2-change; `None` iff the tour is
/// 2-optimal at tolerance `eps`.
pub fn certify_two_optimality(points: &Instance, tour: &Tour, metric: Metric, eps: f64) -> Result<Option<Violation>> {
    if tour.len() != points.n() {
        return Err(invalid("tour and instance sizes differ"));
    }
    let costs = CostTable::new(points, metric);
    Ok(max_violation(tour.order(), &costs, eps))
}

/// `L(tour) / (2·MST)`, a lower bound on the ratio between the longest
/// 2-optimal tour and the optimum.
pub fn ratio_lower_bound(li: &LayeredInstance, perturbed: &Instance, tour: &Tour) -> Result<f64> {
    check_correspondence(li, perturbed)?;
    if tour.len() != perturbed.n() {
        return Err(invalid("tour and instance sizes differ"));
    }
    let mst = mst_length_with(&CostTable::new(perturbed, tour.metric()));
    Ok(tour.length() / (2.0 * mst))
}
