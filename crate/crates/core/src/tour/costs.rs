use crate::geometry::Metric;
use crate::stochastic::Instance;

/// Instances up to this size get a dense distance table.
pub const DENSE_LIMIT: usize = 2048;

/// Symmetric edge costs of an instance under one metric.
///
/// The dense and lazy variants evaluate the same expression, so both return
/// bit-identical values for every pair.
#[derive(Debug, Clone)]
pub enum CostTable {
    Dense {
        n: usize,
        data: Vec<f64>,
    },
    Lazy {
        n: usize,
        dim: usize,
        metric: Metric,
        flat: Vec<f64>,
    },
}

impl CostTable {
    pub fn new(inst: &Instance, metric: Metric) -> Self {
        if inst.n() <= DENSE_LIMIT {
            Self::dense(inst, metric)
        } else {
            Self::lazy(inst, metric)
        }
    }

    pub fn dense(inst: &Instance, metric: Metric) -> Self {
        let n = inst.n();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.eval(inst.coords(i), inst.coords(j));
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        CostTable::Dense { n, data }
    }

    pub fn lazy(inst: &Instance, metric: Metric) -> Self {
        let flat = inst.points.iter().flat_map(|p| p.coords.iter().copied()).collect();
        CostTable::Lazy {
            n: inst.n(),
            dim: inst.dim,
            metric,
            flat,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CostTable::Dense { n, .. } | CostTable::Lazy { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            CostTable::Dense { n, data } => data[i * n + j],
            CostTable::Lazy { dim, metric, flat, .. } => {
                if i == j {
                    return 0.0;
                }
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                metric.eval(&flat[a * dim..(a + 1) * dim], &flat[b * dim..(b + 1) * dim])
            }
        }
    }

    pub fn cycle_length(&self, order: &[usize]) -> f64 {
        let n = order.len();
        (0..n).map(|k| self.get(order[k], order[(k + 1) % n])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::uniform_origins;

    #[test]
    fn dense_and_lazy_agree_bitwise() {
        let inst = Instance::from_points(uniform_origins(40, 3, 9)).unwrap();
        for m in Metric::ALL {
            let d = CostTable::dense(&inst, m);
            let l = CostTable::lazy(&inst, m);
            for i in 0..40 {
                for j in 0..40 {
                    assert_eq!(d.get(i, j).to_bits(), l.get(i, j).to_bits());
                }
            }
        }
    }
}
