use super::{SparseGenerator, SpectralPropagator, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Two independent walkers killed when they meet, on ordered pairs of
/// distinct vertices.
#[derive(Debug, Clone)]
pub struct MeetingChain {
    n: usize,
    generator: SparseGenerator,
}

impl MeetingChain {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.n();
        let mut rows = Vec::with_capacity(n * (n - 1));
        let mut kill = Vec::with_capacity(n * (n - 1));
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let mut row = Vec::new();
                let mut leak = 0.0;
                for inc in g.adjacency(a) {
                    if inc.neighbor == b {
                        leak += inc.weight;
                    } else {
                        row.push((Self::pair_index(n, inc.neighbor, b), inc.weight));
                    }
                }
                for inc in g.adjacency(b) {
                    if inc.neighbor == a {
                        leak += inc.weight;
                    } else {
                        row.push((Self::pair_index(n, a, inc.neighbor), inc.weight));
                    }
                }
                rows.push(row);
                kill.push(leak);
            }
        }
        MeetingChain {
            n,
            generator: SparseGenerator::from_rows(rows, Some(&kill)),
        }
    }

    /// Position of `(a, b)`, `a != b`, in row-major order with the diagonal
    /// removed.
    pub fn pair_index(n: usize, a: usize, b: usize) -> usize {
        debug_assert!(a != b);
        a * (n - 1) + if b > a { b - 1 } else { b }
    }

    pub fn generator(&self) -> &SparseGenerator {
        &self.generator
    }

    /// `P[M(a, b) > t]` by uniformization.
    pub fn tail(&self, a: usize, b: usize, t: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let mut p0 = vec![0.0; self.generator.dim()];
        p0[Self::pair_index(self.n, a, b)] = 1.0;
        let p = self.generator.propagate(&p0, t, DEFAULT_TOL);
        p.iter().sum::<f64>().clamp(0.0, 1.0)
    }

    /// `P[M(x) > t]` for every ordered pair, as an `n x n` row-major table
    /// with zeros on the diagonal.
    pub fn all_tails(&self, t: f64) -> Result<Vec<f64>> {
        let sp = SpectralPropagator::new(&self.generator)?;
        let surv = sp.survival(t);
        let mut out = vec![0.0; self.n * self.n];
        for a in 0..self.n {
            for b in 0..self.n {
                if a != b {
                    out[a * self.n + b] = surv[Self::pair_index(self.n, a, b)];
                }
            }
        }
        Ok(out)
    }
}

/// `P[M(x) > t]` for the meeting time of two independent walkers from `x`.
pub fn meeting_time_tail(g: &WeightedGraph, x: (usize, usize), t: f64) -> Result<f64> {
    let n = g.n();
    if x.0 >= n || x.1 >= n {
        return Err(Error::IndexOutOfRange {
            index: x.0.max(x.1),
            size: n,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("t must be non-negative".into()));
    }
    Ok(MeetingChain::new(g).tail(x.0, x.1, t))
}
