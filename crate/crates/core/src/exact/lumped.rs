//! Lumped chains for highly symmetric instances.
//!
//! When the classes of a partition are the orbits of the automorphisms that
//! fix the initial state, the law at time `t` is uniform on each class, so the
//! class occupation probabilities determine the distance to stationarity
//! exactly. Lumpability is checked on a few members of every class.

use super::generator::for_each_transition;
use super::{mixing_time_of, DistanceProfile, ProcessKind, SparseGenerator, StateSpace, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Members per class whose aggregated rates must agree.
const LUMP_CHECK: usize = 4;

#[derive(Debug, Clone)]
pub struct LumpedChain {
    generator: SparseGenerator,
    class_sizes: Vec<usize>,
    total: usize,
    start: usize,
}

impl LumpedChain {
    /// Lump the chain of `kind` on `g` along `classify`; `start` is the
    /// initial state, whose class is the starting point of [`Self::law`].
    pub fn new(
        g: &WeightedGraph,
        kind: ProcessKind,
        start: &[usize],
        classify: impl Fn(&[u32]) -> u64,
        cap: usize,
    ) -> Result<Self> {
        let space = StateSpace::enumerate(g.n(), kind, start.len(), cap)?;
        let start_idx = space
            .index_of(start)
            .ok_or_else(|| Error::InvalidTuple(format!("{start:?} is not a state")))?;
        // dense class ids in order of first appearance
        let mut labels: Vec<u64> = Vec::new();
        let mut class_of = Vec::with_capacity(space.len());
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        for (i, s) in space.iter().enumerate() {
            let raw = classify(s);
            let c = match labels.iter().position(|&l| l == raw) {
                Some(c) => c,
                None => {
                    labels.push(raw);
                    members.push(Vec::new());
                    sizes.push(0);
                    labels.len() - 1
                }
            };
            class_of.push(c);
            sizes[c] += 1;
            if members[c].len() < LUMP_CHECK {
                members[c].push(i);
            }
        }
        let nc = labels.len();
        let mut occ = vec![None; g.n()];
        let mut buf = vec![0u32; space.k()];
        let mut rows = Vec::with_capacity(nc);
        for (c, ms) in members.iter().enumerate() {
            let mut reference: Option<Vec<f64>> = None;
            for &i in ms {
                let mut agg = vec![0.0; nc];
                for_each_transition(g, kind, space.state(i), &mut occ, &mut buf, |t, w| {
                    let j = space.index_of_u32(t).expect("state in space");
                    agg[class_of[j]] += w;
                });
                match &reference {
                    None => reference = Some(agg),
                    Some(r) => {
                        if r.iter().zip(&agg).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs())) {
                            return Err(Error::Numerical(format!("partition is not lumpable at class {c}")));
                        }
                    }
                }
            }
            let agg = reference.expect("classes are non-empty");
            rows.push(agg.into_iter().enumerate().filter(|&(j, _)| j != c).collect());
        }
        Ok(LumpedChain {
            generator: SparseGenerator::from_rows(rows, None),
            class_sizes: sizes,
            total: space.len(),
            start: class_of[start_idx],
        })
    }

    /// Interchange process with two labelled particles on the complete graph
    /// `K_n`, started from `(0, 1)`: seven classes.
    pub fn complete_ip2(n: usize, cap: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::GraphTooSmall(n));
        }
        let g = WeightedGraph::generate(&crate::graph::GraphKind::Complete { n }, 0)?;
        let role = |v: u32| u64::from(v.min(2));
        LumpedChain::new(&g, ProcessKind::IpK, &[0, 1], |s| role(s[0]) * 3 + role(s[1]), cap)
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn generator(&self) -> &SparseGenerator {
        &self.generator
    }

    /// Class occupation probabilities at time `t`.
    pub fn law(&self, t: f64) -> Vec<f64> {
        let mut p0 = vec![0.0; self.num_classes()];
        p0[self.start] = 1.0;
        self.generator.propagate(&p0, t, DEFAULT_TOL)
    }

    /// Mixing time from the start state; for a vertex-transitive instance
    /// this is the worst-case mixing time.
    pub fn mixing_time(&self, eps: f64, time_tol: f64) -> Result<f64> {
        mixing_time_of(self, eps, time_tol)
    }
}

impl DistanceProfile for LumpedChain {
    fn distance(&self, t: f64) -> f64 {
        let total = self.total as f64;
        self.law(t)
            .iter()
            .zip(&self.class_sizes)
            .map(|(p, &s)| (p - s as f64 / total).max(0.0))
            .sum::<f64>()
            .min(1.0)
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.generator.lambda()
    }
}
