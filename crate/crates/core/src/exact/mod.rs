//! Exact oracles for small instances.
//!
//! State spaces of `RW(G)`, `RW(k, G)`, `EX(k, G)` and `IP(k, G)` are
//! enumerated in lexicographic order, their generators are assembled as
//! sparse rate matrices, and transition laws are computed by uniformization.
//! Mixing times come from bracketing and bisection on the worst-case total
//! variation distance, which is non-increasing in time.

pub(crate) mod generator;
pub mod lumped;
mod meeting;
mod spectral;

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::par;

pub use generator::SparseGenerator;
pub use meeting::{meeting_time_tail, MeetingChain};
pub use spectral::SpectralPropagator;

/// Default cap on enumerated state-space size.
pub const DEFAULT_STATE_CAP: usize = 200_000;
/// Default uniformization truncation tolerance (L1).
pub const DEFAULT_TOL: f64 = 1e-13;
/// Default bisection tolerance of [`mixing_time`].
pub const DEFAULT_TIME_TOL: f64 = 1e-6;
/// Largest dimension for which mixing times use a dense eigendecomposition.
pub const SPECTRAL_LIMIT: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// One random walker; `k` is forced to 1.
    Rw,
    /// `k` independent walkers on `V^k`.
    RwK,
    /// Symmetric exclusion on `k`-subsets.
    ExK,
    /// Interchange process on `k`-tuples of distinct vertices.
    IpK,
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::Rw => "rw",
            ProcessKind::RwK => "rw_k",
            ProcessKind::ExK => "ex_k",
            ProcessKind::IpK => "ip_k",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rw" => ProcessKind::Rw,
            "rw_k" | "rwk" => ProcessKind::RwK,
            "ex_k" | "ex" => ProcessKind::ExK,
            "ip_k" | "ip" => ProcessKind::IpK,
            _ => return Err(Error::InvalidArgument(format!("unknown process kind `{s}`"))),
        })
    }
}

/// Enumerated states in canonical lexicographic order.
#[derive(Debug, Clone)]
pub struct StateSpace {
    kind: ProcessKind,
    n: usize,
    k: usize,
    states: Vec<u32>,
    index: HashMap<Box<[u32]>, usize>,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.n == other.n && self.k == other.k
    }
}

/// Exact cardinality of the state space, or `None` on overflow.
pub fn state_count(kind: ProcessKind, n: usize, k: usize) -> Option<u128> {
    let (n, k) = (n as u128, k as u128);
    match kind {
        ProcessKind::Rw => Some(n),
        ProcessKind::RwK => {
            let mut c: u128 = 1;
            for _ in 0..k {
                c = c.checked_mul(n)?;
            }
            Some(c)
        }
        ProcessKind::ExK => {
            if k > n {
                return Some(0);
            }
            let k = k.min(n - k);
            let mut c: u128 = 1;
            for i in 0..k {
                c = c.checked_mul(n - i)? / (i + 1);
            }
            Some(c)
        }
        ProcessKind::IpK => {
            if k > n {
                return Some(0);
            }
            let mut c: u128 = 1;
            for i in 0..k {
                c = c.checked_mul(n - i)?;
            }
            Some(c)
        }
    }
}

impl StateSpace {
    pub fn enumerate(n: usize, kind: ProcessKind, k: usize, cap: usize) -> Result<Self> {
        let k = if kind == ProcessKind::Rw { 1 } else { k };
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        let size = state_count(kind, n, k).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::StateSpaceTooLarge { size, cap });
        }
        let size = size as usize;
        let mut states = Vec::with_capacity(size * k);
        let mut cur = vec![0u32; k];
        let n32 = n as u32;
        match kind {
            ProcessKind::Rw | ProcessKind::RwK => {
                // odometer over V^k
                'odometer: loop {
                    states.extend_from_slice(&cur);
                    let mut i = k;
                    loop {
                        if i == 0 {
                            break 'odometer;
                        }
                        i -= 1;
                        cur[i] += 1;
                        if cur[i] < n32 {
                            break;
                        }
                        cur[i] = 0;
                    }
                }
            }
            ProcessKind::ExK => {
                for (i, c) in cur.iter_mut().enumerate() {
                    *c = i as u32;
                }
                loop {
                    states.extend_from_slice(&cur);
                    // rightmost position that can still advance
                    let mut i = k;
                    while i > 0 && cur[i - 1] == n32 - (k - i + 1) as u32 {
                        i -= 1;
                    }
                    if i == 0 {
                        break;
                    }
                    cur[i - 1] += 1;
                    for j in i..k {
                        cur[j] = cur[j - 1] + 1;
                    }
                }
            }
            ProcessKind::IpK => {
                let mut used = vec![false; n];
                fn rec(pos: usize, k: usize, n: usize, cur: &mut [u32], used: &mut [bool], out: &mut Vec<u32>) {
                    if pos == k {
                        out.extend_from_slice(cur);
                        return;
                    }
                    for v in 0..n {
                        if !used[v] {
                            used[v] = true;
                            cur[pos] = v as u32;
                            rec(pos + 1, k, n, cur, used, out);
                            used[v] = false;
                        }
                    }
                }
                rec(0, k, n, &mut cur, &mut used, &mut states);
            }
        }
        debug_assert_eq!(states.len(), size * k);
        let index = states
            .chunks_exact(k)
            .enumerate()
            .map(|(i, s)| (s.to_vec().into_boxed_slice(), i))
            .collect();
        Ok(StateSpace {
            kind,
            n,
            k,
            states,
            index,
        })
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i * self.k..(i + 1) * self.k]
    }

    pub fn state_vec(&self, i: usize) -> Vec<usize> {
        self.state(i).iter().map(|&v| v as usize).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.states.chunks_exact(self.k)
    }

    /// Ordinal of a state given as vertex ids. Sets may be given unsorted.
    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        let mut key: Vec<u32> = s.iter().map(|&v| v as u32).collect();
        if self.kind == ProcessKind::ExK {
            key.sort_unstable();
        }
        self.index.get(key.as_slice()).copied()
    }

    pub(crate) fn index_of_u32(&self, s: &[u32]) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Dense probability vector over an enumerated state space.
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    space: Arc<StateSpace>,
    probs: Vec<f64>,
}

/// Entries below this value indicate a bug rather than roundoff.
const HARD_NEGATIVE: f64 = -1e-12;

impl DiscreteDistribution {
    /// Clamp roundoff negatives, check the total mass and renormalize.
    pub fn new(space: Arc<StateSpace>, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(Error::SpaceMismatch);
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < HARD_NEGATIVE {
                return Err(Error::Numerical(format!("probability {p} is not admissible")));
            }
            // anything in [HARD_NEGATIVE, 0) is roundoff from the series
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("total mass {total} differs from 1")));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(DiscreteDistribution { space, probs })
    }

    pub fn uniform(space: Arc<StateSpace>) -> Self {
        let n = space.len();
        DiscreteDistribution {
            probs: vec![1.0 / n as f64; n],
            space,
        }
    }

    pub fn point_mass(space: Arc<StateSpace>, i: usize) -> Self {
        let mut probs = vec![0.0; space.len()];
        probs[i] = 1.0;
        DiscreteDistribution { space, probs }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, s: &[usize]) -> Option<f64> {
        self.space.index_of(s).map(|i| self.probs[i])
    }
}

/// `sum_s (p(s) - q(s))_+`.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter().zip(q).map(|(a, b)| (a - b).max(0.0)).sum()
}

pub fn tv_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    p.iter().map(|a| (a - u).max(0.0)).sum()
}

pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if !Arc::ptr_eq(&p.space, &q.space) && *p.space != *q.space {
        return Err(Error::SpaceMismatch);
    }
    Ok(tv(&p.probs, &q.probs).clamp(0.0, 1.0))
}

/// A process kind together with its enumerated space and generator.
#[derive(Debug, Clone)]
pub struct ProcessChain {
    pub space: Arc<StateSpace>,
    pub generator: SparseGenerator,
}

impl ProcessChain {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }
}

pub fn enumerate_states(g: &WeightedGraph, kind: ProcessKind, k: usize, cap: usize) -> Result<StateSpace> {
    StateSpace::enumerate(g.n(), kind, k, cap)
}

/// Assemble the generator: one off-diagonal rate `w_e` per state and edge
/// whose transposition changes the state (for `rw_k`, per walker and
/// incident edge).
pub fn build_generator(g: &WeightedGraph, kind: ProcessKind, k: usize, cap: usize) -> Result<ProcessChain> {
    let space = Arc::new(enumerate_states(g, kind, k, cap)?);
    let generator = generator::assemble(g, &space);
    Ok(ProcessChain { space, generator })
}

/// Row of `exp(tQ)` from state `s0`, by uniformization with L1 truncation
/// error below `tol`, renormalized.
pub fn transition_distribution(chain: &ProcessChain, s0: &[usize], t: f64, tol: f64) -> Result<DiscreteDistribution> {
    let i = chain
        .space
        .index_of(s0)
        .ok_or_else(|| Error::InvalidTuple(format!("{s0:?} is not a state of this space")))?;
    transition_from_index(chain, i, t, tol)
}

pub fn transition_from_index(chain: &ProcessChain, i: usize, t: f64, tol: f64) -> Result<DiscreteDistribution> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("t must be non-negative".into()));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::InvalidArgument("tol must lie in (0, 1e-6]".into()));
    }
    let mut p0 = vec![0.0; chain.len()];
    p0[i] = 1.0;
    let p = chain.generator.propagate(&p0, t, tol);
    DiscreteDistribution::new(chain.space.clone(), p)
}

/// `max_s TV(q_t(s, .), uniform)` computed row by row with uniformization.
pub fn worst_case_distance(chain: &ProcessChain, t: f64) -> f64 {
    let n = chain.len();
    let rows = par::map_trials(n, |i| {
        let mut p0 = vec![0.0; n];
        p0[i] = 1.0;
        tv_to_uniform(&chain.generator.propagate(&p0, t, DEFAULT_TOL))
    });
    rows.into_iter().fold(0.0, f64::max)
}

/// Something with a worst-case distance curve that is non-increasing in time.
pub trait DistanceProfile {
    fn distance(&self, t: f64) -> f64;
    /// Natural time scale (inverse of the largest exit rate).
    fn time_scale(&self) -> f64;
}

struct UniformizationProfile<'a>(&'a ProcessChain);

impl DistanceProfile for UniformizationProfile<'_> {
    fn distance(&self, t: f64) -> f64 {
        worst_case_distance(self.0, t)
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.0.generator.lambda()
    }
}

/// Smallest `t` (to within `time_tol`) with `profile.distance(t) <= eps`.
/// The returned time always satisfies the inequality.
pub fn mixing_time_of<P: DistanceProfile + ?Sized>(profile: &P, eps: f64, time_tol: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    if !(time_tol > 0.0) {
        return Err(Error::InvalidArgument("time_tol must be positive".into()));
    }
    if profile.distance(0.0) <= eps {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = profile.time_scale();
    let mut doublings = 0;
    while profile.distance(hi) > eps {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Numerical("mixing time bracket diverged".into()));
        }
    }
    while hi - lo > time_tol {
        let mid = 0.5 * (lo + hi);
        if profile.distance(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `T_Q(eps)` of a process chain. Symmetric chains up to
/// [`SPECTRAL_LIMIT`] states use a dense eigendecomposition; others use
/// uniformization row by row.
pub fn mixing_time(chain: &ProcessChain, eps: f64, time_tol: f64) -> Result<f64> {
    if chain.len() <= SPECTRAL_LIMIT && chain.generator.is_symmetric(1e-12) {
        let sp = SpectralPropagator::new(&chain.generator)?;
        mixing_time_of(&sp, eps, time_tol)
    } else {
        mixing_time_of(&UniformizationProfile(chain), eps, time_tol)
    }
}

/// Worst ordered pair of distinct vertices for negative correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    /// `max_{u != v} P[u, v in A_t] - P[u in A_t] P[v in A_t]`.
    pub max_violation: f64,
    pub argmax: (usize, usize),
}

/// Exact pair covariances of occupation for `EX(k, G)` started from `a`.
pub fn negative_correlation_report(
    g: &WeightedGraph,
    k: usize,
    a: &[usize],
    t: f64,
    cap: usize,
) -> Result<CorrelationReport> {
    if a.len() != k {
        return Err(Error::InvalidTuple("initial set must have k elements".into()));
    }
    let chain = build_generator(g, ProcessKind::ExK, k, cap)?;
    negative_correlation_with(&chain, a, t)
}

pub fn negative_correlation_with(chain: &ProcessChain, a: &[usize], t: f64) -> Result<CorrelationReport> {
    let law = transition_distribution(chain, a, t, DEFAULT_TOL)?;
    let n = chain.space.n();
    let mut single = vec![0.0; n];
    let mut pair = vec![0.0; n * n];
    for (i, s) in chain.space.iter().enumerate() {
        let p = law.probs[i];
        if p == 0.0 {
            continue;
        }
        for (j, &u) in s.iter().enumerate() {
            single[u as usize] += p;
            for &v in &s[j + 1..] {
                pair[u as usize * n + v as usize] += p;
                pair[v as usize * n + u as usize] += p;
            }
        }
    }
    let mut best = CorrelationReport {
        max_violation: f64::NEG_INFINITY,
        argmax: (0, 1),
    };
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let c = pair[u * n + v] - single[u] * single[v];
            if c > best.max_violation {
                best = CorrelationReport {
                    max_violation: c,
                    argmax: (u, v),
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests;
