//! The graphical construction.
//!
//! An [`EventStream`] is a realized marked Poisson process on `(0, horizon]`:
//! event times at rate `W` (or `2W` with fair coin marks for the modified
//! construction) and i.i.d. edge marks with `P(e) = w_e / W`. All coupled
//! processes read their randomness from one stream: the composed
//! transposition map of an interval moves single walkers, occupied sets and
//! labelled tuples simultaneously.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng;

/// Draws edge ids with probability `w_e / W`.
#[derive(Debug, Clone)]
pub struct EdgeSampler {
    m: usize,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl EdgeSampler {
    pub fn new(g: &WeightedGraph) -> Self {
        let alias = if g.is_unit_weighted() {
            None
        } else {
            let w: Vec<f64> = g.edges().iter().map(|e| e.w).collect();
            Some(WeightedAliasIndex::new(w).expect("graph weights are positive"))
        };
        EdgeSampler { m: g.m(), alias }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.alias {
            None => rng.random_range(0..self.m),
            Some(a) => a.sample(rng),
        }
    }
}

/// Exponential waiting time with the given rate.
#[inline]
pub(crate) fn exp_gap<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // 1 - U lies in (0, 1]
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln() / rate
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    horizon: f64,
    rate: f64,
    times: Vec<f64>,
    edge_marks: Vec<usize>,
    coin_marks: Option<Vec<bool>>,
    seed: Option<u64>,
}

impl EventStream {
    /// Sample the standard (`modified = false`, rate `W`) or modified
    /// (rate `2W`, with coins) construction on `(0, horizon]`.
    pub fn sample(g: &WeightedGraph, horizon: f64, modified: bool, seed: u64) -> Result<Self> {
        let mut r = rng::from_seed(seed);
        let mut s = Self::sample_with(g, &EdgeSampler::new(g), horizon, modified, &mut r)?;
        s.seed = Some(seed);
        Ok(s)
    }

    pub fn sample_with<R: Rng + ?Sized>(
        g: &WeightedGraph,
        sampler: &EdgeSampler,
        horizon: f64,
        modified: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        let rate = if modified { 2.0 } else { 1.0 } * g.total_weight();
        let mut times = Vec::new();
        let mut edge_marks = Vec::new();
        let mut coins = modified.then(Vec::new);
        let mut t = exp_gap(rng, rate);
        while t <= horizon {
            times.push(t);
            edge_marks.push(sampler.sample(rng));
            if let Some(c) = coins.as_mut() {
                c.push(rng.random::<bool>());
            }
            t += exp_gap(rng, rate);
        }
        Ok(EventStream {
            horizon,
            rate,
            times,
            edge_marks,
            coin_marks: coins,
            seed: None,
        })
    }

    /// Assemble a stream from explicit events (times must increase strictly
    /// and lie in `(0, horizon]`).
    pub fn from_events(
        g: &WeightedGraph,
        horizon: f64,
        modified: bool,
        events: Vec<(f64, usize, Option<bool>)>,
    ) -> Result<Self> {
        let rate = if modified { 2.0 } else { 1.0 } * g.total_weight();
        let mut prev = 0.0;
        let mut times = Vec::with_capacity(events.len());
        let mut edge_marks = Vec::with_capacity(events.len());
        let mut coins = modified.then(Vec::new);
        for (t, e, c) in events {
            if !(t > prev) || t > horizon {
                return Err(Error::InvalidArgument(format!("event time {t} out of order or range")));
            }
            if e >= g.m() {
                return Err(Error::InvalidArgument(format!("edge id {e} out of range")));
            }
            match (coins.as_mut(), c) {
                (Some(v), Some(c)) => v.push(c),
                (None, None) => {}
                _ => return Err(Error::InvalidArgument("coin marks must match the stream kind".into())),
            }
            times.push(t);
            edge_marks.push(e);
            prev = t;
        }
        Ok(EventStream {
            horizon,
            rate,
            times,
            edge_marks,
            coin_marks: coins,
            seed: None,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn edge_marks(&self) -> &[usize] {
        &self.edge_marks
    }

    pub fn coin_marks(&self) -> Option<&[bool]> {
        self.coin_marks.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_modified(&self) -> bool {
        self.coin_marks.is_some()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index range of the events with time in `(t, u]`.
    pub fn window(&self, t: f64, u: f64) -> Result<std::ops::Range<usize>> {
        if !(0.0 <= t && t <= u && u <= self.horizon) {
            return Err(Error::IntervalOutOfRange {
                t,
                u,
                horizon: self.horizon,
            });
        }
        let lo = self.times.partition_point(|&x| x <= t);
        let hi = self.times.partition_point(|&x| x <= u);
        Ok(lo..hi)
    }

    /// Whether event `i` applies its transposition. Events of a standard
    /// stream, or any stream when `respect_coins` is false, always apply.
    #[inline]
    pub fn fires(&self, i: usize, respect_coins: bool) -> bool {
        match (&self.coin_marks, respect_coins) {
            (Some(c), true) => c[i],
            _ => true,
        }
    }

    /// `I_(t,u]`: the transpositions fired in `(t, u]` composed in time order.
    pub fn interval_map(
        &self,
        g: &WeightedGraph,
        t: f64,
        u: f64,
        respect_coins: bool,
    ) -> Result<VertexPermutation> {
        let mut p = VertexPermutation::identity(g.n());
        for i in self.window(t, u)? {
            if self.fires(i, respect_coins) {
                let e = g.edge(self.edge_marks[i]);
                p.then_transpose(e.u, e.v);
            }
        }
        Ok(p)
    }

    /// Move a particle configuration through `I_(t,u]`. Only the occupied
    /// vertices are tracked, so the cost is linear in the number of events.
    pub fn apply_interval(
        &self,
        g: &WeightedGraph,
        state: &ParticleState,
        t: f64,
        u: f64,
        respect_coins: bool,
    ) -> Result<ParticleState> {
        state.validate(g.n())?;
        let window = self.window(t, u)?;
        let mut positions: Vec<usize> = state.positions().to_vec();
        let mut at: HashMap<usize, usize> = positions.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for i in window {
            if !self.fires(i, respect_coins) {
                continue;
            }
            let e = g.edge(self.edge_marks[i]);
            let a = at.remove(&e.u);
            let b = at.remove(&e.v);
            if let Some(p) = a {
                positions[p] = e.v;
                at.insert(e.v, p);
            }
            if let Some(p) = b {
                positions[p] = e.u;
                at.insert(e.u, p);
            }
        }
        Ok(state.with_positions(positions))
    }

    /// Line format: header `rate horizon count`, then `time edge coin` with
    /// coin one of `0`, `1`, `-`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.rate, self.horizon, self.len()).unwrap();
        for i in 0..self.len() {
            let c = match &self.coin_marks {
                Some(c) if c[i] => "1",
                Some(_) => "0",
                None => "-",
            };
            writeln!(out, "{} {} {}", self.times[i], self.edge_marks[i], c).unwrap();
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let h: Vec<&str> = head.split_whitespace().collect();
        if h.len() != 3 {
            return Err(perr(1, "header must be `rate horizon count`"));
        }
        let rate: f64 = h[0].parse().map_err(|_| perr(1, "bad rate"))?;
        let horizon: f64 = h[1].parse().map_err(|_| perr(1, "bad horizon"))?;
        let count: usize = h[2].parse().map_err(|_| perr(1, "bad count"))?;
        let mut times = Vec::with_capacity(count);
        let mut edge_marks = Vec::with_capacity(count);
        let mut coins: Vec<Option<bool>> = Vec::with_capacity(count);
        for (i, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(perr(i + 1, "event line must be `time edge coin`"));
            }
            times.push(f[0].parse::<f64>().map_err(|_| perr(i + 1, "bad time"))?);
            edge_marks.push(f[1].parse::<usize>().map_err(|_| perr(i + 1, "bad edge id"))?);
            coins.push(match f[2] {
                "0" => Some(false),
                "1" => Some(true),
                "-" => None,
                _ => return Err(perr(i + 1, "coin must be 0, 1 or -")),
            });
        }
        if times.len() != count {
            return Err(perr(1, "event count does not match header"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(perr(1, "event times must increase"));
        }
        let coin_marks = if coins.iter().all(|c| c.is_some()) && !coins.is_empty() {
            Some(coins.into_iter().map(|c| c.unwrap()).collect())
        } else if coins.iter().all(|c| c.is_none()) {
            None
        } else {
            return Err(perr(1, "mixed coin marks"));
        };
        Ok(EventStream {
            horizon,
            rate,
            times,
            edge_marks,
            coin_marks,
            seed: None,
        })
    }
}

/// Bijection of `0..n`, with its inverse kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPermutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl VertexPermutation {
    pub fn identity(n: usize) -> Self {
        VertexPermutation {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (x, &y) in forward.iter().enumerate() {
            if y >= n || inverse[y] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            inverse[y] = x;
        }
        Ok(VertexPermutation { forward, inverse })
    }

    pub fn n(&self) -> usize {
        self.forward.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.forward[x]
    }

    #[inline]
    pub fn apply_inverse(&self, y: usize) -> usize {
        self.inverse[y]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> VertexPermutation {
        VertexPermutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Replace `self` by `f_{a,b} ∘ self` in O(1).
    #[inline]
    pub fn then_transpose(&mut self, a: usize, b: usize) {
        let pa = self.inverse[a];
        let pb = self.inverse[b];
        self.forward[pa] = b;
        self.forward[pb] = a;
        self.inverse[a] = pb;
        self.inverse[b] = pa;
    }

    /// `later ∘ self`.
    pub fn then(&self, later: &VertexPermutation) -> VertexPermutation {
        let forward: Vec<usize> = self.forward.iter().map(|&y| later.forward[y]).collect();
        VertexPermutation::from_forward(forward).expect("composition of bijections")
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn apply_state(&self, state: &ParticleState) -> ParticleState {
        state.with_positions(state.positions().iter().map(|&v| self.apply(v)).collect())
    }
}

/// A configuration of particles: one walker, an unlabelled set, or a tuple
/// of distinct labelled vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParticleState {
    Vertex(usize),
    /// Sorted, distinct.
    Set(Vec<usize>),
    /// Distinct coordinates.
    Tuple(Vec<usize>),
}

impl ParticleState {
    pub fn set(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        ParticleState::Set(v)
    }

    pub fn positions(&self) -> &[usize] {
        match self {
            ParticleState::Vertex(v) => std::slice::from_ref(v),
            ParticleState::Set(v) | ParticleState::Tuple(v) => v,
        }
    }

    fn with_positions(&self, mut p: Vec<usize>) -> ParticleState {
        match self {
            ParticleState::Vertex(_) => ParticleState::Vertex(p[0]),
            ParticleState::Set(_) => {
                p.sort_unstable();
                ParticleState::Set(p)
            }
            ParticleState::Tuple(_) => ParticleState::Tuple(p),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let p = self.positions();
        if p.iter().any(|&v| v >= n) {
            return Err(Error::InvalidTuple("vertex out of range".into()));
        }
        let mut s = p.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTuple("repeated vertex".into()));
        }
        Ok(())
    }
}

/// First meeting time of two independent walkers, or censoring at the cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeetingOutcome {
    Met(f64),
    Censored(f64),
}

impl MeetingOutcome {
    pub fn met_by(&self, t: f64) -> bool {
        matches!(*self, MeetingOutcome::Met(m) if m <= t)
    }
}

/// Pick the incidence of `v` chosen with probability proportional to weight,
/// given `target` uniform on `[0, weighted_degree(v))`.
#[inline]
fn pick_incidence(g: &WeightedGraph, v: usize, mut target: f64) -> usize {
    let adj = g.adjacency(v);
    for inc in adj {
        if target < inc.weight {
            return inc.neighbor;
        }
        target -= inc.weight;
    }
    adj[adj.len() - 1].neighbor
}

/// Event-driven simulation of two independent walkers from `x` until they
/// coincide or `cap` elapses.
pub fn sample_meeting_time(g: &WeightedGraph, x: (usize, usize), cap: f64, seed: u64) -> MeetingOutcome {
    let mut r = rng::from_seed(seed);
    meeting_time_with(g, x, cap, &mut r)
}

pub fn meeting_time_with<R: Rng + ?Sized>(
    g: &WeightedGraph,
    x: (usize, usize),
    cap: f64,
    rng: &mut R,
) -> MeetingOutcome {
    let (mut a, mut b) = x;
    if a == b {
        return MeetingOutcome::Met(0.0);
    }
    let degrees: Vec<f64> = (0..g.n()).map(|v| g.weighted_degree(v)).collect();
    let mut t = 0.0;
    loop {
        let (da, db) = (degrees[a], degrees[b]);
        let total = da + db;
        t += exp_gap(rng, total);
        if t > cap {
            return MeetingOutcome::Censored(cap);
        }
        let u = rng.random::<f64>() * total;
        if u < da {
            a = pick_incidence(g, a, u);
        } else {
            b = pick_incidence(g, b, u - da);
        }
        if a == b {
            return MeetingOutcome::Met(t);
        }
    }
}

/// Jump record of the coupled walk/interchange chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledJump {
    pub time: f64,
    pub ip: (usize, usize),
    pub rw: (usize, usize),
}

/// Trajectories of the coupling that runs `IP(2, G)` and two independent
/// walkers together until the walkers meet.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledTrajectories {
    pub start: (usize, usize),
    pub horizon: f64,
    /// State after each jump, in time order.
    pub jumps: Vec<CoupledJump>,
    /// Time of the first split transition on the diagonal, which is the
    /// walkers' first meeting time.
    pub first_divergence: Option<f64>,
}

impl CoupledTrajectories {
    /// `(ip, rw)` at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> ((usize, usize), (usize, usize)) {
        let i = self.jumps.partition_point(|j| j.time <= t);
        if i == 0 {
            (self.start, self.start)
        } else {
            (self.jumps[i - 1].ip, self.jumps[i - 1].rw)
        }
    }
}

#[inline]
fn swap_pair(e: (usize, usize), x: (usize, usize)) -> (usize, usize) {
    let f = |v: usize| {
        if v == e.0 {
            e.1
        } else if v == e.1 {
            e.0
        } else {
            v
        }
    };
    (f(x.0), f(x.1))
}

/// Simulate the coupling on `(V)_2 × V^2`:
///
/// * off the diagonal the two components evolve independently;
/// * on the diagonal `(x, x)`, an edge with one endpoint in `{x1, x2}` moves
///   both components together, and the edge `{x1, x2}` fires two
///   transitions of rate `w`: the interchange swaps while walker 2 jumps onto
///   `x1`, or the interchange stays while walker 1 jumps onto `x2`.
pub fn coupled_pair(g: &WeightedGraph, x: (usize, usize), horizon: f64, seed: u64) -> Result<CoupledTrajectories> {
    if x.0 == x.1 || x.0 >= g.n() || x.1 >= g.n() {
        return Err(Error::InvalidTuple("coupled_pair needs two distinct vertices".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let mut r = rng::from_seed(seed);
    let degrees: Vec<f64> = (0..g.n()).map(|v| g.weighted_degree(v)).collect();
    let mut ip = x;
    let mut rw = x;
    let mut t = 0.0;
    let mut jumps = Vec::new();
    let mut first_divergence = None;
    loop {
        if ip == rw {
            // rule 2: total rate equals the walkers' total rate d1 + d2
            let total = degrees[ip.0] + degrees[ip.1];
            t += exp_gap(&mut r, total);
            if t > horizon {
                break;
            }
            let u = r.random::<f64>() * total;
            let (who, v, target) = if u < degrees[ip.0] {
                (0, ip.0, u)
            } else {
                (1, ip.1, u - degrees[ip.0])
            };
            let to = pick_incidence(g, v, target);
            let other = if who == 0 { ip.1 } else { ip.0 };
            if to == other {
                // edge {x1, x2}: rule 2.2
                if who == 1 {
                    ip = (ip.1, ip.0);
                    rw = (rw.0, rw.0);
                } else {
                    rw = (rw.1, rw.1);
                }
                first_divergence.get_or_insert(t);
            } else {
                // rule 2.1: both move across the same edge
                let e = (v, to);
                ip = swap_pair(e, ip);
                rw = ip;
            }
        } else {
            // rule 1: independent evolution
            let ip_rate = degrees[ip.0] + degrees[ip.1] - g.edge_between(ip.0, ip.1).map_or(0.0, |e| g.edge(e).w);
            let rw_rate = degrees[rw.0] + degrees[rw.1];
            let total = ip_rate + rw_rate;
            t += exp_gap(&mut r, total);
            if t > horizon {
                break;
            }
            let u = r.random::<f64>() * total;
            if u < rw_rate {
                if u < degrees[rw.0] {
                    rw.0 = pick_incidence(g, rw.0, u);
                } else {
                    rw.1 = pick_incidence(g, rw.1, u - degrees[rw.0]);
                }
            } else {
                // interchange: every edge touching {ip.0, ip.1} fires at rate w_e
                let mut target = u - rw_rate;
                let mut chosen = None;
                let mut last = None;
                'outer: for &v in &[ip.0, ip.1] {
                    for inc in g.adjacency(v) {
                        if v == ip.1 && inc.neighbor == ip.0 {
                            continue; // shared edge counted once
                        }
                        last = Some((v, inc.neighbor));
                        if target < inc.weight {
                            chosen = last;
                            break 'outer;
                        }
                        target -= inc.weight;
                    }
                }
                // roundoff can leave `target` just past the final weight
                let e = chosen.or(last).expect("connected graph has edges");
                ip = swap_pair(e, ip);
            }
        }
        jumps.push(CoupledJump { time: t, ip, rw });
    }
    Ok(CoupledTrajectories {
        start: x,
        horizon,
        jumps,
        first_divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn c4() -> WeightedGraph {
        GraphKind::Cycle { n: 4 }.generate(0).unwrap()
    }

    #[test]
    fn empty_window_gives_identity() {
        let g = c4();
        let s = EventStream::from_events(&g, 2.0, false, vec![(1.5, 0, None)]).unwrap();
        assert!(s.interval_map(&g, 0.0, 1.0, false).unwrap().is_identity());
        assert!(s.interval_map(&g, 0.3, 0.3, false).unwrap().is_identity());
    }

    #[test]
    fn coin_gates_transposition() {
        let g = GraphKind::Path { n: 3 }.generate(0).unwrap();
        // edge 0 = {0,1}, edge 1 = {1,2}
        let s = EventStream::from_events(&g, 1.0, true, vec![(0.5, 0, Some(true))]).unwrap();
        let p = s.interval_map(&g, 0.0, 1.0, true).unwrap();
        assert_eq!(p.forward(), &[1, 0, 2]);
        let s0 = EventStream::from_events(&g, 1.0, true, vec![(0.5, 0, Some(false))]).unwrap();
        assert!(s0.interval_map(&g, 0.0, 1.0, true).unwrap().is_identity());
        assert!(!s0.interval_map(&g, 0.0, 1.0, false).unwrap().is_identity());
    }

    #[test]
    fn set_moves_elementwise() {
        let g = GraphKind::Path { n: 3 }.generate(0).unwrap();
        let s = EventStream::from_events(&g, 1.0, true, vec![(0.5, 1, Some(true))]).unwrap();
        let out = s.apply_interval(&g, &ParticleState::set(vec![0, 1]), 0.0, 1.0, true).unwrap();
        assert_eq!(out, ParticleState::Set(vec![0, 2]));
        let same = s.apply_interval(&g, &ParticleState::set(vec![0, 1]), 0.6, 1.0, true).unwrap();
        assert_eq!(same, ParticleState::Set(vec![0, 1]));
    }

    #[test]
    fn out_of_range_interval() {
        let g = c4();
        let s = EventStream::sample(&g, 1.0, false, 3).unwrap();
        assert!(matches!(s.interval_map(&g, 0.5, 0.2, false), Err(Error::IntervalOutOfRange { .. })));
        assert!(matches!(s.interval_map(&g, 0.0, 1.5, false), Err(Error::IntervalOutOfRange { .. })));
        assert!(EventStream::sample(&g, 0.0, false, 3).is_err());
    }

    #[test]
    fn sparse_apply_matches_permutation() {
        let g = c4();
        for seed in 0..50 {
            let s = EventStream::sample(&g, 3.0, true, seed).unwrap();
            for coins in [false, true] {
                let p = s.interval_map(&g, 0.5, 2.5, coins).unwrap();
                let x = ParticleState::Tuple(vec![3, 0, 2]);
                assert_eq!(s.apply_interval(&g, &x, 0.5, 2.5, coins).unwrap(), p.apply_state(&x));
            }
        }
    }

    #[test]
    fn dump_round_trip() {
        let g = c4();
        for modified in [false, true] {
            let s = EventStream::sample(&g, 2.0, modified, 11).unwrap();
            let mut back = EventStream::from_dump(&s.to_dump()).unwrap();
            back.seed = s.seed;
            assert_eq!(back, s);
        }
    }

    #[test]
    fn meeting_from_diagonal_is_zero() {
        let g = c4();
        assert_eq!(sample_meeting_time(&g, (2, 2), 1.0, 0), MeetingOutcome::Met(0.0));
    }

    #[test]
    fn coupled_paths_agree_before_divergence() {
        let g = c4();
        for seed in 0..200 {
            let c = coupled_pair(&g, (0, 1), 3.0, seed).unwrap();
            let stop = c.first_divergence.unwrap_or(f64::INFINITY);
            for j in &c.jumps {
                if j.time < stop {
                    assert_eq!(j.ip, j.rw);
                }
                assert_ne!(j.ip.0, j.ip.1);
            }
        }
    }
}
