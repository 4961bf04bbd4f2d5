//! Weighted graphs, standard generators and hop-distance statistics.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest vertex count for which a dense distance matrix is built.
pub const MAX_DISTANCE_VERTICES: usize = 20_000;

const GENERATION_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

/// One adjacency entry: neighbour, edge id, edge weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub neighbor: usize,
    pub edge: usize,
    pub weight: f64,
}

/// Connected, simple, positively weighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Incidence>>,
    total_weight: f64,
}

impl WeightedGraph {
    /// Validate an edge list and build the graph.
    pub fn new(n: usize, edge_list: &[(usize, usize, f64)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::GraphTooSmall(n));
        }
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v, w) in edge_list {
            let bad = |reason: &str| Error::InvalidEdge {
                u,
                v,
                reason: reason.to_string(),
            };
            if u >= n || v >= n {
                return Err(bad("endpoint out of range"));
            }
            if u == v {
                return Err(bad("self-loop"));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(bad("weight must be positive and finite"));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(bad("duplicate edge"));
            }
            let id = edges.len();
            edges.push(Edge { u, v, w });
            adjacency[u].push(Incidence {
                neighbor: v,
                edge: id,
                weight: w,
            });
            adjacency[v].push(Incidence {
                neighbor: u,
                edge: id,
                weight: w,
            });
        }
        let total_weight = edges.iter().map(|e| e.w).sum();
        let g = WeightedGraph {
            n,
            edges,
            adjacency,
            total_weight,
        };
        if !g.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(g)
    }

    /// Unit-weight graph from unordered pairs.
    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let list: Vec<_> = pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::new(n, &list)
    }

    pub fn generate(kind: &GraphKind, seed: u64) -> Result<Self> {
        kind.generate(seed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn adjacency(&self, v: usize) -> &[Incidence] {
        &self.adjacency[v]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|i| i.weight).sum()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Edge id joining `u` and `v`, if any.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency[u]
            .iter()
            .find(|i| i.neighbor == v)
            .map(|i| i.edge)
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1.0)
    }

    fn is_connected(&self) -> bool {
        component_of(self.n, &self.adjacency, 0).len() == self.n
    }

    /// Hop distances between all pairs (weights ignored).
    pub fn all_pairs_distances(&self) -> Result<DistanceMatrix> {
        if self.n > MAX_DISTANCE_VERTICES {
            return Err(Error::InvalidArgument(format!(
                "distance matrix limited to {MAX_DISTANCE_VERTICES} vertices"
            )));
        }
        let n = self.n;
        let mut data = vec![u32::MAX; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            let row = &mut data[s * n..(s + 1) * n];
            row[s] = 0;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                let d = row[x] + 1;
                for inc in &self.adjacency[x] {
                    if row[inc.neighbor] == u32::MAX {
                        row[inc.neighbor] = d;
                        queue.push_back(inc.neighbor);
                    }
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn stats(&self) -> Result<GraphStats> {
        let dist = self.all_pairs_distances()?;
        let n = self.n as f64;
        let sq: f64 = dist.data.iter().map(|&d| (d as f64) * (d as f64)).sum();
        Ok(GraphStats {
            n: self.n,
            m: self.m(),
            total_weight: self.total_weight,
            avg_weighted_degree: 2.0 * self.total_weight / n,
            mean_square_distance: sq / (n * n),
        })
    }

    /// Text form: `n m` then one `u v w` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.m()).unwrap();
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.u, e.v, e.w).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::Parse {
                line: ln,
                msg: "header must be `n m`".into(),
            });
        }
        let n: usize = parse_field(head[0], ln)?;
        let m: usize = parse_field(head[1], ln)?;
        let mut list = Vec::with_capacity(m);
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse {
                    line: ln,
                    msg: "edge line must be `u v w`".into(),
                });
            }
            list.push((parse_field(f[0], ln)?, parse_field(f[1], ln)?, parse_field(f[2], ln)?));
        }
        if list.len() != m {
            return Err(Error::Parse {
                line: ln,
                msg: format!("header announces {m} edges, found {}", list.len()),
            });
        }
        Self::new(n, &list)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse `{s}`"),
    })
}

fn component_of(n: usize, adjacency: &[Vec<Incidence>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut out = vec![start];
    seen[start] = true;
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        i += 1;
        for inc in &adjacency[x] {
            if !seen[inc.neighbor] {
                seen[inc.neighbor] = true;
                out.push(inc.neighbor);
            }
        }
    }
    out
}

/// Dense symmetric matrix of hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.data[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.data[x * self.n..(x + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub total_weight: f64,
    /// `2W/n`.
    pub avg_weighted_degree: f64,
    /// Mean of `dist(x, y)^2` over all ordered pairs, diagonal included.
    pub mean_square_distance: f64,
}

/// Graph families. All generated graphs have unit weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    Torus { d: usize, l: usize },
    ErdosRenyiGiant { n: usize, c: f64 },
    RandomRegular { n: usize, d: usize },
    PercolationTorus { d: usize, l: usize, p: f64 },
}

impl GraphKind {
    pub fn generate(&self, seed: u64) -> Result<WeightedGraph> {
        match *self {
            GraphKind::Path { n } => {
                let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
                WeightedGraph::unweighted(n, &pairs)
            }
            GraphKind::Cycle { n } => {
                if n < 3 {
                    return Err(Error::InvalidArgument("cycle needs n >= 3".into()));
                }
                let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
                WeightedGraph::unweighted(n, &pairs)
            }
            GraphKind::Complete { n } => {
                let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
                for u in 0..n {
                    for v in u + 1..n {
                        pairs.push((u, v));
                    }
                }
                WeightedGraph::unweighted(n, &pairs)
            }
            GraphKind::Torus { d, l } => {
                let pairs = torus_pairs(d, l)?;
                WeightedGraph::unweighted(l.pow(d as u32), &pairs)
            }
            GraphKind::ErdosRenyiGiant { n, c } => erdos_renyi_giant(n, c, seed),
            GraphKind::RandomRegular { n, d } => random_regular(n, d, seed),
            GraphKind::PercolationTorus { d, l, p } => percolation_torus(d, l, p, seed),
        }
    }

    /// Parse `path:5`, `cycle:4`, `complete:300`, `torus:2:5`, `er:50:2`,
    /// `regular:20:3`, `perc:2:10:0.6`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::InvalidArgument(format!("bad graph spec `{spec}`"));
        let u = |i: usize| -> Result<usize> { parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad) };
        let f = |i: usize| -> Result<f64> { parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad) };
        let want = |k: usize| if parts.len() == k { Ok(()) } else { Err(bad()) };
        Ok(match parts[0] {
            "path" => {
                want(2)?;
                GraphKind::Path { n: u(1)? }
            }
            "cycle" => {
                want(2)?;
                GraphKind::Cycle { n: u(1)? }
            }
            "complete" => {
                want(2)?;
                GraphKind::Complete { n: u(1)? }
            }
            "torus" => {
                want(3)?;
                GraphKind::Torus { d: u(1)?, l: u(2)? }
            }
            "er" => {
                want(3)?;
                GraphKind::ErdosRenyiGiant { n: u(1)?, c: f(2)? }
            }
            "regular" => {
                want(3)?;
                GraphKind::RandomRegular { n: u(1)?, d: u(2)? }
            }
            "perc" => {
                want(4)?;
                GraphKind::PercolationTorus {
                    d: u(1)?,
                    l: u(2)?,
                    p: f(3)?,
                }
            }
            _ => return Err(bad()),
        })
    }
}

/// Nearest-neighbour pairs of `(Z/lZ)^d`, deduplicated (relevant for `l = 2`).
fn torus_pairs(d: usize, l: usize) -> Result<Vec<(usize, usize)>> {
    if d == 0 || l < 2 {
        return Err(Error::InvalidArgument("torus needs d >= 1 and L >= 2".into()));
    }
    let n = l
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidArgument("torus too large".into()))?;
    let mut set = HashSet::new();
    let mut pairs = Vec::new();
    for x in 0..n {
        let mut stride = 1;
        for _ in 0..d {
            let coord = (x / stride) % l;
            let y = x - coord * stride + ((coord + 1) % l) * stride;
            let key = (x.min(y), x.max(y));
            if x != y && set.insert(key) {
                pairs.push(key);
            }
            stride *= l;
        }
    }
    Ok(pairs)
}

/// Largest component of the graph `(n, pairs)`, ties broken by the smallest
/// contained vertex, relabelled in increasing order of original ids.
fn largest_component(n: usize, pairs: &[(usize, usize)]) -> (usize, Vec<(usize, usize)>) {
    let mut adjacency = vec![Vec::new(); n];
    for (id, &(u, v)) in pairs.iter().enumerate() {
        adjacency[u].push(Incidence {
            neighbor: v,
            edge: id,
            weight: 1.0,
        });
        adjacency[v].push(Incidence {
            neighbor: u,
            edge: id,
            weight: 1.0,
        });
    }
    let mut label = vec![usize::MAX; n];
    let mut best: Vec<usize> = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let comp = component_of(n, &adjacency, s);
        for &v in &comp {
            label[v] = s;
        }
        // components are discovered in order of their smallest vertex, so a
        // strict comparison keeps the earliest among equals
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_unstable();
    let mut relabel = vec![usize::MAX; n];
    for (i, &v) in best.iter().enumerate() {
        relabel[v] = i;
    }
    let kept = pairs
        .iter()
        .filter(|&&(u, v)| relabel[u] != usize::MAX && relabel[v] != usize::MAX)
        .map(|&(u, v)| (relabel[u], relabel[v]))
        .collect();
    (best.len(), kept)
}

fn erdos_renyi_giant(n: usize, c: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 || !(c > 0.0) {
        return Err(Error::InvalidArgument("erdos_renyi_giant needs n >= 2, c > 0".into()));
    }
    let p = (c / n as f64).min(1.0);
    for attempt in 0..GENERATION_ATTEMPTS {
        let mut r = rng::substream(seed, attempt as u64);
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if r.random_bool(p) {
                    pairs.push((u, v));
                }
            }
        }
        let (size, kept) = largest_component(n, &pairs);
        if size >= 2 {
            return WeightedGraph::unweighted(size, &kept);
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
        reason: "giant component never reached 2 vertices".into(),
    })
}

fn percolation_torus(d: usize, l: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("percolation needs p in [0, 1]".into()));
    }
    let all = torus_pairs(d, l)?;
    let n = l.pow(d as u32);
    for attempt in 0..GENERATION_ATTEMPTS {
        let mut r = rng::substream(seed, attempt as u64);
        let open: Vec<_> = all.iter().copied().filter(|_| r.random_bool(p)).collect();
        let (size, kept) = largest_component(n, &open);
        if size >= 2 {
            return WeightedGraph::unweighted(size, &kept);
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
        reason: "largest cluster never reached 2 vertices".into(),
    })
}

/// Configuration model, rejecting multigraphs and disconnected outcomes.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<WeightedGraph> {
    if d == 0 || d >= n || (n * d) % 2 != 0 {
        return Err(Error::InvalidArgument(
            "random_regular needs 1 <= d < n and n*d even".into(),
        ));
    }
    use rand::seq::SliceRandom;
    for attempt in 0..GENERATION_ATTEMPTS {
        let mut r = rng::substream(seed, attempt as u64);
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(&mut r);
        let mut set = HashSet::new();
        let mut ok = true;
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !set.insert((u.min(v), u.max(v))) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut pairs: Vec<_> = set.into_iter().collect();
        pairs.sort_unstable();
        match WeightedGraph::unweighted(n, &pairs) {
            Ok(g) => return Ok(g),
            Err(Error::DisconnectedGraph) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed {
        attempts: GENERATION_ATTEMPTS,
        reason: "no simple connected pairing found".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_small_graphs() {
        let k2 = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(k2.total_weight(), 1.0);
        let p3 = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(p3.total_weight(), 2.0);
        assert!(matches!(
            WeightedGraph::new(4, &[(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::DisconnectedGraph)
        ));
    }

    #[test]
    fn invalid_edges_rejected() {
        for list in [
            vec![(0, 0, 1.0)],
            vec![(0, 1, 1.0), (1, 0, 2.0)],
            vec![(0, 1, 0.0)],
            vec![(0, 1, -1.0)],
            vec![(0, 5, 1.0)],
        ] {
            assert!(matches!(
                WeightedGraph::new(2, &list),
                Err(Error::InvalidEdge { .. })
            ));
        }
        assert!(matches!(WeightedGraph::new(1, &[]), Err(Error::GraphTooSmall(1))));
        assert!(matches!(WeightedGraph::new(3, &[(0, 1, 1.0)]), Err(Error::DisconnectedGraph)));
    }

    #[test]
    fn generators_basic_shapes() {
        let c4 = GraphKind::Cycle { n: 4 }.generate(0).unwrap();
        assert_eq!((c4.n(), c4.m()), (4, 4));
        assert!((0..4).all(|v| c4.degree(v) == 2));
        assert_eq!(GraphKind::Complete { n: 4 }.generate(0).unwrap().m(), 6);
        let t = GraphKind::Torus { d: 2, l: 3 }.generate(0).unwrap();
        assert_eq!((t.n(), t.m()), (9, 18));
        assert!((0..9).all(|v| t.degree(v) == 4));
        // (Z/2Z)^3 collapses to the 3-cube
        let q3 = GraphKind::Torus { d: 3, l: 2 }.generate(0).unwrap();
        assert_eq!((q3.n(), q3.m()), (8, 12));
    }

    #[test]
    fn distances_on_small_graphs() {
        let c4 = GraphKind::Cycle { n: 4 }.generate(0).unwrap();
        assert_eq!(c4.all_pairs_distances().unwrap().get(0, 2), 2);
        let p3 = GraphKind::Path { n: 3 }.generate(0).unwrap();
        assert_eq!(p3.all_pairs_distances().unwrap().get(0, 2), 2);
        let k5 = GraphKind::Complete { n: 5 }.generate(0).unwrap();
        let d = k5.all_pairs_distances().unwrap();
        for x in 0..5 {
            for y in 0..5 {
                assert_eq!(d.get(x, y), u32::from(x != y));
            }
        }
    }

    #[test]
    fn stats_values() {
        let c4 = GraphKind::Cycle { n: 4 }.generate(0).unwrap();
        let s = c4.stats().unwrap();
        assert_eq!(s.avg_weighted_degree, 2.0);
        assert_eq!(s.mean_square_distance, 1.5);
        let k2 = GraphKind::Complete { n: 2 }.generate(0).unwrap();
        assert_eq!(k2.stats().unwrap().mean_square_distance, 0.5);
    }

    #[test]
    fn text_round_trip() {
        let g = WeightedGraph::new(3, &[(0, 1, 0.1), (1, 2, 1.0 / 3.0), (0, 2, 2.5e-7)]).unwrap();
        let back = WeightedGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
        assert!(WeightedGraph::from_text("3 2\n0 1 1\n").is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(GraphKind::parse("torus:2:5").unwrap(), GraphKind::Torus { d: 2, l: 5 });
        assert_eq!(GraphKind::parse("cycle:4").unwrap(), GraphKind::Cycle { n: 4 });
        assert!(GraphKind::parse("cycle").is_err());
        assert!(GraphKind::parse("blob:3").is_err());
    }
}
