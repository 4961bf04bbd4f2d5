//! Canonical-path congestion
//! `phi(G) = max_e sum_{(x, y)} l_xy 1{e in path_xy} / (|V| w_e)`
//! and its universal lower bound `2 * mean square distance / average degree`.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, WeightedGraph};

/// A path, as a sequence of edge ids, for every ordered pair of vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFamily {
    n: usize,
    paths: Vec<Vec<usize>>,
}

impl PathFamily {
    /// `paths[x * n + y]` must lead from `x` to `y`; diagonal paths must be
    /// empty.
    pub fn new(g: &WeightedGraph, paths: Vec<Vec<usize>>) -> Result<Self> {
        let n = g.n();
        if paths.len() != n * n {
            return Err(Error::InvalidPathFamily(format!("expected {} paths, got {}", n * n, paths.len())));
        }
        for x in 0..n {
            for y in 0..n {
                let p = &paths[x * n + y];
                if x == y && !p.is_empty() {
                    return Err(Error::InvalidPathFamily(format!("path ({x}, {x}) must be empty")));
                }
                let mut at = x;
                for &e in p {
                    if e >= g.m() || !g.edge(e).contains(at) {
                        return Err(Error::InvalidPathFamily(format!("path ({x}, {y}) is broken at edge {e}")));
                    }
                    at = g.edge(e).other(at);
                }
                if at != y {
                    return Err(Error::InvalidPathFamily(format!("path ({x}, {y}) ends at {at}")));
                }
            }
        }
        Ok(PathFamily { n, paths })
    }

    pub fn path(&self, x: usize, y: usize) -> &[usize] {
        &self.paths[x * self.n + y]
    }

    pub fn len(&self, x: usize, y: usize) -> usize {
        self.path(x, y).len()
    }
}

/// Shortest paths that step to a closer neighbour chosen by `pick`.
fn shortest_paths(g: &WeightedGraph, dist: &DistanceMatrix, mut pick: impl FnMut(&[(usize, usize)]) -> (usize, usize)) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut paths = Vec::with_capacity(n * n);
    let mut closer = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let mut p = Vec::with_capacity(dist.get(x, y) as usize);
            let mut at = x;
            while at != y {
                let d = dist.get(at, y);
                closer.clear();
                closer.extend(
                    g.adjacency(at)
                        .iter()
                        .filter(|inc| dist.get(inc.neighbor, y) + 1 == d)
                        .map(|inc| (inc.neighbor, inc.edge)),
                );
                let (v, e) = pick(&closer);
                p.push(e);
                at = v;
            }
            paths.push(p);
        }
    }
    paths
}

/// Hop-shortest paths, breaking ties toward the lowest next vertex.
pub fn default_paths(g: &WeightedGraph) -> Result<PathFamily> {
    let dist = g.all_pairs_distances()?;
    let paths = shortest_paths(g, &dist, |c| *c.iter().min().expect("a closer neighbour exists"));
    Ok(PathFamily { n: g.n(), paths })
}

/// Hop-shortest paths with uniformly random tie-breaks.
pub fn random_shortest_paths<R: Rng + ?Sized>(g: &WeightedGraph, rng: &mut R) -> Result<PathFamily> {
    let dist = g.all_pairs_distances()?;
    let paths = shortest_paths(g, &dist, |c| *c.choose(rng).expect("a closer neighbour exists"));
    Ok(PathFamily { n: g.n(), paths })
}

/// Congestion of a path family (diagonal pairs contribute nothing).
pub fn phi(g: &WeightedGraph, paths: &PathFamily) -> f64 {
    let n = g.n();
    let mut load = vec![0.0; g.m()];
    let mut seen = vec![usize::MAX; g.m()];
    for x in 0..n {
        for y in 0..n {
            let p = paths.path(x, y);
            let l = p.len() as f64;
            let pair = x * n + y;
            for &e in p {
                // membership, not multiplicity
                if seen[e] != pair {
                    seen[e] = pair;
                    load[e] += l;
                }
            }
        }
    }
    g.edges()
        .iter()
        .zip(&load)
        .map(|(e, l)| l / (n as f64 * e.w))
        .fold(0.0, f64::max)
}

/// `2 * mean square distance / average weighted degree`.
pub fn phi_lower_bound(g: &WeightedGraph) -> Result<f64> {
    let s = g.stats()?;
    Ok(2.0 * s.mean_square_distance / s.avg_weighted_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn gen(spec: &str) -> WeightedGraph {
        WeightedGraph::generate(&GraphKind::parse(spec).unwrap(), 0).unwrap()
    }

    #[test]
    fn default_path_examples() {
        let k5 = gen("complete:5");
        let p = default_paths(&k5).unwrap();
        assert!((0..5).all(|x| (0..5).all(|y| p.len(x, y) == usize::from(x != y))));
        let p3 = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(default_paths(&p3).unwrap().path(0, 2), &[0, 1]);
        let c4 = WeightedGraph::unweighted(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = default_paths(&c4).unwrap();
        assert_eq!(p.path(0, 2), &[0, 1]);
    }

    #[test]
    fn phi_examples() {
        let k4 = gen("complete:4");
        assert!((phi(&k4, &default_paths(&k4).unwrap()) - 0.5).abs() < 1e-15);
        let p3 = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((phi(&p3, &default_paths(&p3).unwrap()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_examples() {
        assert!((phi_lower_bound(&gen("cycle:4")).unwrap() - 1.5).abs() < 1e-15);
        assert!((phi_lower_bound(&gen("complete:2")).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_lower_bound(&gen("complete:4")).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_families_rejected() {
        let p3 = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let mut paths = default_paths(&p3).unwrap().paths;
        paths[2] = vec![0];
        assert!(PathFamily::new(&p3, paths.clone()).is_err());
        paths[2] = vec![0, 1];
        assert!(PathFamily::new(&p3, paths).is_ok());
    }
}
