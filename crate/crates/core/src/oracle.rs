//! Independent reference computations used to cross-check the main code
//! paths: dense matrix exponentials, Floyd-Warshall distances and brute
//! force over small state spaces. Nothing here is tuned for speed.

use nalgebra::DMatrix;

use crate::graph::WeightedGraph;

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        s += 1;
    }
    let b = a * scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for j in 1..=30 {
        term = &term * &b / j as f64;
        sum += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Dense generator of the single random walk.
pub fn walk_generator(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut q = DMatrix::zeros(n, n);
    for e in g.edges() {
        q[(e.u, e.v)] += e.w;
        q[(e.v, e.u)] += e.w;
        q[(e.u, e.u)] -= e.w;
        q[(e.v, e.v)] -= e.w;
    }
    q
}

/// Hop distances by Floyd-Warshall.
pub fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for e in g.edges() {
        d[e.u][e.v] = 1;
        d[e.v][e.u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

/// Every `k`-subset of `0..n` as a sorted vector.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}
