use nalgebra::DMatrix;

use super::{ProcessKind, StateSpace};
use crate::graph::WeightedGraph;

/// Rate matrix in compressed-row form. Off-diagonal rates are stored per
/// row; the diagonal holds minus the total exit rate, which may exceed the
/// stored row sum when the chain is killed (substochastic).
#[derive(Debug, Clone)]
pub struct SparseGenerator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    diag: Vec<f64>,
    lambda: f64,
}

impl SparseGenerator {
    /// Build from per-row lists of `(column, rate)`; duplicates are merged
    /// and diagonal entries ignored. `kill[i]` is an extra exit rate out of
    /// the state space.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>, kill: Option<&[f64]>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut diag = vec![0.0; dim];
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(j, r)| j != i && r != 0.0);
            row.sort_by_key(|&(j, _)| j);
            let mut exit = 0.0;
            let mut last: Option<usize> = None;
            for (j, r) in row {
                exit += r;
                if last == Some(j) {
                    *rates.last_mut().unwrap() += r;
                } else {
                    cols.push(j as u32);
                    rates.push(r);
                    last = Some(j);
                }
            }
            if let Some(k) = kill {
                exit += k[i];
            }
            diag[i] = -exit;
            row_ptr.push(cols.len());
        }
        let max_exit = diag.iter().fold(0.0f64, |a, &d| a.max(-d));
        let lambda = if max_exit > 0.0 { 1.01 * max_exit } else { 1.0 };
        SparseGenerator {
            dim,
            row_ptr,
            cols,
            rates,
            diag,
            lambda,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Uniformization rate, slightly above the largest exit rate.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.rates[r].iter().copied())
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(p) => self.rates[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, r)| (self.rate(j, i) - r).abs() <= tol))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            m[(i, i)] = self.diag[i];
            for (j, r) in self.row(i) {
                m[(i, j)] = r;
            }
        }
        m
    }

    /// One step of the uniformized kernel `P = I + Q / lambda` acting on a
    /// row vector.
    fn step(&self, v: &[f64], out: &mut [f64]) {
        let inv = 1.0 / self.lambda;
        for (o, (&x, &d)) in out.iter_mut().zip(v.iter().zip(&self.diag)) {
            *o = x * (1.0 + d * inv);
        }
        for i in 0..self.dim {
            let x = v[i];
            if x == 0.0 {
                continue;
            }
            let xi = x * inv;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[p] as usize] += xi * self.rates[p];
            }
        }
    }

    /// `p0 exp(tQ)` by uniformization. The Poisson series is cut once the
    /// remaining tail weight is below `tol`, so the L1 error is at most
    /// `tol` times the mass of `p0` plus roundoff.
    pub fn propagate(&self, p0: &[f64], t: f64, tol: f64) -> Vec<f64> {
        assert_eq!(p0.len(), self.dim);
        if t == 0.0 {
            return p0.to_vec();
        }
        let lt = self.lambda * t;
        // Poisson weights in log space so exp(-lt) cannot underflow to a
        // permanent zero for large lt
        let ln_lt = lt.ln();
        let mut log_w = -lt;
        let mut acc = vec![0.0; self.dim];
        let mut cur = p0.to_vec();
        let mut next = vec![0.0; self.dim];
        let mut k = 0usize;
        loop {
            let w = log_w.exp();
            if w > 0.0 {
                for (a, &c) in acc.iter_mut().zip(&cur) {
                    *a += w * c;
                }
            }
            // tail bound: sum_{j>k} w_j <= w_k * lt / (k + 1 - lt) once k + 1 > lt
            let kf = (k + 1) as f64;
            if kf > lt {
                let tail = w * lt / (kf - lt);
                if tail < tol {
                    break;
                }
            }
            self.step(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            k += 1;
            log_w += ln_lt - (k as f64).ln();
        }
        acc
    }
}

/// Calls `f(target, rate)` for every transition out of `s`. `occ` must be
/// all `None` on entry and is restored on exit.
pub(super) fn for_each_transition(
    g: &WeightedGraph,
    kind: ProcessKind,
    s: &[u32],
    occ: &mut [Option<usize>],
    buf: &mut [u32],
    mut f: impl FnMut(&[u32], f64),
) {
    let k = s.len();
    match kind {
        ProcessKind::Rw | ProcessKind::RwK => {
            for i in 0..k {
                for inc in g.adjacency(s[i] as usize) {
                    buf.copy_from_slice(s);
                    buf[i] = inc.neighbor as u32;
                    f(buf, inc.weight);
                }
            }
        }
        ProcessKind::ExK | ProcessKind::IpK => {
            for (i, &v) in s.iter().enumerate() {
                occ[v as usize] = Some(i);
            }
            for i in 0..k {
                for inc in g.adjacency(s[i] as usize) {
                    buf.copy_from_slice(s);
                    match occ[inc.neighbor] {
                        None => buf[i] = inc.neighbor as u32,
                        // edge between two particles: seen twice, keep once
                        Some(j) if j > i && kind == ProcessKind::IpK => buf.swap(i, j),
                        Some(_) => continue,
                    }
                    if kind == ProcessKind::ExK {
                        buf.sort_unstable();
                    }
                    f(buf, inc.weight);
                }
            }
            for &v in s {
                occ[v as usize] = None;
            }
        }
    }
}

/// Generator of `kind` on the enumerated `space`.
pub(super) fn assemble(g: &WeightedGraph, space: &StateSpace) -> SparseGenerator {
    let mut rows = Vec::with_capacity(space.len());
    let mut buf = vec![0u32; space.k()];
    let mut occ: Vec<Option<usize>> = vec![None; g.n()];
    for s in space.iter() {
        let mut row = Vec::new();
        for_each_transition(g, space.kind(), s, &mut occ, &mut buf, |t, w| {
            row.push((space.index_of_u32(t).expect("state in space"), w));
        });
        rows.push(row);
    }
    SparseGenerator::from_rows(rows, None)
}
