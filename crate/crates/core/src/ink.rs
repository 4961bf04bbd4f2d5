//! The discrete ink chain.
//!
//! Sampled at its depinking times, the chameleon ink performs a walk on
//! `0..=m` (with `m = |V| - k + 1`) that moves by `±Δ(a)` with equal
//! probability, `Δ(a) = ceil(min(a, m - a) / 3)`, and is absorbed at `0` and
//! `m`. Conditioning on absorption at `m` (the `Fill` event) gives the Doob
//! transform `q(a, b) = b p(a, b) / a`.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

fn check(a: u64, m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::OutOfRange {
            value: 0,
            what: "m must be at least 1",
        });
    }
    if a > m {
        return Err(Error::OutOfRange {
            value: a as i64,
            what: "ink state above m",
        });
    }
    Ok(())
}

/// `ceil(min(r, m - r) / 3)`.
pub fn delta(r: u64, m: u64) -> Result<u64> {
    check(r, m)?;
    Ok(r.min(m - r).div_ceil(3))
}

/// `p(a, .)` as `(b, probability)` pairs; a point mass at absorbing states.
pub fn step_kernel(a: u64, m: u64) -> Result<Vec<(u64, f64)>> {
    let d = delta(a, m)?;
    Ok(if d == 0 { vec![(a, 1.0)] } else { vec![(a - d, 0.5), (a + d, 0.5)] })
}

/// `q(a, .)` with `q(a, b) = b p(a, b) / a`; undefined at `a = 0`.
pub fn conditioned_kernel(a: u64, m: u64) -> Result<Vec<(u64, f64)>> {
    Ok(conditioned_kernel_exact(a, m)?
        .into_iter()
        .map(|(b, q)| (b, *q.numer() as f64 / *q.denom() as f64))
        .collect())
}

/// [`conditioned_kernel`] in exact rational arithmetic. Zero-mass targets
/// (`b = 0`) are kept so callers can see them.
pub fn conditioned_kernel_exact(a: u64, m: u64) -> Result<Vec<(u64, Ratio<u64>)>> {
    check(a, m)?;
    if a == 0 {
        return Err(Error::OutOfRange {
            value: 0,
            what: "the conditioned kernel is undefined at 0",
        });
    }
    let d = delta(a, m)?;
    if d == 0 {
        return Ok(vec![(a, Ratio::from_integer(1))]);
    }
    Ok(vec![(a - d, Ratio::new(a - d, 2 * a)), (a + d, Ratio::new(a + d, 2 * a))])
}

/// Exact check that every row of `p` has mean `a` and every row of `q` sums
/// to one, for all states of the chain with this `m`.
pub fn kernel_identities_hold(m: u64) -> Result<bool> {
    for a in 0..=m {
        let d = delta(a, m)?;
        // sum_b b p(a, b) = ((a - d) + (a + d)) / 2 in integers
        if d > 0 && (a - d) + (a + d) != 2 * a {
            return Ok(false);
        }
        if a > 0 {
            let s: Ratio<u64> = conditioned_kernel_exact(a, m)?.into_iter().map(|(_, q)| q).sum();
            if s != Ratio::from_integer(1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `P[Fill] = 1 / m` from the start state 1.
pub fn fill_probability(m: u64) -> Result<f64> {
    check(1.min(m), m)?;
    Ok(1.0 / m as f64)
}

/// Absorption probability at `m` from state 1 by solving
/// `h(a) = sum_b p(a, b) h(b)`, `h(0) = 0`, `h(m) = 1` with LU and one step
/// of iterative refinement.
pub fn fill_probability_solve(m: u64) -> Result<f64> {
    check(1.min(m), m)?;
    if m == 1 {
        return Ok(1.0);
    }
    let n = (m + 1) as usize;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..=m {
        let i = s as usize;
        a[(i, i)] = 1.0;
        for (b, p) in step_kernel(s, m)? {
            if b != s {
                a[(i, b as usize)] -= p;
            }
        }
        if s == m {
            rhs[i] = 1.0;
        }
    }
    // absorbing rows have a zero off-diagonal and stay identity rows
    let lu = a.clone().lu();
    let mut h = lu.solve(&rhs).ok_or_else(|| Error::Numerical("singular absorption system".into()))?;
    let resid = &rhs - &a * &h;
    if let Some(c) = lu.solve(&resid) {
        h += c;
    }
    Ok(h[1])
}

/// `sqrt(min(1 - I, I)) / I` with `I = a / m`.
pub fn z_statistic(a: u64, m: u64) -> Result<f64> {
    check(a, m)?;
    if a == 0 {
        return Err(Error::OutOfRange {
            value: 0,
            what: "Z is undefined at zero ink",
        });
    }
    let i = a as f64 / m as f64;
    Ok((1.0 - i).min(i).max(0.0).sqrt() / i)
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub m: u64,
    /// `E[1 - I_l | Fill]`, `l = 0..=L`.
    pub decay: Vec<f64>,
    /// `E[Z_l | Fill]`.
    pub z_mean: Vec<f64>,
    /// `sqrt(m) (71/72)^l`.
    pub bound: Vec<f64>,
}

impl DecayProfile {
    /// Largest `E[Z_l] - (71/72) E[Z_{l-1}]` over `l >= 1`.
    pub fn worst_contraction_excess(&self) -> f64 {
        self.z_mean
            .windows(2)
            .map(|w| w[1] - 71.0 / 72.0 * w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `decay_l - bound_l`.
    pub fn worst_bound_excess(&self) -> f64 {
        self.decay
            .iter()
            .zip(&self.bound)
            .map(|(d, b)| d - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Forward iteration of the conditioned chain from state 1 for `steps`
/// steps.
pub fn conditioned_decay_profile(m: u64, steps: usize) -> Result<DecayProfile> {
    if m < 2 {
        return Err(Error::OutOfRange {
            value: m as i64,
            what: "decay profile needs m >= 2",
        });
    }
    let n = (m + 1) as usize;
    let kernels: Vec<Vec<(u64, f64)>> = (1..=m).map(|a| conditioned_kernel(a, m)).collect::<Result<_>>()?;
    let z: Vec<f64> = (1..=m).map(|a| z_statistic(a, m)).collect::<Result<_>>()?;
    let mut dist = vec![0.0; n];
    dist[1] = 1.0;
    let mut out = DecayProfile {
        m,
        decay: Vec::with_capacity(steps + 1),
        z_mean: Vec::with_capacity(steps + 1),
        bound: Vec::with_capacity(steps + 1),
    };
    let root = (m as f64).sqrt();
    let mf = m as f64;
    let mut next = vec![0.0; n];
    for l in 0..=steps {
        out.decay.push(compensated_sum((1..n).map(|a| dist[a] * (1.0 - a as f64 / mf))));
        out.z_mean.push(compensated_sum((1..n).map(|a| dist[a] * z[a - 1])));
        out.bound.push(root * (71.0f64 / 72.0).powi(l as i32));
        if l == steps {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for a in 1..n {
            if dist[a] == 0.0 {
                continue;
            }
            for &(b, q) in &kernels[a - 1] {
                next[b as usize] += dist[a] * q;
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    Ok(out)
}

/// `max_a E[Z_1 | I_0 = a/m] / Z(a)` over non-absorbed `a`: the one-step
/// contraction factor of the conditioned chain.
pub fn worst_one_step_ratio(m: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in 1..m {
        let za = z_statistic(a, m)?;
        let next = compensated_sum(
            conditioned_kernel(a, m)?
                .into_iter()
                .filter(|&(b, _)| b > 0)
                .map(|(b, q)| q * z_statistic(b, m).expect("b in range")),
        );
        worst = worst.max(next / za);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InkPath {
    pub path: Vec<u64>,
    pub absorbed_at: u64,
}

/// Run the `p`-chain from 1 until absorption.
pub fn simulate_ink<R: Rng + ?Sized>(m: u64, rng: &mut R, cap: u64) -> Result<InkPath> {
    check(1.min(m), m)?;
    let mut a = 1u64;
    let mut path = vec![a];
    let mut steps = 0u64;
    while a != 0 && a != m {
        if steps >= cap {
            return Err(Error::AbsorptionCapExceeded { cap });
        }
        let d = delta(a, m)?;
        a = if rng.random::<bool>() { a + d } else { a - d };
        path.push(a);
        steps += 1;
    }
    Ok(InkPath { path, absorbed_at: a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(delta(1, 10).unwrap(), 1);
        assert_eq!(delta(6, 10).unwrap(), 2);
        assert_eq!(delta(5, 10).unwrap(), 2);
        assert_eq!(delta(0, 10).unwrap(), 0);
        assert_eq!(delta(10, 10).unwrap(), 0);
        assert!(delta(11, 10).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(step_kernel(1, 10).unwrap(), vec![(0, 0.5), (2, 0.5)]);
        assert_eq!(step_kernel(0, 10).unwrap(), vec![(0, 1.0)]);
        assert_eq!(step_kernel(5, 10).unwrap(), vec![(3, 0.5), (7, 0.5)]);
        assert_eq!(conditioned_kernel(1, 10).unwrap(), vec![(0, 0.0), (2, 1.0)]);
        assert_eq!(conditioned_kernel(10, 10).unwrap(), vec![(10, 1.0)]);
        assert_eq!(conditioned_kernel(5, 10).unwrap(), vec![(3, 0.3), (7, 0.7)]);
        assert!(conditioned_kernel(0, 10).is_err());
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_statistic(10, 10).unwrap(), 0.0);
        assert!((z_statistic(1, 2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((z_statistic(1, 37).unwrap() - 37f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fill_examples() {
        assert_eq!(fill_probability(1).unwrap(), 1.0);
        assert_eq!(fill_probability(5).unwrap(), 0.2);
        assert!((fill_probability_solve(100).unwrap() - 0.01).abs() < 1e-12);
        assert_eq!(fill_probability_solve(1).unwrap(), 1.0);
    }

    #[test]
    fn profile_starts_at_known_values() {
        let p = conditioned_decay_profile(50, 3).unwrap();
        assert!((p.decay[0] - (1.0 - 1.0 / 50.0)).abs() < 1e-15);
        assert!((p.z_mean[0] - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_simulations() {
        let mut r = crate::rng::from_seed(1);
        assert_eq!(simulate_ink(1, &mut r, 10).unwrap().absorbed_at, 1);
        let p = simulate_ink(2, &mut r, 10).unwrap();
        assert_eq!(p.path.len(), 2);
    }
}
