//! Monte Carlo estimates with standard errors, and the quantitative checks
//! built on them: easy-graph verdicts, meeting masses, red decay and the
//! first-depinking tail.

use std::sync::Arc;

use serde::Serialize;

use crate::chameleon::{self, ChameleonState, PinkeningRule, RunOptions, Stop};
use crate::error::{Error, Result};
use crate::exact::{
    self, build_generator, DiscreteDistribution, MeetingChain, ProcessKind, SparseGenerator, StateSpace,
    DEFAULT_STATE_CAP, DEFAULT_TOL, SPECTRAL_LIMIT,
};
use crate::graph::WeightedGraph;
use crate::par;
use crate::rng;
use crate::stream::{self, EdgeSampler};

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub trials: usize,
    pub sigma: f64,
    pub method: &'static str,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            trials: 0,
            sigma: 0.0,
            method: "exact",
        }
    }

    /// Mean of `hits` Bernoulli outcomes out of `trials`.
    pub fn bernoulli(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Estimate {
            value: p,
            trials,
            sigma: (p * (1.0 - p) / trials as f64).sqrt(),
            method: "bernoulli",
        }
    }

    /// Sample mean from the sum and sum of squares.
    pub fn from_moments(sum: f64, sum_sq: f64, trials: usize) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        Estimate {
            value: mean,
            trials,
            sigma: (var / n).sqrt(),
            method: "sample_mean",
        }
    }

    pub fn upper(&self, sigmas: f64) -> f64 {
        self.value + sigmas * self.sigma
    }

    pub fn lower(&self, sigmas: f64) -> f64 {
        self.value - sigmas * self.sigma
    }
}

pub fn empirical_distribution(samples: &[usize], space: Arc<StateSpace>) -> Result<DiscreteDistribution> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let mut counts = vec![0usize; space.len()];
    for &s in samples {
        if s >= counts.len() {
            return Err(Error::IndexOutOfRange {
                index: s,
                size: counts.len(),
            });
        }
        counts[s] += 1;
    }
    let n = samples.len() as f64;
    DiscreteDistribution::new(space, counts.into_iter().map(|c| c as f64 / n).collect())
}

/// `TV(emp, exact)` with `sigma = sqrt(|S| / n)`: the expected TV between an
/// `n`-sample empirical law and its source is at most `sqrt(|S| / n) / 2`,
/// so `sigma` is a conservative scale for "within 3 sigma" checks.
pub fn tv_upper_ci(emp: &DiscreteDistribution, exact: &DiscreteDistribution, n: usize) -> Result<Estimate> {
    let d = exact::tv_distance(emp, exact)?;
    Ok(Estimate {
        value: d,
        trials: n,
        sigma: (emp.space().len() as f64 / n as f64).sqrt(),
        method: "tv_multinomial",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo { trials: usize },
}

/// Threshold factor of the easy-graph definition.
pub const EASY_FACTOR: f64 = 20_000.0;
pub const EASY_LEVEL: f64 = 1.0 / 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct EasyVerdict {
    pub easy: bool,
    pub sup_tail: Estimate,
    pub worst_pair: (usize, usize),
    pub mixing_time: f64,
    pub threshold_time: f64,
}

/// `fT_RW(1/4)` from the exact single-walk chain.
pub fn rw_mixing_time(g: &WeightedGraph, eps: f64) -> Result<f64> {
    let c = build_generator(g, ProcessKind::Rw, 1, DEFAULT_STATE_CAP)?;
    exact::mixing_time(&c, eps, 1e-9)
}

fn meeting_tails(g: &WeightedGraph, t: f64) -> Result<Vec<f64>> {
    let n = g.n();
    if n * (n - 1) > SPECTRAL_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            size: (n * (n - 1)) as u128,
            cap: SPECTRAL_LIMIT,
        });
    }
    MeetingChain::new(g).all_tails(t)
}

/// Is `sup_x P[M(x) > 20000 fT_RW(1/4)] <= 1/8`?
pub fn easy_verdict(g: &WeightedGraph, method: Method, seed: u64) -> Result<EasyVerdict> {
    let t_mix = rw_mixing_time(g, 0.25)?;
    let thr = EASY_FACTOR * t_mix;
    let n = g.n();
    let (sup_tail, worst_pair) = match method {
        Method::Exact => {
            let tails = meeting_tails(g, thr)?;
            let (i, &v) = tails
                .iter()
                .enumerate()
                .filter(|(i, _)| i / n != i % n)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("at least two vertices");
            (Estimate::exact(v), (i / n, i % n))
        }
        Method::MonteCarlo { trials } => {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
            let per_pair = par::map_trials(pairs.len(), |p| {
                let mut r = rng::substream(seed, p as u64);
                let hits = (0..trials)
                    .filter(|_| !stream::meeting_time_with(g, pairs[p], thr, &mut r).met_by(thr))
                    .count();
                Estimate::bernoulli(hits, trials)
            });
            let (i, e) = per_pair
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
                .expect("at least one pair");
            (*e, pairs[i])
        }
    };
    Ok(EasyVerdict {
        easy: sup_tail.value <= EASY_LEVEL,
        sup_tail,
        worst_pair,
        mixing_time: t_mix,
        threshold_time: thr,
    })
}

/// `|V|^-2 sum_{v in V^2} P[M(v) <= t]`, diagonal pairs included.
pub fn average_meeting_mass(g: &WeightedGraph, t: f64, method: Method, seed: u64) -> Result<Estimate> {
    let n = g.n();
    match method {
        Method::Exact => {
            let tails = meeting_tails(g, t)?;
            let met: f64 = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 1.0 - tails[i] }).sum();
            Ok(Estimate::exact(met / (n * n) as f64))
        }
        Method::MonteCarlo { trials } => {
            use rand::Rng;
            let hits = par::fold_trials(
                trials,
                || 0usize,
                |acc, i| {
                    let mut r = rng::substream(seed, i as u64);
                    let x = (r.random_range(0..n), r.random_range(0..n));
                    if stream::meeting_time_with(g, x, t, &mut r).met_by(t) {
                        *acc += 1;
                    }
                },
                |a, b| *a += b,
            );
            Ok(Estimate::bernoulli(hits, trials))
        }
    }
}

/// Outcome of the "symmetric" bound `E[phi(x_t)] <= 8 sqrt(eps) + 9 avg(phi)`
/// for `IP(2)` at `t = fT_RW(eps)`, with `phi(v) = P[M(v) <= 20 fT_RW(1/4)]`.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetricReport {
    pub eps: f64,
    pub time: f64,
    pub max_lhs: f64,
    pub rhs: f64,
    pub worst_start: (usize, usize),
}

pub fn symmetric_lemma_check(g: &WeightedGraph, eps: f64) -> Result<SymmetricReport> {
    let n = g.n();
    let horizon = 20.0 * rw_mixing_time(g, 0.25)?;
    let t = rw_mixing_time(g, eps)?;
    let tails = meeting_tails(g, horizon)?;
    let phi: Vec<f64> = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 1.0 - tails[i] }).collect();
    let avg = phi.iter().sum::<f64>() / (n * n) as f64;
    let chain = build_generator(g, ProcessKind::IpK, 2, DEFAULT_STATE_CAP)?;
    let mut rep = SymmetricReport {
        eps,
        time: t,
        max_lhs: 0.0,
        rhs: 8.0 * eps.sqrt() + 9.0 * avg,
        worst_start: (0, 1),
    };
    for i in 0..chain.len() {
        let law = exact::transition_from_index(&chain, i, t, DEFAULT_TOL)?;
        let lhs: f64 = chain
            .space
            .iter()
            .zip(law.probs())
            .map(|(s, p)| p * phi[s[0] as usize * n + s[1] as usize])
            .sum();
        if lhs > rep.max_lhs {
            rep.max_lhs = lhs;
            let s = chain.space.state(i);
            rep.worst_start = (s[0] as usize, s[1] as usize);
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct RedDecayReport {
    /// Mean `|R|` just before `2T`.
    pub estimate: Estimate,
    pub initial_red: usize,
    /// `(1 - 1/1000) |R|`.
    pub bound: f64,
    /// Fraction of runs with at least one pinkening.
    pub pinkening_rate: Estimate,
    /// Hypotheses of the decay bound that fail for this instance.
    pub violations: Vec<String>,
}

pub const RED_DECAY_C: f64 = 1.0 / 1000.0;

/// `E|R_{2T-}|` over `trials` runs of one round. `ip2_mixing` is
/// `fT_IP(2)(1/4)` when the caller has computed it; without it the phase
/// length hypothesis is reported as unverified.
pub fn red_decay_estimate(
    g: &WeightedGraph,
    s0: &ChameleonState,
    phase_length: f64,
    rule: PinkeningRule,
    ip2_mixing: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<RedDecayReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let n = g.n();
    let [r, p, w] = s0.counts();
    let mut violations = Vec::new();
    if 2 * s0.k() > n {
        violations.push(format!("k = {} exceeds |V|/2", s0.k()));
    }
    if n < 300 {
        violations.push(format!("|V| = {n} is below 300"));
    }
    if !(p < r && r <= w) {
        violations.push(format!("need |P| < |R| <= |W|, got {p}, {r}, {w}"));
    }
    match ip2_mixing {
        Some(m) if phase_length < 20.0 * m => violations.push(format!("T = {phase_length} is below 20 fT_IP(2) = {}", 20.0 * m)),
        Some(_) => {}
        None => violations.push("phase length hypothesis not verified".into()),
    }
    let opts = RunOptions::new(phase_length, Stop::Rounds(1)).rule(rule).counts_only();
    let sampler = EdgeSampler::new(g);
    let (sum, sq, pinkened) = par::fold_trials(
        trials,
        || (0u64, 0u64, 0usize),
        |acc, i| {
            let tr = chameleon::run_chameleon_with(g, &sampler, s0, &opts, rng::substream(seed, i as u64))
                .expect("valid options");
            let red = tr.hat_counts[1][0] as u64;
            acc.0 += red;
            acc.1 += red * red;
            acc.2 += usize::from(tr.pinkenings_per_round[0] > 0);
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
            a.2 += b.2;
        },
    );
    Ok(RedDecayReport {
        estimate: Estimate::from_moments(sum as f64, sq as f64, trials),
        initial_red: r,
        bound: (1.0 - RED_DECAY_C) * r as f64,
        pinkening_rate: Estimate::bernoulli(pinkened, trials),
        violations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DepinkingTail {
    /// `P[D_1 > 2kT]` for `k = 1..=k_max`.
    pub survival: Vec<Estimate>,
    /// Runs with no depinking within `k_max` rounds.
    pub censored: usize,
    /// Smallest `K` with `mean(exp(D_1 / (K T))) <= e`; `None` if censored.
    pub k_hat: Option<f64>,
}

pub fn depinking_tail(
    g: &WeightedGraph,
    s0: &ChameleonState,
    phase_length: f64,
    k_max: u64,
    trials: usize,
    seed: u64,
) -> Result<DepinkingTail> {
    if trials == 0 || k_max == 0 {
        return Err(Error::InvalidArgument("trials and k_max must be positive".into()));
    }
    let opts = RunOptions::new(phase_length, Stop::FirstDepinking { max_rounds: k_max }).counts_only();
    let sampler = EdgeSampler::new(g);
    // first depinking round per run; k_max + 1 marks censoring
    let rounds = par::map_trials(trials, |i| {
        let tr = chameleon::run_chameleon_with(g, &sampler, s0, &opts, rng::substream(seed, i as u64)).expect("valid options");
        tr.depinkings.first().map_or(k_max + 1, |d| d.round)
    });
    let survival = (1..=k_max)
        .map(|k| Estimate::bernoulli(rounds.iter().filter(|&&r| r > k).count(), trials))
        .collect();
    let censored = rounds.iter().filter(|&&r| r > k_max).count();
    let k_hat = (censored == 0).then(|| {
        // D_1 / T = 2 * round; the mean below decreases in K
        let mean = |k: f64| rounds.iter().map(|&r| (2.0 * r as f64 / k).exp()).sum::<f64>() / trials as f64;
        let e = std::f64::consts::E;
        let (mut lo, mut hi) = (1e-6, 1.0);
        while mean(hi) > e {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mean(mid) > e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    });
    Ok(DepinkingTail {
        survival,
        censored,
        k_hat,
    })
}

/// Exact `P[D_1 > 2kT]`, `k = 1..=k_max`, when there is one red and one
/// white vertex (`m = 2`): the first depinking follows the first round with a
/// pinkening. Rounds alternate the interchange law over `T` with a killed
/// chain in which a red/white contact (rate `2 w_e`) ends the run.
pub fn exact_depinking_tail_m2(g: &WeightedGraph, s0: &ChameleonState, phase_length: f64, k_max: u64) -> Result<Vec<f64>> {
    if s0.red.len() != 1 || s0.white.len() != 1 || !s0.pink.is_empty() {
        return Err(Error::InvalidArgument("need exactly one red and one white vertex".into()));
    }
    let n = g.n();
    let chain = build_generator(g, ProcessKind::IpK, n, DEFAULT_STATE_CAP)?;
    let space = &chain.space;
    let mut rows = Vec::with_capacity(chain.len());
    let mut kill = vec![0.0; chain.len()];
    for i in 0..chain.len() {
        let s = space.state(i);
        let mut row = Vec::new();
        for (j, rate) in chain.generator.row(i) {
            let t = space.state(j);
            if t[n - 2] == s[n - 1] && t[n - 1] == s[n - 2] {
                kill[i] += 2.0 * rate;
            } else {
                row.push((j, rate));
            }
        }
        rows.push(row);
    }
    let killed = SparseGenerator::from_rows(rows, Some(&kill));
    let mut start: Vec<usize> = s0.z.clone();
    start.push(s0.red[0]);
    start.push(s0.white[0]);
    let i0 = space.index_of(&start).expect("permutation of the vertices");
    let mut v = vec![0.0; chain.len()];
    v[i0] = 1.0;
    let mut out = Vec::with_capacity(k_max as usize);
    for _ in 0..k_max {
        v = chain.generator.propagate(&v, phase_length, DEFAULT_TOL);
        v = killed.propagate(&v, phase_length, DEFAULT_TOL);
        out.push(v.iter().sum::<f64>().clamp(0.0, 1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    fn gen(spec: &str) -> WeightedGraph {
        WeightedGraph::generate(&GraphKind::parse(spec).unwrap(), 0).unwrap()
    }

    #[test]
    fn empirical_examples() {
        let space = Arc::new(StateSpace::enumerate(4, ProcessKind::Rw, 1, 10).unwrap());
        let d = empirical_distribution(&[2], space.clone()).unwrap();
        assert_eq!(d.probs(), &[0.0, 0.0, 1.0, 0.0]);
        let d = empirical_distribution(&[0, 3], space.clone()).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.0, 0.0, 0.5]);
        assert!(empirical_distribution(&[4], space.clone()).is_err());
        let u = DiscreteDistribution::uniform(space.clone());
        let p = DiscreteDistribution::point_mass(space, 1);
        assert!((tv_upper_ci(&p, &u, 10).unwrap().value - 0.75).abs() < 1e-15);
    }

    #[test]
    fn two_vertices_are_easy() {
        let v = easy_verdict(&gen("complete:2"), Method::Exact, 0).unwrap();
        assert!(v.easy);
        assert!(v.sup_tail.value < 1e-12);
    }

    #[test]
    fn meeting_mass_at_zero() {
        let g = gen("cycle:6");
        let e = average_meeting_mass(&g, 0.0, Method::Exact, 0).unwrap();
        assert!((e.value - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn short_phase_keeps_reds() {
        let g = gen("cycle:8");
        let s0 = ChameleonState::new(8, vec![0], vec![1, 2], vec![], vec![3, 4, 5, 6, 7]).unwrap();
        let r = red_decay_estimate(&g, &s0, 1e-9, PinkeningRule::NoPinkCap, None, 100, 1).unwrap();
        assert_eq!(r.estimate.value, 2.0);
        assert!(!r.violations.is_empty());
    }
}
