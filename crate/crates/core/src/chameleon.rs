//! The chameleon process.
//!
//! A state colours every vertex black (one of the `k - 1` labelled particles
//! `z`), red, pink or white. Time is cut into rounds of length `2T`: a
//! constant-colour phase `((2k-2)T, (2k-1)T]` where every coin-gated
//! transposition simply permutes colours, then a colour-changing phase
//! `((2k-1)T, 2kT]` where a red/white edge turns both endpoints pink while
//! there are fewer pinks than reds or whites. At every boundary `2kT`
//! (including `t = 0`) all pinks turn red or white on a fair coin once
//! `|P| >= min(|R|, |W|)`.
//!
//! Ink is `|R| + |P| / 2`; it only changes at depinkings and is stored in
//! half units so that it is exact.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::par;
use crate::rng::{self, SimRng};
use crate::stream::{EdgeSampler, EventStream, VertexPermutation};

/// A partition `(z, R, P, W)` of the vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChameleonState {
    pub z: Vec<usize>,
    pub red: Vec<usize>,
    pub pink: Vec<usize>,
    pub white: Vec<usize>,
}

impl ChameleonState {
    /// Validates that the four classes partition `0..n`; colour sets are
    /// stored sorted.
    pub fn new(n: usize, z: Vec<usize>, mut red: Vec<usize>, mut pink: Vec<usize>, mut white: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n];
        for &v in z.iter().chain(&red).chain(&pink).chain(&white) {
            if v >= n {
                return Err(Error::InvalidTuple(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::InvalidTuple(format!("vertex {v} appears twice")));
            }
            seen[v] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTuple("classes do not cover every vertex".into()));
        }
        if z.len() + 1 > n {
            return Err(Error::InvalidTuple("at least one vertex must be non-black".into()));
        }
        red.sort_unstable();
        pink.sort_unstable();
        white.sort_unstable();
        Ok(ChameleonState { z, red, pink, white })
    }

    pub fn n(&self) -> usize {
        self.z.len() + self.red.len() + self.pink.len() + self.white.len()
    }

    /// Number of particles of the interchange process this state tracks.
    pub fn k(&self) -> usize {
        self.z.len() + 1
    }

    /// `|V| - k + 1`, the number of non-black vertices.
    pub fn m(&self) -> usize {
        self.red.len() + self.pink.len() + self.white.len()
    }

    pub fn ink_halves(&self) -> usize {
        2 * self.red.len() + self.pink.len()
    }

    pub fn total_ink(&self) -> f64 {
        self.ink_halves() as f64 / 2.0
    }

    pub fn ink_at(&self, v: usize) -> f64 {
        if self.red.binary_search(&v).is_ok() {
            1.0
        } else if self.pink.binary_search(&v).is_ok() {
            0.5
        } else {
            0.0
        }
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.red.len(), self.pink.len(), self.white.len()]
    }

    fn fmt_compact(&self) -> String {
        let j = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("z={};R={};P={};W={}", j(&self.z), j(&self.red), j(&self.pink), j(&self.white))
    }

    fn parse_compact(n: usize, s: &str) -> Result<Self> {
        let mut parts = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (i, (field, tag)) in s.split(';').zip(["z=", "R=", "P=", "W="]).enumerate() {
            let body = field
                .strip_prefix(tag)
                .ok_or_else(|| Error::InvalidArgument(format!("expected `{tag}` in `{s}`")))?;
            for x in body.split(',').filter(|x| !x.is_empty()) {
                parts[i].push(x.parse().map_err(|_| Error::InvalidArgument(format!("bad vertex `{x}`")))?);
            }
        }
        let [z, r, p, w] = parts;
        ChameleonState::new(n, z, r, p, w)
    }
}

/// Prop. 5.4 initial state for the interchange tuple `x`: the first `k - 1`
/// coordinates are black, the last is red, the rest white.
pub fn init_chameleon(g: &WeightedGraph, x: &[usize]) -> Result<ChameleonState> {
    let n = g.n();
    if x.is_empty() {
        return Err(Error::InvalidTuple("empty tuple".into()));
    }
    if x.len() >= n {
        return Err(Error::InvalidTuple(format!("k = {} leaves no white vertex on {n} vertices", x.len())));
    }
    let mut taken = vec![false; n];
    for &v in x {
        if v >= n || taken[v] {
            return Err(Error::InvalidTuple(format!("{x:?} is not a tuple of distinct vertices")));
        }
        taken[v] = true;
    }
    let (z, last) = x.split_at(x.len() - 1);
    let white = (0..n).filter(|&v| !taken[v]).collect();
    ChameleonState::new(n, z.to_vec(), last.to_vec(), Vec::new(), white)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinkeningRule {
    /// Pinken only while `|P| < min(|R|, |W|)`.
    Standard,
    /// Pinken on every red/white contact in a colour-changing phase.
    NoPinkCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Run exactly this many rounds.
    Rounds(u64),
    /// Stop at the first depinking, or after `max_rounds` rounds.
    FirstDepinking { max_rounds: u64 },
    /// Run until the ink is absorbed at 0 or `m`.
    UntilAbsorbed { cap: u64 },
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub phase_length: f64,
    pub stop: Stop,
    pub rule: PinkeningRule,
    /// Keep every event, pinkening and phase-boundary snapshot.
    pub full: bool,
    /// Only colour counts are needed; once pinkening can no longer occur in
    /// the final round the remaining events are skipped.
    pub counts_only: bool,
    /// Times at which to snapshot the state (sorted on entry).
    pub observe: Vec<f64>,
}

impl RunOptions {
    pub fn new(phase_length: f64, stop: Stop) -> Self {
        RunOptions {
            phase_length,
            stop,
            rule: PinkeningRule::Standard,
            full: false,
            counts_only: false,
            observe: Vec::new(),
        }
    }

    pub fn full(mut self) -> Self {
        self.full = true;
        self
    }

    pub fn rule(mut self, rule: PinkeningRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn counts_only(mut self) -> Self {
        self.counts_only = true;
        self
    }

    pub fn observe(mut self, times: &[f64]) -> Self {
        self.observe = times.to_vec();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FillStatus {
    Filled,
    Emptied,
    Running,
}

impl FillStatus {
    fn name(&self) -> &'static str {
        match self {
            FillStatus::Filled => "filled",
            FillStatus::Emptied => "emptied",
            FillStatus::Running => "running",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Depinking {
    pub time: f64,
    /// Boundary index: the depinking happened at `2 * round * T`.
    pub round: u64,
    /// `true`: pinks turned red.
    pub coin: bool,
    pub ink_halves_after: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pinkening {
    pub time: f64,
    pub red: usize,
    pub white: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub edge: usize,
    pub coin: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChameleonTrace {
    pub n: usize,
    pub phase_length: f64,
    pub rule: PinkeningRule,
    pub initial: ChameleonState,
    pub rounds: u64,
    /// Colour counts `[|R|, |P|, |W|]` just before each boundary `2kT`,
    /// `k = 0..=rounds` (index 0 is the initial state).
    pub hat_counts: Vec<[usize; 3]>,
    pub pinkenings_per_round: Vec<u32>,
    pub depinkings: Vec<Depinking>,
    pub fill: FillStatus,
    /// Snapshots at the requested observation times.
    pub observations: Vec<(f64, ChameleonState)>,
    /// `None` when the run skipped trailing events (`counts_only`).
    pub final_state: Option<ChameleonState>,
    /// Full recording only: snapshots at every `iT` (after the depinking
    /// test at even `i`), hat states, pinkenings and events.
    pub boundary_states: Vec<ChameleonState>,
    pub hat_states: Vec<ChameleonState>,
    pub pinkenings: Vec<Pinkening>,
    pub events: Vec<Event>,
}

impl ChameleonTrace {
    pub fn m(&self) -> usize {
        self.initial.m()
    }

    /// Total ink after each depinking.
    pub fn ink_path(&self) -> Vec<f64> {
        self.depinkings.iter().map(|d| d.ink_halves_after as f64 / 2.0).collect()
    }

    pub fn depinking_times(&self) -> Vec<f64> {
        self.depinkings.iter().map(|d| d.time).collect()
    }

    pub fn depinking_coins(&self) -> Vec<bool> {
        self.depinkings.iter().map(|d| d.coin).collect()
    }

    pub fn end_time(&self) -> f64 {
        2.0 * self.rounds as f64 * self.phase_length
    }

    /// Line records `type time payload`; requires a full recording.
    pub fn to_export(&self) -> Result<String> {
        if !self.full_recording() {
            return Err(Error::InvalidArgument("export needs a full recording".into()));
        }
        let rule = match self.rule {
            PinkeningRule::Standard => "standard",
            PinkeningRule::NoPinkCap => "no_pink_cap",
        };
        let mut out = String::new();
        let _ = writeln!(out, "header 0 n={} T={} rule={}", self.n, self.phase_length, rule);
        let _ = writeln!(out, "init 0 {}", self.initial.fmt_compact());
        let mut pk = self.pinkenings.iter().peekable();
        let mut dp = self.depinkings.iter().peekable();
        // depinking at 0 precedes all events
        while let Some(d) = dp.next_if(|d| d.round == 0) {
            let _ = writeln!(out, "depink 0 {} {}", u8::from(d.coin), d.ink_halves_after);
        }
        for (i, s) in self.hat_counts.iter().enumerate().skip(1) {
            let lo = (2 * (i - 1)) as f64 * self.phase_length;
            let hi = (2 * i) as f64 * self.phase_length;
            for e in self.events.iter().filter(|e| e.time > lo && e.time <= hi) {
                let _ = writeln!(out, "event {} {} {}", e.time, e.edge, u8::from(e.coin));
                if let Some(p) = pk.next_if(|p| p.time == e.time) {
                    let _ = writeln!(out, "pinken {} {} {}", p.time, p.red, p.white);
                }
            }
            let _ = writeln!(out, "hat {} {} {} {}", hi, s[0], s[1], s[2]);
            if let Some(d) = dp.next_if(|d| d.round == i as u64) {
                let _ = writeln!(out, "depink {} {} {}", d.time, u8::from(d.coin), d.ink_halves_after);
            }
        }
        let _ = writeln!(out, "end {} {} {}", self.end_time(), self.rounds, self.fill.name());
        Ok(out)
    }

    fn full_recording(&self) -> bool {
        !self.boundary_states.is_empty()
    }
}

/// Re-run an exported trace from its recorded events and coins.
pub fn replay_export(g: &WeightedGraph, text: &str) -> Result<ChameleonTrace> {
    let bad = |line: usize, msg: &str| Error::Parse {
        line: line + 1,
        msg: msg.to_string(),
    };
    let mut phase_length = None;
    let mut rule = PinkeningRule::Standard;
    let mut initial = None;
    let mut events = Vec::new();
    let mut coins = Vec::new();
    let mut rounds = None;
    for (ln, line) in text.lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 2 {
            return Err(bad(ln, "expected `type time payload`"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad integer"));
        match f[0] {
            "header" => {
                for kv in &f[2..] {
                    match kv.split_once('=') {
                        Some(("T", v)) => phase_length = Some(num(v)?),
                        Some(("rule", "standard")) => rule = PinkeningRule::Standard,
                        Some(("rule", "no_pink_cap")) => rule = PinkeningRule::NoPinkCap,
                        Some(("n", v)) if int(v)? == g.n() => {}
                        _ => return Err(bad(ln, "bad header field")),
                    }
                }
            }
            "init" => initial = Some(ChameleonState::parse_compact(g.n(), f.get(2).copied().unwrap_or(""))?),
            "event" if f.len() == 4 => events.push(Event {
                time: num(f[1])?,
                edge: int(f[2])?,
                coin: f[3] == "1",
            }),
            "depink" if f.len() == 4 => coins.push(f[2] == "1"),
            "pinken" | "hat" => {}
            "end" if f.len() == 4 => rounds = Some(int(f[2])? as u64),
            _ => return Err(bad(ln, "unknown record")),
        }
    }
    let phase_length = phase_length.ok_or_else(|| bad(0, "missing header"))?;
    let initial = initial.ok_or_else(|| bad(0, "missing init record"))?;
    let rounds = rounds.ok_or_else(|| bad(0, "missing end record"))?;
    if events.iter().any(|e| e.edge >= g.m()) {
        return Err(Error::InvalidArgument("event edge out of range".into()));
    }
    let opts = RunOptions::new(phase_length, Stop::Rounds(rounds)).rule(rule).full();
    let mut src = Recorded {
        events,
        next: 0,
        coins,
        next_coin: 0,
    };
    run_with(g, &initial, &opts, &mut src)
}

/// Where a run takes its randomness from.
trait Source {
    /// Events in `(start, end]`, in time order.
    fn phase(&mut self, start: f64, end: f64, constant: bool, out: &mut Vec<Event>);
    fn coin(&mut self) -> Result<bool>;
}

struct Random<'a> {
    rng: SimRng,
    sampler: &'a EdgeSampler,
    all: Poisson<f64>,
    fired: Poisson<f64>,
    times: bool,
    thin: bool,
}

impl Source for Random<'_> {
    fn phase(&mut self, start: f64, end: f64, constant: bool, out: &mut Vec<Event>) {
        out.clear();
        // in a constant-colour phase only coin-1 events act; they form a
        // Poisson process of rate W, so summaries can skip the others
        let thinned = constant && self.thin;
        let count = if thinned { self.fired.sample(&mut self.rng) } else { self.all.sample(&mut self.rng) } as usize;
        for _ in 0..count {
            let time = if self.times {
                end - (end - start) * self.rng.random::<f64>()
            } else {
                f64::NAN
            };
            let edge = self.sampler.sample(&mut self.rng);
            let coin = thinned || self.rng.random::<bool>();
            out.push(Event { time, edge, coin });
        }
        if self.times {
            out.sort_by(|a, b| a.time.total_cmp(&b.time));
        }
    }

    fn coin(&mut self) -> Result<bool> {
        Ok(self.rng.random::<bool>())
    }
}

struct Recorded {
    events: Vec<Event>,
    next: usize,
    coins: Vec<bool>,
    next_coin: usize,
}

impl Source for Recorded {
    fn phase(&mut self, _start: f64, end: f64, _constant: bool, out: &mut Vec<Event>) {
        out.clear();
        while self.next < self.events.len() && self.events[self.next].time <= end {
            out.push(self.events[self.next]);
            self.next += 1;
        }
    }

    fn coin(&mut self) -> Result<bool> {
        let c = self
            .coins
            .get(self.next_coin)
            .copied()
            .ok_or_else(|| Error::InvalidArgument("recorded trace ran out of depinking coins".into()))?;
        self.next_coin += 1;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    Black(u32),
    Red,
    Pink,
    White,
}

struct Live {
    color: Vec<Color>,
    z: Vec<usize>,
    nr: usize,
    np: usize,
    nw: usize,
}

impl Live {
    fn new(s: &ChameleonState) -> Self {
        let mut color = vec![Color::White; s.n()];
        for (i, &v) in s.z.iter().enumerate() {
            color[v] = Color::Black(i as u32);
        }
        for &v in &s.red {
            color[v] = Color::Red;
        }
        for &v in &s.pink {
            color[v] = Color::Pink;
        }
        Live {
            color,
            z: s.z.clone(),
            nr: s.red.len(),
            np: s.pink.len(),
            nw: s.white.len(),
        }
    }

    fn snapshot(&self) -> ChameleonState {
        let mut s = ChameleonState {
            z: self.z.clone(),
            red: Vec::with_capacity(self.nr),
            pink: Vec::with_capacity(self.np),
            white: Vec::with_capacity(self.nw),
        };
        for (v, c) in self.color.iter().enumerate() {
            match c {
                Color::Black(_) => {}
                Color::Red => s.red.push(v),
                Color::Pink => s.pink.push(v),
                Color::White => s.white.push(v),
            }
        }
        s
    }

    fn counts(&self) -> [usize; 3] {
        [self.nr, self.np, self.nw]
    }

    fn ink_halves(&self) -> usize {
        2 * self.nr + self.np
    }

    #[inline]
    fn transpose(&mut self, u: usize, v: usize) {
        let (cu, cv) = (self.color[u], self.color[v]);
        if cu == cv {
            return;
        }
        self.color[u] = cv;
        self.color[v] = cu;
        if let Color::Black(i) = cv {
            self.z[i as usize] = u;
        }
        if let Color::Black(i) = cu {
            self.z[i as usize] = v;
        }
    }

    fn may_pinken(&self, rule: PinkeningRule) -> bool {
        match rule {
            PinkeningRule::Standard => self.np < self.nr.min(self.nw),
            PinkeningRule::NoPinkCap => self.nr > 0 && self.nw > 0,
        }
    }

    fn depinking_due(&self) -> bool {
        self.np >= self.nr.min(self.nw)
    }

    fn depink(&mut self, to_red: bool) {
        let target = if to_red { Color::Red } else { Color::White };
        for c in self.color.iter_mut() {
            if *c == Color::Pink {
                *c = target;
            }
        }
        if to_red {
            self.nr += self.np;
        } else {
            self.nw += self.np;
        }
        self.np = 0;
    }

    fn fill(&self) -> FillStatus {
        if self.np == 0 && self.nw == 0 {
            FillStatus::Filled
        } else if self.np == 0 && self.nr == 0 {
            FillStatus::Emptied
        } else {
            FillStatus::Running
        }
    }

    #[cfg(debug_assertions)]
    fn check(&self) {
        let (mut r, mut p, mut w) = (0, 0, 0);
        for (v, c) in self.color.iter().enumerate() {
            match c {
                Color::Black(i) => assert_eq!(self.z[*i as usize], v),
                Color::Red => r += 1,
                Color::Pink => p += 1,
                Color::White => w += 1,
            }
        }
        assert_eq!((r, p, w), (self.nr, self.np, self.nw));
    }

    #[cfg(not(debug_assertions))]
    fn check(&self) {}
}

pub fn run_chameleon(g: &WeightedGraph, s0: &ChameleonState, opts: &RunOptions, seed: u64) -> Result<ChameleonTrace> {
    let sampler = EdgeSampler::new(g);
    run_chameleon_with(g, &sampler, s0, opts, rng::from_seed(seed))
}

/// As [`run_chameleon`] with a shared edge sampler and an explicit RNG.
pub fn run_chameleon_with(
    g: &WeightedGraph,
    sampler: &EdgeSampler,
    s0: &ChameleonState,
    opts: &RunOptions,
    rng: SimRng,
) -> Result<ChameleonTrace> {
    let t = opts.phase_length;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument("phase length must be positive".into()));
    }
    let w = g.total_weight();
    let mut src = Random {
        rng,
        sampler,
        all: Poisson::new(2.0 * w * t).map_err(|e| Error::InvalidArgument(e.to_string()))?,
        fired: Poisson::new(w * t).map_err(|e| Error::InvalidArgument(e.to_string()))?,
        times: opts.full || !opts.observe.is_empty(),
        thin: !opts.full,
    };
    run_with(g, s0, opts, &mut src)
}

fn run_with<S: Source>(g: &WeightedGraph, s0: &ChameleonState, opts: &RunOptions, src: &mut S) -> Result<ChameleonTrace> {
    let n = g.n();
    ChameleonState::new(n, s0.z.clone(), s0.red.clone(), s0.pink.clone(), s0.white.clone())?;
    let t = opts.phase_length;
    let mut observe = opts.observe.clone();
    observe.sort_by(f64::total_cmp);
    if observe.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidArgument("observation times must be finite and non-negative".into()));
    }
    if !observe.is_empty() && (opts.counts_only || !matches!(opts.stop, Stop::Rounds(_))) {
        return Err(Error::InvalidArgument("observations need a fixed round count and full state".into()));
    }
    // rounds needed to cover the last observation
    let obs_rounds = observe.last().map_or(0, |&x| (x / (2.0 * t)).ceil() as u64);
    let (max_rounds, stop_at_depinking, stop_at_absorption) = match opts.stop {
        Stop::Rounds(r) => (r.max(obs_rounds), false, false),
        Stop::FirstDepinking { max_rounds } => (max_rounds, true, false),
        Stop::UntilAbsorbed { cap } => (cap, false, true),
    };

    let mut live = Live::new(s0);
    let mut tr = ChameleonTrace {
        n,
        phase_length: t,
        rule: opts.rule,
        initial: s0.clone(),
        rounds: 0,
        hat_counts: vec![live.counts()],
        pinkenings_per_round: Vec::new(),
        depinkings: Vec::new(),
        fill: FillStatus::Running,
        observations: Vec::new(),
        final_state: None,
        boundary_states: Vec::new(),
        hat_states: Vec::new(),
        pinkenings: Vec::new(),
        events: Vec::new(),
    };
    let mut next_obs = 0;
    macro_rules! observe_before {
        ($time:expr) => {
            while next_obs < observe.len() && observe[next_obs] < $time {
                tr.observations.push((observe[next_obs], live.snapshot()));
                next_obs += 1;
            }
        };
    }

    // boundary 0
    if opts.full {
        tr.hat_states.push(live.snapshot());
    }
    let mut depinked = false;
    if live.depinking_due() {
        let coin = src.coin()?;
        live.depink(coin);
        tr.depinkings.push(Depinking {
            time: 0.0,
            round: 0,
            coin,
            ink_halves_after: live.ink_halves(),
        });
        depinked = true;
    }
    tr.fill = live.fill();
    if opts.full {
        tr.boundary_states.push(live.snapshot());
    }
    let done = |depinked: bool, fill: FillStatus, round: u64| {
        round >= max_rounds
            || (stop_at_depinking && depinked)
            || (stop_at_absorption && fill != FillStatus::Running)
    };
    if done(depinked, tr.fill, 0) && next_obs == observe.len() {
        tr.final_state = Some(live.snapshot());
        return Ok(tr);
    }

    let mut buf = Vec::new();
    let mut round = 0u64;
    loop {
        round += 1;
        let start = (2 * (round - 1)) as f64 * t;
        let mid = start + t;
        let end = mid + t;

        src.phase(start, mid, true, &mut buf);
        for ev in &buf {
            observe_before!(ev.time);
            if ev.coin {
                let e = g.edge(ev.edge);
                live.transpose(e.u, e.v);
            }
        }
        if opts.full {
            tr.events.extend_from_slice(&buf);
        }
        observe_before!(mid);
        live.check();
        if opts.full {
            tr.boundary_states.push(live.snapshot());
        }

        // a round is final when its boundary cannot be followed by another
        let last_round = round >= max_rounds || stop_at_depinking;
        let mut pinkened = 0u32;
        src.phase(mid, end, false, &mut buf);
        for ev in &buf {
            if opts.counts_only && last_round && !live.may_pinken(opts.rule) {
                break;
            }
            observe_before!(ev.time);
            let e = g.edge(ev.edge);
            let (cu, cv) = (live.color[e.u], live.color[e.v]);
            let red_white = matches!((cu, cv), (Color::Red, Color::White) | (Color::White, Color::Red));
            if red_white && live.may_pinken(opts.rule) {
                let (r, w) = if cu == Color::Red { (e.u, e.v) } else { (e.v, e.u) };
                live.color[r] = Color::Pink;
                live.color[w] = Color::Pink;
                live.nr -= 1;
                live.nw -= 1;
                live.np += 2;
                pinkened += 1;
                if opts.full {
                    tr.pinkenings.push(Pinkening {
                        time: ev.time,
                        red: r,
                        white: w,
                    });
                }
            } else if ev.coin {
                live.transpose(e.u, e.v);
            }
        }
        if opts.full {
            tr.events.extend_from_slice(&buf);
        }
        observe_before!(end);
        live.check();
        tr.pinkenings_per_round.push(pinkened);
        tr.hat_counts.push(live.counts());
        if opts.full {
            tr.hat_states.push(live.snapshot());
        }

        let mut depinked = false;
        if live.depinking_due() {
            let coin = src.coin()?;
            live.depink(coin);
            tr.depinkings.push(Depinking {
                time: end,
                round,
                coin,
                ink_halves_after: live.ink_halves(),
            });
            depinked = true;
        }
        tr.fill = live.fill();
        if opts.full {
            tr.boundary_states.push(live.snapshot());
        }
        tr.rounds = round;
        if done(depinked, tr.fill, round) && next_obs == observe.len() {
            break;
        }
        if stop_at_absorption && round >= max_rounds {
            return Err(Error::AbsorptionCapExceeded { cap: max_rounds });
        }
        if round >= max_rounds && next_obs < observe.len() {
            // observations exactly at the final boundary
            observe_before!(f64::INFINITY);
            break;
        }
    }
    let skipped = opts.counts_only;
    tr.final_state = (!skipped).then(|| live.snapshot());
    Ok(tr)
}

/// One hat-chain entry: the state just before the boundary `2kT`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatEntry {
    pub round: u64,
    pub counts: [usize; 3],
    pub ink_halves: usize,
    pub state: Option<ChameleonState>,
}

pub fn hat_chain(trace: &ChameleonTrace) -> Vec<HatEntry> {
    trace
        .hat_counts
        .iter()
        .enumerate()
        .map(|(k, c)| HatEntry {
            round: k as u64,
            counts: *c,
            ink_halves: 2 * c[0] + c[1],
            state: trace.hat_states.get(k).cloned(),
        })
        .collect()
}

/// Check that every constant-colour phase moved the four classes by the
/// interval map of the recorded stream.
pub fn constant_phase_replay_check(g: &WeightedGraph, trace: &ChameleonTrace) -> Result<bool> {
    if !trace.full_recording() {
        return Err(Error::InvalidArgument("replay needs a full recording".into()));
    }
    let t = trace.phase_length;
    let horizon = trace.end_time().max(t);
    let mut last = 0.0;
    let mut events = Vec::with_capacity(trace.events.len());
    for e in &trace.events {
        // uniform times may tie only with probability zero
        if e.time > last {
            events.push((e.time, e.edge, Some(e.coin)));
            last = e.time;
        }
    }
    let stream = EventStream::from_events(g, horizon, true, events)?;
    for r in 0..trace.rounds as usize {
        let before = &trace.boundary_states[2 * r];
        let after = &trace.boundary_states[2 * r + 1];
        let a = (2 * r) as f64 * t;
        let p = stream.interval_map(g, a, a + t, true)?;
        if map_state(&p, before) != *after {
            return Ok(false);
        }
    }
    Ok(true)
}

fn map_state(p: &VertexPermutation, s: &ChameleonState) -> ChameleonState {
    let sorted = |v: &[usize]| {
        let mut out: Vec<usize> = v.iter().map(|&x| p.apply(x)).collect();
        out.sort_unstable();
        out
    };
    ChameleonState {
        z: s.z.iter().map(|&x| p.apply(x)).collect(),
        red: sorted(&s.red),
        pink: sorted(&s.pink),
        white: sorted(&s.white),
    }
}

/// First contacts in a colour-changing window: `phi[a]` is the first event
/// time whose edge contains `a`, and `partner[a]` the vertex whose particle
/// sits at the other endpoint just before, under the coin-gated flow started
/// at the window's left end.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstContactRecord {
    pub phi: Vec<Option<f64>>,
    pub partner: Vec<Option<usize>>,
}

/// Window `((2k - 1)T, 2kT]` of a modified stream.
pub fn first_contact_partners(stream: &EventStream, g: &WeightedGraph, phase: u64, t: f64) -> Result<FirstContactRecord> {
    if phase == 0 {
        return Err(Error::InvalidArgument("phase index starts at 1".into()));
    }
    if !stream.is_modified() {
        return Err(Error::InvalidArgument("first contacts need a modified stream".into()));
    }
    let lo = (2 * phase - 1) as f64 * t;
    let window = stream.window(lo, lo + t)?;
    let n = g.n();
    let mut rec = FirstContactRecord {
        phi: vec![None; n],
        partner: vec![None; n],
    };
    let mut flow = VertexPermutation::identity(n);
    for i in window {
        let e = g.edge(stream.edge_marks()[i]);
        for (a, other) in [(e.u, e.v), (e.v, e.u)] {
            if rec.phi[a].is_none() {
                rec.phi[a] = Some(stream.times()[i]);
                rec.partner[a] = Some(flow.apply_inverse(other));
            }
        }
        if stream.fires(i, true) {
            flow.then_transpose(e.u, e.v);
        }
    }
    Ok(rec)
}

/// Worst standardized excess of `P[F_a = b, F_a' = b]` over
/// `P[F_a = a', F_a' = b] + P[F_a' = a, F_a = b]` across triples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CollisionReport {
    pub trials: usize,
    pub max_excess_sigmas: f64,
    pub worst_triple: (usize, usize, usize),
    pub max_lhs: f64,
}

pub fn collision_claim_check(g: &WeightedGraph, t: f64, trials: usize, seed: u64) -> Result<CollisionReport> {
    let n = g.n();
    if n < 3 {
        return Err(Error::GraphTooSmall(n));
    }
    let cells = n * n * n;
    // per triple (a, a', b): sum and sum of squares of
    // 1{F_a = b, F_a' = b} - 1{F_a = a', F_a' = b} - 1{F_a' = a, F_a = b}
    // plus the LHS frequency
    let (sum, sq, lhs) = par::fold_trials(
        trials,
        || (vec![0i64; cells], vec![0i64; cells], vec![0u64; cells]),
        |acc, i| {
            let s = EventStream::sample(g, 2.0 * t, true, rng::mix(seed, i as u64)).expect("positive horizon");
            let f = first_contact_partners(&s, g, 1, t).expect("window inside horizon").partner;
            for a in 0..n {
                for a2 in 0..n {
                    if a2 == a {
                        continue;
                    }
                    for b in 0..n {
                        if b == a || b == a2 {
                            continue;
                        }
                        let l = f[a] == Some(b) && f[a2] == Some(b);
                        let r1 = f[a] == Some(a2) && f[a2] == Some(b);
                        let r2 = f[a2] == Some(a) && f[a] == Some(b);
                        let d = i64::from(l) - i64::from(r1) - i64::from(r2);
                        if d != 0 || l {
                            let c = (a * n + a2) * n + b;
                            acc.0[c] += d;
                            acc.1[c] += d * d;
                            acc.2[c] += u64::from(l);
                        }
                    }
                }
            }
        },
        |a, b| {
            for c in 0..cells {
                a.0[c] += b.0[c];
                a.1[c] += b.1[c];
                a.2[c] += b.2[c];
            }
        },
    );
    let nt = trials as f64;
    let mut rep = CollisionReport {
        trials,
        max_excess_sigmas: f64::NEG_INFINITY,
        worst_triple: (0, 1, 2),
        max_lhs: 0.0,
    };
    for c in 0..cells {
        let (a, a2, b) = (c / (n * n), c / n % n, c % n);
        if a == a2 || b == a || b == a2 {
            continue;
        }
        let mean = sum[c] as f64 / nt;
        let var = (sq[c] as f64 / nt - mean * mean).max(0.0);
        let sigma = (var / nt).sqrt().max(1.0 / nt);
        let z = mean / sigma;
        if z > rep.max_excess_sigmas {
            rep.max_excess_sigmas = z;
            rep.worst_triple = (a, a2, b);
        }
        rep.max_lhs = rep.max_lhs.max(lhs[c] as f64 / nt);
    }
    Ok(rep)
}

/// Monte Carlo check of `P[x_t = (c, b)] = E[ink_t(b) 1{z_t = c}]` against
/// the exact interchange law.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub trials: usize,
    pub times: Vec<f64>,
    /// Worst `|estimate - exact| / sigma` over all cells and times.
    pub max_standardized: f64,
    pub max_abs_deviation: f64,
    pub cells: usize,
}

pub fn identity_check(
    g: &WeightedGraph,
    x: &[usize],
    times: &[f64],
    phase_length: f64,
    trials: usize,
    seed: u64,
) -> Result<IdentityReport> {
    use crate::exact::{build_generator, transition_distribution, ProcessKind, DEFAULT_STATE_CAP, DEFAULT_TOL};
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let s0 = init_chameleon(g, x)?;
    let chain = build_generator(g, ProcessKind::IpK, x.len(), DEFAULT_STATE_CAP)?;
    let dim = chain.len();
    let exact: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| transition_distribution(&chain, x, t, DEFAULT_TOL).map(|d| d.probs().to_vec()))
        .collect::<Result<_>>()?;
    let opts = RunOptions::new(phase_length, Stop::Rounds(0)).observe(times);
    let sampler = EdgeSampler::new(g);
    let space = &chain.space;
    let nt = times.len();
    // ink values are multiples of 1/2, so work in half units
    let (sum, sq) = par::fold_trials(
        trials,
        || (vec![0u64; nt * dim], vec![0u64; nt * dim]),
        |acc, i| {
            let tr = run_chameleon_with(g, &sampler, &s0, &opts, rng::substream(seed, i as u64))
                .expect("valid options");
            let mut tuple = Vec::with_capacity(x.len());
            for (ti, (_, st)) in tr.observations.iter().enumerate() {
                for (b, h) in st.red.iter().map(|&b| (b, 2u64)).chain(st.pink.iter().map(|&b| (b, 1u64))) {
                    tuple.clear();
                    tuple.extend_from_slice(&st.z);
                    tuple.push(b);
                    let c = ti * dim + space.index_of(&tuple).expect("tuple of distinct vertices");
                    acc.0[c] += h;
                    acc.1[c] += h * h;
                }
            }
        },
        |a, b| {
            for c in 0..a.0.len() {
                a.0[c] += b.0[c];
                a.1[c] += b.1[c];
            }
        },
    );
    let n = trials as f64;
    let mut rep = IdentityReport {
        trials,
        times: times.to_vec(),
        max_standardized: 0.0,
        max_abs_deviation: 0.0,
        cells: nt * dim,
    };
    for ti in 0..nt {
        for j in 0..dim {
            let c = ti * dim + j;
            let mean = sum[c] as f64 / (2.0 * n);
            let var = (sq[c] as f64 / (4.0 * n) - mean * mean).max(0.0);
            let sigma = (var / n).sqrt().max(1.0 / n);
            let dev = (mean - exact[ti][j]).abs();
            rep.max_abs_deviation = rep.max_abs_deviation.max(dev);
            rep.max_standardized = rep.max_standardized.max(dev / sigma);
        }
    }
    Ok(rep)
}
