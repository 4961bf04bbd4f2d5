use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use excl_core::bounds;
use excl_core::chameleon::{self, ChameleonState, RunOptions, Stop};
use excl_core::estimators::{self, Estimate, Method};
use excl_core::exact::{self, build_generator, ProcessKind, SpectralPropagator, DEFAULT_TOL};
use excl_core::ink;
use excl_core::stream::{self, EdgeSampler, EventStream, ParticleState};
use excl_core::verify::{self, Status, SuiteOptions};
use excl_core::{par, rng, WeightedGraph};
use serde::Serialize;

use crate::cells;
use crate::config::{Config, MethodChoice};
use crate::output::{self, Csv};

/// What a command did: the files it wrote and whether an asserted check
/// failed.
pub struct Report {
    pub files: Vec<String>,
    pub failed: bool,
}

struct Ctx<'a> {
    cfg: &'a Config,
    hash: String,
    out: &'a Path,
    files: Vec<String>,
}

impl Ctx<'_> {
    fn csv(&self, columns: &[&str]) -> Csv {
        Csv::new(&self.hash, self.cfg.seed, columns)
    }

    fn save(&mut self, csv: &Csv, name: &str) -> Result<()> {
        self.files.push(csv.write(self.out, name)?.display().to_string());
        Ok(())
    }

    fn save_json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        let p = output::write_json(self.out, name, &self.hash, self.cfg.seed, body)?;
        self.files.push(p.display().to_string());
        Ok(())
    }
}

pub fn run(command: &str, cfg: &Config) -> Result<Report> {
    let g = cfg.load_graph()?;
    let out = Path::new(&cfg.out);
    let mut ctx = Ctx {
        cfg,
        hash: cfg.hash(command),
        out,
        files: Vec::new(),
    };
    let failed = match command {
        "exact-mix" => exact_mix(&mut ctx, &g)?,
        "simulate" => simulate(&mut ctx, &g)?,
        "chameleon-check" => chameleon_check(&mut ctx, &g)?,
        "ink-chain" => ink_chain(&mut ctx)?,
        "meeting" => meeting(&mut ctx, &g)?,
        "easy-test" => easy_test(&mut ctx, &g)?,
        "phi-bound" => phi_bound(&mut ctx, &g)?,
        "red-decay" => red_decay(&mut ctx, &g)?,
        "verify" => run_verify(&mut ctx)?,
        other => bail!("unknown subcommand {other}"),
    };
    Ok(Report { files: ctx.files, failed })
}

fn k_for(kind: ProcessKind, k: usize) -> usize {
    if kind == ProcessKind::Rw {
        1
    } else {
        k
    }
}

fn exact_mix(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let mut csv = ctx.csv(&["process", "k", "eps", "mixing_time"]);
    for &kind in &cfg.processes {
        let k = k_for(kind, cfg.k);
        let chain = build_generator(g, kind, k, cfg.state_cap)?;
        for &eps in &cfg.eps {
            let t = exact::mixing_time(&chain, eps, cfg.time_tol)?;
            println!("{:<5} k={k} eps={eps}: {t:.9}", kind.name());
            csv.row(cells![kind.name(), k, eps, t]);
        }
    }
    ctx.save(&csv, "exact_mix.csv")?;
    Ok(false)
}

fn label(p: &[usize]) -> String {
    p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

fn simulate(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let kind = cfg.process;
    let k = k_for(kind, cfg.k);
    let start: Vec<usize> = cfg.start_tuple().into_iter().take(k).collect();
    let state = match kind {
        ProcessKind::Rw => ParticleState::Vertex(start[0]),
        ProcessKind::ExK => ParticleState::set(start.clone()),
        ProcessKind::IpK => ParticleState::Tuple(start.clone()),
        ProcessKind::RwK => ParticleState::Tuple(start.clone()),
    };
    state.validate(g.n()).context("invalid start")?;
    let horizon = cfg.times.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let sampler = EdgeSampler::new(g);
    let nt = cfg.times.len();
    // per time, a map from configuration to count, merged in trial order
    let counts = par::fold_trials(
        cfg.trials,
        || vec![BTreeMap::<Vec<usize>, usize>::new(); nt],
        |acc, i| {
            let mut r = rng::substream(cfg.seed, i as u64);
            let positions: Vec<Vec<usize>> = if kind == ProcessKind::RwK {
                // independent walkers, one stream each
                let streams: Vec<EventStream> = (0..k)
                    .map(|_| EventStream::sample_with(g, &sampler, horizon, false, &mut r).expect("positive horizon"))
                    .collect();
                cfg.times
                    .iter()
                    .map(|&t| {
                        streams
                            .iter()
                            .zip(&start)
                            .map(|(s, &x)| s.interval_map(g, 0.0, t, false).expect("inside horizon").apply(x))
                            .collect()
                    })
                    .collect()
            } else {
                let s = EventStream::sample_with(g, &sampler, horizon, false, &mut r).expect("positive horizon");
                cfg.times
                    .iter()
                    .map(|&t| s.apply_interval(g, &state, 0.0, t, false).expect("valid state").positions().to_vec())
                    .collect()
            };
            for (ti, p) in positions.into_iter().enumerate() {
                *acc[ti].entry(p).or_default() += 1;
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for (key, c) in y {
                    *x.entry(key).or_default() += c;
                }
            }
        },
    );
    let chain = build_generator(g, kind, k, cfg.state_cap).ok();
    let mut csv = ctx.csv(&["time", "state", "empirical", "exact"]);
    let n = cfg.trials as f64;
    for (ti, &t) in cfg.times.iter().enumerate() {
        match &chain {
            Some(c) => {
                let law = exact::transition_distribution(c, &start, t, DEFAULT_TOL)?;
                let mut tv = 0.0;
                for i in 0..c.len() {
                    let s = c.space.state_vec(i);
                    let emp = counts[ti].get(&s).copied().unwrap_or(0) as f64 / n;
                    tv += (emp - law.probs()[i]).max(0.0);
                    csv.row(cells![t, label(&s), emp, law.probs()[i]]);
                }
                let sigma = (c.len() as f64 / n).sqrt();
                println!("t={t}: TV(empirical, exact) = {tv:.6} (3 sigma = {:.6})", 3.0 * sigma);
            }
            None => {
                for (s, &c) in &counts[ti] {
                    csv.row(cells![t, label(s), c as f64 / n, "NA"]);
                }
            }
        }
    }
    ctx.save(&csv, "simulate.csv")?;
    Ok(false)
}

fn chameleon_check(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let x = cfg.start_tuple();
    let trials = cfg.trials;
    let identity = chameleon::identity_check(g, &x, &cfg.times, cfg.phase_length, trials, cfg.seed)?;
    println!(
        "identity: max standardized deviation {:.4} over {} cells ({} trials)",
        identity.max_standardized, identity.cells, trials
    );
    let collision = if g.n() >= 3 {
        let r = chameleon::collision_claim_check(g, cfg.phase_length, trials, rng::mix(cfg.seed, 1))?;
        println!("first-contact claim: worst excess {:.4} sigma", r.max_excess_sigmas);
        Some(r)
    } else {
        None
    };
    let s0 = chameleon::init_chameleon(g, &x)?;
    let opts = RunOptions::new(cfg.phase_length, Stop::Rounds(cfg.rounds)).full();
    let trace = chameleon::run_chameleon(g, &s0, &opts, cfg.seed)?;
    let mut csv = ctx.csv(&["round", "red", "pink", "white", "ink"]);
    for h in chameleon::hat_chain(&trace) {
        csv.row(cells![h.round, h.counts[0], h.counts[1], h.counts[2], h.ink_halves as f64 / 2.0]);
    }
    ctx.save(&csv, "chameleon_hat_chain.csv")?;
    let export = format!("# config_sha256={} seed={}\n{}", ctx.hash, cfg.seed, trace.to_export()?);
    ctx.files.push(output::write_file(ctx.out, "chameleon_trace.txt", &export)?.display().to_string());
    let failed = identity.max_standardized > 3.0 || collision.as_ref().is_some_and(|c| c.max_excess_sigmas > 3.0);
    #[derive(Serialize)]
    struct Body {
        identity: chameleon::IdentityReport,
        collision: Option<chameleon::CollisionReport>,
        passed: bool,
    }
    ctx.save_json(
        "chameleon_check.json",
        &Body {
            identity,
            collision,
            passed: !failed,
        },
    )?;
    Ok(failed)
}

fn ink_chain(ctx: &mut Ctx) -> Result<bool> {
    let cfg = ctx.cfg;
    let p = ink::conditioned_decay_profile(cfg.m, cfg.steps)?;
    let mut csv = ctx.csv(&["l", "decay", "bound", "z_mean"]);
    for l in 0..=cfg.steps {
        csv.row(cells![l, p.decay[l], p.bound[l], p.z_mean[l]]);
    }
    ctx.save(&csv, "ink_chain.csv")?;
    let contraction = p.worst_contraction_excess();
    let bound = p.worst_bound_excess();
    println!("m={} L={}: worst contraction excess {contraction:.3e}, worst bound excess {bound:.3e}", cfg.m, cfg.steps);
    Ok(contraction > 1e-12 || bound > 0.0)
}

fn method(cfg: &Config) -> Method {
    match cfg.method {
        MethodChoice::Exact => Method::Exact,
        MethodChoice::Mc => Method::MonteCarlo { trials: cfg.trials },
    }
}

fn meeting(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let n = g.n();
    let mut csv = ctx.csv(&["x1", "x2", "t", "tail", "sigma"]);
    let chain = (cfg.method == MethodChoice::Exact).then(|| exact::MeetingChain::new(g));
    for &t in &cfg.times {
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let est = match &chain {
                    Some(c) => Estimate::exact(c.tail(a, b, t)),
                    None => {
                        let pair = (a * n + b) as u64;
                        let hits = par::fold_trials(
                            cfg.trials,
                            || 0usize,
                            |acc, i| {
                                let mut r = rng::substream(rng::mix(cfg.seed, pair), i as u64);
                                *acc += usize::from(!stream::meeting_time_with(g, (a, b), t, &mut r).met_by(t));
                            },
                            |x, y| *x += y,
                        );
                        Estimate::bernoulli(hits, cfg.trials)
                    }
                };
                csv.row(cells![a, b, t, est.value, est.sigma]);
            }
        }
        let mass = estimators::average_meeting_mass(g, t, method(cfg), rng::mix(cfg.seed, t.to_bits()))?;
        println!("t={t}: average meeting mass {:.6} (sigma {:.2e})", mass.value, mass.sigma);
    }
    ctx.save(&csv, "meeting.csv")?;
    Ok(false)
}

fn easy_test(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let v = estimators::easy_verdict(g, method(cfg), cfg.seed)?;
    println!(
        "easy = {} (sup tail {:.3e} at {:?}, threshold time {:.4})",
        v.easy, v.sup_tail.value, v.worst_pair, v.threshold_time
    );
    let mut csv = ctx.csv(&["easy", "sup_tail", "sigma", "x1", "x2", "mixing_time", "threshold_time"]);
    csv.row(cells![
        if v.easy { "true" } else { "false" },
        v.sup_tail.value,
        v.sup_tail.sigma,
        v.worst_pair.0,
        v.worst_pair.1,
        v.mixing_time,
        v.threshold_time
    ]);
    ctx.save(&csv, "easy_test.csv")?;
    ctx.save_json("easy_test.json", &v)?;
    Ok(false)
}

fn phi_bound(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let lb = bounds::phi_lower_bound(g)?;
    let mut csv = ctx.csv(&["family", "phi", "lower_bound"]);
    let default = bounds::phi(g, &bounds::default_paths(g)?);
    csv.row(cells!["default", default, lb]);
    let random = par::map_trials(cfg.path_families, |j| {
        let mut r = rng::substream(cfg.seed, j as u64);
        bounds::phi(g, &bounds::random_shortest_paths(g, &mut r).expect("connected graph"))
    });
    for (j, p) in random.iter().enumerate() {
        csv.row(cells![format!("random-{j}"), *p, lb]);
    }
    ctx.save(&csv, "phi_bound.csv")?;
    let worst = random.iter().copied().fold(default, f64::min);
    println!("phi(default) = {default:.6}, min over families {worst:.6}, lower bound {lb:.6}");
    // context only: the exclusion mixing time next to phi ln|V|
    if let Ok(chain) = build_generator(g, ProcessKind::ExK, cfg.k, cfg.state_cap.min(exact::SPECTRAL_LIMIT)) {
        let t = exact::mixing_time_of(&SpectralPropagator::new(&chain.generator)?, 0.25, cfg.time_tol)?;
        println!("fT_EX(k={})(1/4) = {t:.6}, phi ln|V| = {:.6}", cfg.k, default * (g.n() as f64).ln());
    }
    Ok(worst < lb - 1e-12)
}

fn red_decay(ctx: &mut Ctx, g: &WeightedGraph) -> Result<bool> {
    let cfg = ctx.cfg;
    let n = g.n();
    if cfg.k + cfg.red > n || cfg.k == 0 {
        bail!("need k - 1 black and {} red vertices among {n}", cfg.red);
    }
    let black = cfg.k - 1;
    let s0 = ChameleonState::new(n, (0..black).collect(), (black..black + cfg.red).collect(), Vec::new(), (black + cfg.red..n).collect())?;
    // the phase-length hypothesis is checkable exactly on complete graphs
    let complete = g.m() == n * (n - 1) / 2;
    let ip2 = if complete && n >= 4 {
        Some(exact::lumped::LumpedChain::complete_ip2(n, cfg.state_cap)?.mixing_time(0.25, cfg.time_tol)?)
    } else {
        build_generator(g, ProcessKind::IpK, 2, cfg.state_cap)
            .and_then(|c| exact::mixing_time(&c, 0.25, cfg.time_tol))
            .ok()
    };
    let r = estimators::red_decay_estimate(g, &s0, cfg.phase_length, cfg.rule, ip2, cfg.trials, cfg.seed)?;
    let tail = estimators::depinking_tail(g, &s0, cfg.phase_length, cfg.k_max, cfg.trials, rng::mix(cfg.seed, 1))?;
    println!(
        "E|R_2T-| = {:.4} (sigma {:.2e}) vs bound {:.4}; hypotheses violated: {}",
        r.estimate.value,
        r.estimate.sigma,
        r.bound,
        r.violations.len()
    );
    let mut csv = ctx.csv(&["k", "survival", "sigma", "bound"]);
    let mut tail_failed = false;
    for (i, e) in tail.survival.iter().enumerate() {
        let b = 1.5 * 0.999f64.powi(i as i32 + 1);
        tail_failed |= e.value - 3.0 * e.sigma > b;
        csv.row(cells![i + 1, e.value, e.sigma, b]);
    }
    ctx.save(&csv, "depinking_tail.csv")?;
    #[derive(Serialize)]
    struct Body<'a> {
        red_decay: &'a estimators::RedDecayReport,
        ip2_mixing_time: Option<f64>,
        depinking_tail: &'a estimators::DepinkingTail,
    }
    ctx.save_json(
        "red_decay.json",
        &Body {
            red_decay: &r,
            ip2_mixing_time: ip2,
            depinking_tail: &tail,
        },
    )?;
    // hypothesis violations downgrade the bounds to reports
    let asserted = r.violations.is_empty();
    Ok(asserted && (r.estimate.upper(3.0) > r.bound || tail_failed))
}

fn suite_ids(spec: &str) -> Result<Vec<u8>> {
    if spec == "all" {
        return Ok((1..=verify::CRITERIA).collect());
    }
    spec.split(',')
        .map(|s| {
            let id: u8 = s.trim().parse().with_context(|| format!("bad criterion id `{s}`"))?;
            if id == 0 || id > verify::CRITERIA {
                bail!("no criterion {id}");
            }
            Ok(id)
        })
        .collect()
}

fn run_verify(ctx: &mut Ctx) -> Result<bool> {
    let cfg = ctx.cfg;
    let ids = suite_ids(&cfg.suite)?;
    let opts = SuiteOptions {
        seed: cfg.seed,
        trial_scale: cfg.trial_scale,
    };
    let mut csv = ctx.csv(&["id", "name", "status", "check", "measured", "limit", "asserted"]);
    let mut outcomes = Vec::new();
    let mut failed = false;
    for id in ids {
        let o = verify::run(id, &opts)?;
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Report => "REPORT",
        };
        println!("{:>2} {:<6} {:<32} {}", o.id, tag, o.name, o.summary());
        failed |= o.status == Status::Fail;
        for c in &o.checks {
            csv.row(cells![o.id as usize, o.name, tag, c.what.clone(), c.measured, c.limit, if c.asserted { "yes" } else { "no" }]);
        }
        outcomes.push(o);
    }
    ctx.save(&csv, "verify.csv")?;
    ctx.save_json("verify.json", &serde_json::json!({ "criteria": outcomes }))?;
    Ok(failed)
}
