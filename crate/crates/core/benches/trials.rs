//! Parallel versus sequential Monte Carlo trial loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use excl_core::chameleon::{self, init_chameleon, RunOptions, Stop};
use excl_core::stream::{self, EdgeSampler, EventStream, ParticleState};
use excl_core::{par, rng, GraphKind, WeightedGraph};

fn gen(spec: &str) -> WeightedGraph {
    WeightedGraph::generate(&GraphKind::parse(spec).unwrap(), 0).unwrap()
}

type Fold<'a> = &'a (dyn Fn(&mut u64, usize) + Sync + Send);

fn both(c: &mut Criterion, name: &str, trials: usize, f: Fold) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("parallel", trials), |b| {
        b.iter(|| black_box(par::fold_trials(trials, || 0u64, f, |a, b| *a += b)))
    });
    group.bench_function(BenchmarkId::new("sequential", trials), |b| {
        b.iter(|| black_box(par::fold_trials_sequential(trials, || 0u64, f, |a, b| *a += b)))
    });
    group.finish();
}

fn meeting(c: &mut Criterion) {
    let g = gen("cycle:16");
    both(c, "meeting_time_c16", 20_000, &|acc, i| {
        let mut r = rng::substream(1, i as u64);
        *acc += u64::from(stream::meeting_time_with(&g, (0, 8), 5.0, &mut r).met_by(5.0));
    });
}

fn interval(c: &mut Criterion) {
    let g = gen("torus:2:6");
    let sampler = EdgeSampler::new(&g);
    let start = ParticleState::set(vec![0, 7, 14, 21]);
    both(c, "exclusion_torus6", 20_000, &|acc, i| {
        let mut r = rng::substream(2, i as u64);
        let s = EventStream::sample_with(&g, &sampler, 2.0, false, &mut r).unwrap();
        let out = s.apply_interval(&g, &start, 0.0, 2.0, false).unwrap();
        *acc += out.positions()[0] as u64;
    });
}

fn chameleon_runs(c: &mut Criterion) {
    let g = gen("cycle:8");
    let sampler = EdgeSampler::new(&g);
    let s0 = init_chameleon(&g, &[0, 1, 2]).unwrap();
    let opts = RunOptions::new(0.5, Stop::UntilAbsorbed { cap: 100_000 });
    both(c, "chameleon_c8_absorb", 5_000, &|acc, i| {
        let tr = chameleon::run_chameleon_with(&g, &sampler, &s0, &opts, rng::substream(3, i as u64)).unwrap();
        *acc += tr.rounds;
    });
}

criterion_group!(benches, meeting, interval, chameleon_runs);
criterion_main!(benches);
