//! Trial loops.
//!
//! With the `parallel` feature (default) trials are spread over the rayon
//! pool; without it they run on the calling thread. Both paths split the
//! trial range into the same fixed chunks and merge chunk results in index
//! order, so results do not depend on the thread count or on the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Trials per chunk in [`fold_trials`].
pub const CHUNK: usize = 1024;

/// Map `f` over `0..n`, preserving order.
pub fn map_trials<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub fn map_trials_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fold trials `0..n` chunk by chunk. `fold` accumulates one trial into a
/// chunk accumulator, `merge` combines chunk accumulators left to right.
pub fn fold_trials<A, I, F, M>(n: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
    M: Fn(&mut A, A),
{
    let chunks = n.div_ceil(CHUNK);
    let run_chunk = |c: usize| {
        let mut acc = init();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            fold(&mut acc, i);
        }
        acc
    };
    let parts = map_trials(chunks, run_chunk);
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// Sequential twin of [`fold_trials`] with identical chunking.
pub fn fold_trials_sequential<A, I, F, M>(n: usize, init: I, fold: F, merge: M) -> A
where
    I: Fn() -> A,
    F: Fn(&mut A, usize),
    M: Fn(&mut A, A),
{
    let chunks = n.div_ceil(CHUNK);
    let mut total = init();
    for c in 0..chunks {
        let mut acc = init();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            fold(&mut acc, i);
        }
        merge(&mut total, acc);
    }
    total
}
