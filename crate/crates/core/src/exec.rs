//! Deterministic chunked execution.
//!
//! Every Monte Carlo estimator splits its sample budget into fixed-size
//! chunks. Chunk `i` draws from the ChaCha stream `i` of the estimator seed,
//! and chunk results are reduced in index order. The numbers produced are
//! therefore a function of `(inputs, seed)` only: the worker count and the
//! execution mode change wall time, never results.

use std::sync::atomic::{AtomicU8, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Samples per chunk.
pub const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Parallel,
    Sequential,
}

static MODE: AtomicU8 = AtomicU8::new(0);

/// Selects how chunks are scheduled. Without the `parallel` feature this is
/// a no-op and everything runs sequentially.
pub fn set_exec_mode(mode: ExecMode) {
    MODE.store(
        match mode {
            ExecMode::Parallel => 0,
            ExecMode::Sequential => 1,
        },
        Ordering::Relaxed,
    );
}

pub fn exec_mode() -> ExecMode {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == 0 {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

/// SplitMix64 finalizer; used to derive independent sub-seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of a named sub-computation.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(0xA5A5_5A5A_DEAD_BEEF)))
}

/// The generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `work(rng, range)` over consecutive chunks of `0..total` and returns
/// the chunk outputs in chunk order.
pub fn map_chunks<T, F>(total: usize, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, std::ops::Range<usize>) -> T + Sync + Send,
{
    map_chunks_sized(total, CHUNK, seed, work)
}

pub fn map_chunks_sized<T, F>(total: usize, chunk: usize, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk);
    let run = |i: usize| {
        let mut rng = stream_rng(seed, i as u64);
        let lo = i * chunk;
        let hi = (lo + chunk).min(total);
        work(&mut rng, lo..hi)
    };
    match exec_mode() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n_chunks).into_par_iter().map(run).collect()
        }
        _ => (0..n_chunks).map(run).collect(),
    }
}

/// Parallel map over items without randomness, order preserved.
pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec_mode() {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `f` on a pool of `workers` threads; `None` keeps the global pool.
/// Results do not depend on the worker count.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        #[cfg(feature = "parallel")]
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a pool of {w} workers: {e}");
                f()
            }
        },
        _ => f(),
    }
}
