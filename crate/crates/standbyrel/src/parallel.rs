//! Simulation shards spread over worker threads.

use std::num::NonZeroUsize;
use std::thread;

use standbyrel_core::sim::{self, ClockPolicy, SimResult, SystemSpec};
use standbyrel_core::Result;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "STANDBYREL_THREADS";

/// Fixed shard count: results depend on the seed and `n` only, never on
/// how many threads ran them.
pub const SHARDS: usize = 64;

pub fn thread_count() -> usize {
    let available = thread::available_parallelism().map_or(1, NonZeroUsize::get);
    match std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        Some(cap) if cap > 0 => cap.min(available),
        _ => available,
    }
}

/// `n` replications split into [`SHARDS`] independently seeded shards.
pub fn simulate(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    policy: ClockPolicy,
    threads: usize,
) -> Result<SimResult> {
    let sizes = sim::shard_sizes(n, SHARDS);
    let run =
        |i: usize| sim::simulate_with(spec, sizes[i], sim::derive_seed(seed, i as u64), policy);
    let threads = threads.clamp(1, sizes.len());
    let results: Vec<Result<SimResult>> = if threads == 1 {
        (0..sizes.len()).map(run).collect()
    } else {
        let mut slots: Vec<Option<Result<SimResult>>> = (0..sizes.len()).map(|_| None).collect();
        thread::scope(|scope| {
            let chunks: Vec<_> = slots
                .chunks_mut(sizes.len().div_ceil(threads))
                .enumerate()
                .collect();
            let per = sizes.len().div_ceil(threads);
            for (c, chunk) in chunks {
                let run = &run;
                scope.spawn(move || {
                    for (k, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(run(c * per + k));
                    }
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every shard ran"))
            .collect()
    };
    let mut merged: Option<SimResult> = None;
    for r in results {
        let r = r?;
        merged = Some(match merged {
            Some(m) => m.merge(&r),
            None => r,
        });
    }
    Ok(merged.expect("at least one shard"))
}
