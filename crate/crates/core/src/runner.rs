//! Parallel replications. Replication `i` draws only from `derive_stream(seed, i)` and
//! results are folded in index order, so summaries do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::random::{derive_stream, RandomSource};
use crate::stats::{Accumulator, SimSummary};
use crate::types::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub rounds: u64,
    pub censored: bool,
}

impl Outcome {
    pub fn completed(rounds: u64) -> Self {
        Self { rounds, censored: false }
    }

    pub fn censored(round_cap: u64) -> Self {
        Self { rounds: round_cap, censored: true }
    }
}

/// Runs `play(i, stream_i)` for `i in 0..replications` on `threads` workers and returns the
/// results in index order.
pub fn map_replications<T, F>(seed: u64, replications: u64, threads: usize, play: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut RandomSource) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| (0..replications).into_par_iter().map(|i| play(i, &mut derive_stream(seed, i))).collect())
}

pub fn accumulate(outcomes: &[Outcome], bin_width: u64) -> Accumulator {
    let mut acc = Accumulator::new(bin_width);
    for (i, o) in outcomes.iter().enumerate() {
        if o.censored {
            acc.record_censored();
        } else {
            acc.record_indexed(i as u64, o.rounds);
        }
    }
    acc
}

pub fn run_replications<F>(config: &RunConfig, play: F) -> Result<SimSummary>
where
    F: Fn(&mut RandomSource) -> Result<Outcome> + Sync,
{
    let outcomes = map_replications(config.seed, config.replications, config.threads, |_, rng| play(rng))?;
    summarize_outcomes(&outcomes, config)
}

pub(crate) fn summarize_outcomes(outcomes: &[Outcome], config: &RunConfig) -> Result<SimSummary> {
    accumulate(outcomes, config.bin_width).summarize().map_err(|e| match e {
        Error::EmptyAccumulator if !outcomes.is_empty() => Error::InvalidConfig(format!(
            "all {} replications hit the round cap of {}",
            outcomes.len(),
            config.round_cap
        )),
        e => e,
    })
}
