//! Order-independent aggregation of per-replication round counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BIN_WIDTH: u64 = 50;
/// Values retained verbatim before the quantile reservoir starts thinning.
pub const DEFAULT_SAMPLE_CAP: usize = 1_000_000;

/// Running totals for one batch of replications.
///
/// Moments are exact integers, so merging is associative and commutative and the
/// summary does not depend on how replications were split across workers. Quantiles
/// come from the retained `(replication index, rounds)` pairs; once more than
/// `sample_cap` are held, only indices divisible by a power-of-two stride are kept.
/// The kept set depends only on which indices were recorded, never on merge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Accumulator {
    count: u64,
    censored: u64,
    sum: u128,
    sum_sq: u128,
    max: u64,
    samples: Vec<(u64, u64)>,
    stride: u64,
    sample_cap: usize,
    bin_width: u64,
    bins: BTreeMap<u64, u64>,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self::new(DEFAULT_BIN_WIDTH)
    }
}

impl Accumulator {
    pub fn new(bin_width: u64) -> Self {
        Self::with_sample_cap(bin_width, DEFAULT_SAMPLE_CAP)
    }

    pub fn with_sample_cap(bin_width: u64, sample_cap: usize) -> Self {
        assert!(bin_width > 0, "histogram bin width must be positive");
        assert!(sample_cap > 0, "sample cap must be positive");
        Self {
            count: 0,
            censored: 0,
            sum: 0,
            sum_sq: 0,
            max: 0,
            samples: Vec::new(),
            stride: 1,
            sample_cap,
            bin_width,
            bins: BTreeMap::new(),
        }
    }

    /// Records a completed run, indexed by arrival order.
    pub fn record(&mut self, rounds: u64) {
        let index = self.count + self.censored;
        self.record_indexed(index, rounds);
    }

    pub fn record_indexed(&mut self, replication: u64, rounds: u64) {
        self.count += 1;
        self.sum += u128::from(rounds);
        self.sum_sq += u128::from(rounds) * u128::from(rounds);
        self.max = self.max.max(rounds);
        *self.bins.entry(rounds / self.bin_width).or_insert(0) += 1;
        if replication.is_multiple_of(self.stride) {
            self.samples.push((replication, rounds));
            self.thin();
        }
    }

    /// Counts a run that hit the round cap. It contributes to no moment.
    pub fn record_censored(&mut self) {
        self.censored += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn censored(&self) -> u64 {
        self.censored
    }

    pub fn merge(&mut self, other: Accumulator) {
        assert_eq!(self.bin_width, other.bin_width, "merging histograms of different bin widths");
        assert_eq!(self.sample_cap, other.sample_cap, "merging reservoirs of different capacity");
        self.count += other.count;
        self.censored += other.censored;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.max = self.max.max(other.max);
        for (bin, c) in other.bins {
            *self.bins.entry(bin).or_insert(0) += c;
        }
        self.stride = self.stride.max(other.stride);
        let stride = self.stride;
        self.samples.retain(|(i, _)| i % stride == 0);
        self.samples.extend(other.samples.into_iter().filter(|(i, _)| i % stride == 0));
        self.thin();
    }

    fn thin(&mut self) {
        while self.samples.len() > self.sample_cap {
            self.stride *= 2;
            let stride = self.stride;
            self.samples.retain(|(i, _)| i % stride == 0);
        }
    }

    pub fn summarize(&self) -> Result<SimSummary> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let n = self.count as f64;
        let mean = self.sum as f64 / n;
        let std_error = if self.count > 1 {
            // count * sum_sq - sum^2 is exact and nonnegative.
            let spread = u128::from(self.count) * self.sum_sq - self.sum * self.sum;
            let variance = spread as f64 / (n * (n - 1.0));
            (variance / n).sqrt()
        } else {
            0.0
        };

        let mut values: Vec<u64> = self.samples.iter().map(|&(_, v)| v).collect();
        values.sort_unstable();
        let mid = values.len() / 2;
        let median = if values.len() % 2 == 1 {
            values[mid] as f64
        } else {
            (values[mid - 1] as f64 + values[mid] as f64) / 2.0
        };

        let last_bin = self.max / self.bin_width;
        let histogram = (0..=last_bin).map(|b| (b * self.bin_width, self.bins.get(&b).copied().unwrap_or(0))).collect();

        Ok(SimSummary {
            replications: self.count + self.censored,
            completed: self.count,
            censored: self.censored,
            mean_rounds: mean,
            std_error,
            median_rounds: median,
            max_rounds: self.max,
            bin_width: self.bin_width,
            histogram,
            approximate_quantiles: self.stride > 1,
        })
    }
}

/// Termination statistics over the completed (non-censored) runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub replications: u64,
    pub completed: u64,
    pub censored: u64,
    pub mean_rounds: f64,
    pub std_error: f64,
    pub median_rounds: f64,
    pub max_rounds: u64,
    pub bin_width: u64,
    /// `(bin_lower, count)` for every bin from 0 through the one holding the max.
    pub histogram: Vec<(u64, u64)>,
    pub approximate_quantiles: bool,
}

impl SimSummary {
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_lower,bin_upper,count\n");
        for &(lower, count) in &self.histogram {
            out.push_str(&format!("{},{},{}\n", lower, lower + self.bin_width, count));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::derive_stream;
    use crate::types::Composition;
    use crate::walk::absorption_time;
    use proptest::prelude::*;

    fn acc_of(values: &[u64]) -> Accumulator {
        let mut acc = Accumulator::default();
        for &v in values {
            acc.record(v);
        }
        acc
    }

    #[test]
    fn two_values() {
        let s = acc_of(&[4, 6]).summarize().unwrap();
        assert_eq!(s.mean_rounds, 5.0);
        assert_eq!(s.median_rounds, 5.0);
        assert_eq!(s.max_rounds, 6);
        assert_eq!(s.completed, 2);
    }

    #[test]
    fn constant_values() {
        let s = acc_of(&[1, 1, 1]).summarize().unwrap();
        assert_eq!((s.mean_rounds, s.std_error, s.median_rounds, s.max_rounds), (1.0, 0.0, 1.0, 1));
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(Accumulator::default().summarize(), Err(Error::EmptyAccumulator));
        let mut acc = Accumulator::default();
        acc.record_censored();
        assert_eq!(acc.summarize(), Err(Error::EmptyAccumulator));
    }

    #[test]
    fn merge_matches_sequential() {
        let mut a = acc_of(&[4]);
        let mut b = Accumulator::default();
        b.record_indexed(1, 6);
        a.merge(b);
        assert_eq!(a, acc_of(&[4, 6]));
    }

    #[test]
    fn censored_runs_are_counted_separately() {
        let mut acc = Accumulator::default();
        acc.record(10);
        acc.record_censored();
        acc.record(20);
        let s = acc.summarize().unwrap();
        assert_eq!((s.replications, s.completed, s.censored), (3, 2, 1));
        assert_eq!(s.mean_rounds, 15.0);
        assert_eq!(s.histogram.iter().map(|h| h.1).sum::<u64>(), 2);
    }

    #[test]
    fn standard_error_is_sample_sd_over_root_n() {
        let s = acc_of(&[2, 4, 4, 4, 5, 5, 7, 9]).summarize().unwrap();
        // sample variance 32/7
        let expected = (32.0f64 / 7.0 / 8.0).sqrt();
        assert!((s.std_error - expected).abs() < 1e-15);
    }

    #[test]
    fn histogram_layout() {
        let mut acc = Accumulator::new(10);
        for v in [0, 9, 10, 35] {
            acc.record(v);
        }
        let s = acc.summarize().unwrap();
        assert_eq!(s.histogram, vec![(0, 2), (10, 1), (20, 0), (30, 1)]);
        assert_eq!(s.histogram_csv(), "bin_lower,bin_upper,count\n0,10,2\n10,20,1\n20,30,0\n30,40,1\n");
    }

    #[test]
    fn reservoir_engages_and_flags() {
        let mut acc = Accumulator::with_sample_cap(10, 100);
        for v in 0..1000 {
            acc.record(v);
        }
        let s = acc.summarize().unwrap();
        assert!(s.approximate_quantiles);
        assert_eq!(s.mean_rounds, 499.5);
        assert!((s.median_rounds - 499.5).abs() < 20.0);

        let mut exact = Accumulator::with_sample_cap(10, 2000);
        for v in 0..1000 {
            exact.record(v);
        }
        assert!(!exact.summarize().unwrap().approximate_quantiles);
    }

    #[test]
    fn gamblers_ruin_mean() {
        let start = Composition::new(vec![2, 2]).unwrap();
        let mut acc = Accumulator::default();
        for i in 0..10_000 {
            let (rounds, censored) = absorption_time(&start, &mut derive_stream(3, i), 10_000);
            assert!(!censored);
            acc.record(rounds);
        }
        let s = acc.summarize().unwrap();
        assert!((s.mean_rounds - 4.0).abs() <= 4.0 * s.std_error, "{s:?}");
    }

    proptest! {
        #[test]
        fn merge_order_irrelevant(values in prop::collection::vec(0u64..500, 1..300), split in 0usize..300, cap in 1usize..64) {
            let split = split.min(values.len());
            let mut whole = Accumulator::with_sample_cap(7, cap);
            let mut left = Accumulator::with_sample_cap(7, cap);
            let mut right = Accumulator::with_sample_cap(7, cap);
            for (i, &v) in values.iter().enumerate() {
                whole.record_indexed(i as u64, v);
                if i < split { left.record_indexed(i as u64, v) } else { right.record_indexed(i as u64, v) }
            }
            let mut lr = left.clone();
            lr.merge(right.clone());
            let mut rl = right;
            rl.merge(left);
            let a = lr.summarize().unwrap();
            let b = rl.summarize().unwrap();
            let c = whole.summarize().unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&a, &c);
        }
    }
}
