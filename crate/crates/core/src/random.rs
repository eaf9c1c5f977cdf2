use rand::{Error as RandError, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on the total of a winning-probability vector.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

/// A seeded stream of random draws, one per replication.
///
/// Streams are ChaCha8 keyed by the experiment seed, with the replication index as the
/// stream selector. The same `(seed, stream_index)` yields the same draws on any thread,
/// and distinct indices select disjoint keystreams.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

pub fn derive_stream(seed: u64, replication_index: u64) -> RandomSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication_index);
    RandomSource { seed, stream_index: replication_index, rng }
}

impl RandomSource {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits.
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), RandError> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Checks that `probabilities` lies on the simplex.
pub fn check_simplex(probabilities: &[f64]) -> Result<()> {
    let mut total = 0.0;
    for (index, &value) in probabilities.iter().enumerate() {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NegativeProbability { index, value });
        }
        total += value;
    }
    if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(Error::ProbabilitySum(total));
    }
    Ok(())
}

/// Picks the index `i` (0-based) whose cumulative interval `(x_{i-1}, x_i]` contains `u`.
///
/// `u = 0` selects the first index with positive mass. Rounding that leaves the final
/// cumulative sum just below `u` falls back to the last index with positive mass.
pub fn sample_winner(probabilities: &[f64], u: f64) -> Result<usize> {
    check_simplex(probabilities)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::DrawOutOfRange(u));
    }
    Ok(select_index(probabilities, u))
}

/// [`sample_winner`] without the validation pass, for engines whose vectors are known good.
pub(crate) fn select_index(probabilities: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = i;
        if u <= cumulative {
            return i;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, proptest, Strategy};

    fn draws(src: &mut RandomSource, k: usize) -> Vec<u64> {
        (0..k).map(|_| src.next_u64()).collect()
    }

    #[test]
    fn same_seed_and_index_repeat() {
        let a = draws(&mut derive_stream(42, 0), 64);
        let b = draws(&mut derive_stream(42, 0), 64);
        assert_eq!(a, b);
    }

    #[test]
    fn neighbouring_streams_differ() {
        let a = draws(&mut derive_stream(42, 0), 64);
        let b = draws(&mut derive_stream(42, 1), 64);
        assert!(a.iter().zip(&b).any(|(x, y)| x != y));
        // Each position should differ; collisions of 64-bit words are vanishingly rare.
        assert_eq!(a.iter().zip(&b).filter(|(x, y)| x == y).count(), 0);
    }

    #[test]
    fn stream_is_thread_independent() {
        let reference = draws(&mut derive_stream(42, 5), 64);
        let handles: Vec<_> = (0..8).map(|_| std::thread::spawn(|| draws(&mut derive_stream(42, 5), 64))).collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), reference);
        }
    }

    #[test]
    fn winner_examples() {
        assert_eq!(sample_winner(&[1.0, 0.0], 0.7).unwrap(), 0);
        assert_eq!(sample_winner(&[0.5, 0.5], 0.5).unwrap(), 0);
        assert_eq!(sample_winner(&[0.5, 0.5], 0.500001).unwrap(), 1);
        assert_eq!(sample_winner(&[3.0 / 7.0, 4.0 / 7.0], 0.42).unwrap(), 0);
        assert_eq!(sample_winner(&[0.0, 0.3, 0.7], 0.0).unwrap(), 1);
        assert_eq!(sample_winner(&[0.25, 0.75, 0.0], 1.0).unwrap(), 1);
    }

    #[test]
    fn winner_rejects_bad_vectors() {
        assert!(matches!(sample_winner(&[1.2, -0.2], 0.5), Err(Error::NegativeProbability { index: 1, .. })));
        assert!(matches!(sample_winner(&[0.6, 0.6], 0.5), Err(Error::ProbabilitySum(_))));
        assert!(matches!(sample_winner(&[f64::NAN, 1.0], 0.5), Err(Error::NegativeProbability { .. })));
        assert!(sample_winner(&[0.5, 0.5 + 5e-10], 0.3).is_ok());
        assert!(matches!(sample_winner(&[0.5, 0.5], 1.5), Err(Error::DrawOutOfRange(_))));
    }

    #[test]
    fn empirical_frequencies_match() {
        let p = [0.1, 0.25, 0.05, 0.6];
        let mut src = derive_stream(7, 0);
        let trials = 100_000;
        let mut counts = [0u64; 4];
        for _ in 0..trials {
            counts[sample_winner(&p, src.uniform()).unwrap()] += 1;
        }
        for (c, q) in counts.iter().zip(p) {
            let freq = *c as f64 / trials as f64;
            let se = (q * (1.0 - q) / trials as f64).sqrt();
            assert!((freq - q).abs() <= 4.0 * se, "{freq} vs {q}");
        }
    }

    fn simplex_vector() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0u32..100, 1..8).prop_filter_map("nonzero", |w| {
            let total: u32 = w.iter().sum();
            (total > 0).then(|| w.iter().map(|&x| f64::from(x) / f64::from(total)).collect())
        })
    }

    proptest! {
        #[test]
        fn monotone_in_u(p in simplex_vector(), u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
            prop_assert!(sample_winner(&p, lo).unwrap() <= sample_winner(&p, hi).unwrap());
        }

        #[test]
        fn never_picks_zero_mass(p in simplex_vector(), u in 0.0f64..=1.0) {
            let i = sample_winner(&p, u).unwrap();
            prop_assert!(p[i] > 0.0);
        }
    }
}
