//! The sticky random walk on the integer points of the simplex.
//!
//! Each round a uniformly chosen coordinate of the support gains `|support| - 1` and every
//! other support coordinate loses one. Coordinates that reach zero stay there.

use rand::Rng;

use crate::error::{Error, Result};
use crate::random::RandomSource;
use crate::runner::{run_replications, Outcome};
use crate::stats::SimSummary;
use crate::types::{Composition, RunConfig, Variant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkState {
    pub position: Composition,
    pub t: u64,
}

impl WalkState {
    pub fn new(position: Composition) -> Self {
        Self { position, t: 0 }
    }
}

/// Position after support coordinate `winner` wins a round.
pub fn apply_win(position: &Composition, winner: usize) -> Result<Composition> {
    let sizes = position.sizes();
    let active = position.support_len();
    if active < 2 {
        return Err(Error::Absorbing);
    }
    assert!(sizes[winner] > 0, "winner {winner} holds no cards");
    let next = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| match (i == winner, s > 0) {
            (true, _) => s + active as u32 - 1,
            (false, true) => s - 1,
            (false, false) => 0,
        })
        .collect();
    Ok(Composition::from_parts(next, position.total()))
}

pub fn walk_step(state: &WalkState, rng: &mut RandomSource) -> Result<WalkState> {
    let active = state.position.support_len();
    if active < 2 {
        return Err(Error::Absorbing);
    }
    let pick = rng.gen_range(0..active);
    let winner = state.position.support().nth(pick).expect("pick within support");
    Ok(WalkState { position: apply_win(&state.position, winner)?, t: state.t + 1 })
}

/// Rounds until one coordinate holds everything, or `(round_cap, true)` if the cap is hit first.
pub fn absorption_time(start: &Composition, rng: &mut RandomSource, round_cap: u64) -> (u64, bool) {
    // Hot loop: work on a plain vector rather than rebuilding compositions.
    let mut sizes = start.sizes().to_vec();
    let mut active: Vec<usize> = start.support().collect();
    let mut rounds = 0;
    while active.len() > 1 {
        if rounds >= round_cap {
            return (round_cap, true);
        }
        let k = active.len();
        let winner = active[rng.gen_range(0..k)];
        for &i in &active {
            if i == winner {
                sizes[i] += k as u32 - 1;
            } else {
                sizes[i] -= 1;
            }
        }
        active.retain(|&i| sizes[i] > 0);
        rounds += 1;
    }
    (rounds, false)
}

/// One-step check of the sum-of-squares martingale.
///
/// Returns the exact conditional expectation of the next sum of squares, by enumerating the
/// `|C|` equally likely winners, alongside `sum of squares + |C|(|C| - 1)`.
pub fn martingale_step_identity(position: &Composition) -> Result<(f64, f64)> {
    let active = position.support_len();
    if active < 2 {
        return Err(Error::Absorbing);
    }
    let mut total: u64 = 0;
    for winner in position.support() {
        total += apply_win(position, winner)?.sum_of_squares();
    }
    let expected = total as f64 / active as f64;
    let k = active as u64;
    let predicted = (position.sum_of_squares() + k * (k - 1)) as f64;
    Ok((expected, predicted))
}

/// Lower and upper bounds on the expected absorption time:
/// `(n^2 - sum A_i^2) / (m (m - 1))` and `(n^2 - sum A_i^2) / 2`.
pub fn theorem_bounds(start: &Composition) -> (f64, f64) {
    let n = u64::from(start.total());
    let gap = (n * n - start.sum_of_squares()) as f64;
    let m = start.players() as f64;
    (gap / (m * (m - 1.0)), gap / 2.0)
}

pub fn run_walk(config: &RunConfig) -> Result<SimSummary> {
    if config.variant != Variant::StickyWalk {
        return Err(Error::InvalidConfig(format!("expected a sticky_walk config, got {}", config.variant)));
    }
    config.validate()?;
    let start = config.initial_sizes()?.expect("walk deals fix hand sizes");
    run_replications(config, |rng| {
        let (rounds, censored) = absorption_time(&start, rng, config.round_cap);
        Ok(if censored { Outcome::censored(rounds) } else { Outcome::completed(rounds) })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::derive_stream;
    use proptest::prelude::*;

    fn comp(s: &[u32]) -> Composition {
        Composition::new(s.to_vec()).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(apply_win(&comp(&[1, 1]), 0).unwrap(), comp(&[2, 0]));
        assert_eq!(apply_win(&comp(&[2, 1, 1]), 0).unwrap(), comp(&[4, 0, 0]));
        assert_eq!(apply_win(&comp(&[3, 0, 1]), 2).unwrap(), comp(&[2, 0, 2]));
    }

    #[test]
    fn step_rejects_absorbing() {
        let state = WalkState::new(comp(&[0, 4]));
        assert_eq!(walk_step(&state, &mut derive_stream(1, 0)), Err(Error::Absorbing));
        assert_eq!(martingale_step_identity(&comp(&[4, 0])), Err(Error::Absorbing));
    }

    #[test]
    fn forced_absorption_times() {
        let mut rng = derive_stream(9, 0);
        assert_eq!(absorption_time(&comp(&[6, 0, 0]), &mut rng, 10), (0, false));
        for _ in 0..100 {
            assert_eq!(absorption_time(&comp(&[1, 1]), &mut rng, 10), (1, false));
            assert_eq!(absorption_time(&comp(&[1, 1, 1]), &mut rng, 10), (1, false));
        }
    }

    #[test]
    fn censoring() {
        let mut rng = derive_stream(9, 1);
        let (rounds, censored) = absorption_time(&comp(&[50, 50]), &mut rng, 3);
        assert_eq!((rounds, censored), (3, true));
    }

    #[test]
    fn identity_examples() {
        assert_eq!(martingale_step_identity(&comp(&[1, 1])).unwrap(), (4.0, 4.0));
        assert_eq!(martingale_step_identity(&comp(&[2, 1, 1])).unwrap(), (12.0, 12.0));
        assert_eq!(martingale_step_identity(&comp(&[3, 1])).unwrap(), (12.0, 12.0));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(theorem_bounds(&comp(&[2, 2, 2])), (4.0, 12.0));
        assert_eq!(theorem_bounds(&comp(&[2, 2])), (4.0, 4.0));
        assert_eq!(theorem_bounds(&comp(&[5, 0, 0])), (0.0, 0.0));
    }

    #[test]
    fn equal_hand_bounds_closed_form() {
        for (n, m) in [(6u32, 3usize), (8, 4), (32, 16), (12, 2)] {
            let (lo, hi) = theorem_bounds(&Composition::equal(n, m).unwrap());
            let (n, m) = (f64::from(n), m as f64);
            assert!((lo - n * n / (m * m)).abs() < 1e-9);
            assert!((hi - n * n * (m - 1.0) / (2.0 * m)).abs() < 1e-9);
        }
    }

    fn composition() -> impl Strategy<Value = Composition> {
        prop::collection::vec(0u32..8, 2..6).prop_filter_map("nonempty", |v| Composition::new(v).ok())
    }

    proptest! {
        #[test]
        fn conserving_and_sticky(start in composition(), seed in any::<u64>()) {
            let mut rng = derive_stream(seed, 0);
            let mut state = WalkState::new(start);
            while !state.position.is_absorbing() {
                let next = walk_step(&state, &mut rng).unwrap();
                prop_assert_eq!(next.position.total(), state.position.total());
                prop_assert_eq!(next.t, state.t + 1);
                for (a, b) in state.position.sizes().iter().zip(next.position.sizes()) {
                    prop_assert!(*a > 0 || *b == 0);
                }
                prop_assert!(next.position.support_len() <= state.position.support_len());
                state = next;
            }
        }
    }
}
