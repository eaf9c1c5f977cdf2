//! f-war: players play the top card of an ordered hand; the round is won with probability
//! proportional to the strength of the card played.
//!
//! Alongside the hands the state tracks, per player, the hand strength
//! `M_i = sum of f(a) over the hand` and the accumulated cross-strength
//! `Q_i = sum over past rounds of f(a_i) (sum_j f(a_j) - f(a_i))`. `sum_i (M_i^2 - Q_i)` is a
//! martingale. For integer-valued `f` every tracked quantity is an integer below 2^53 in
//! practice, so the `f64` bookkeeping is exact.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::random::{select_index, RandomSource};
use crate::runner::{map_replications, summarize_outcomes, Outcome};
use crate::stats::SimSummary;
use crate::types::{Deal, Rank, RunConfig, Variant};

/// Card strengths `f(0..=n)` with `f(0) = 0` and `f(a) > 0` for every card.
#[derive(Clone, Debug, PartialEq)]
pub struct StrengthFunction {
    id: String,
    values: Vec<f64>,
}

impl StrengthFunction {
    pub fn from_fn(id: impl Into<String>, n: u32, f: impl Fn(u32) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..=n).map(&f).collect();
        if values[0] != 0.0 {
            return Err(Error::InvalidStrength(0));
        }
        if let Some(a) = (1..=n).find(|&a| !(values[a as usize] > 0.0 && values[a as usize].is_finite())) {
            return Err(Error::InvalidStrength(a));
        }
        Ok(Self { id: id.into(), values })
    }

    /// `f(a) = a + n`.
    pub fn affine(n: u32) -> Self {
        Self::from_fn("affine", n, |a| if a == 0 { 0.0 } else { f64::from(a + n) })
            .expect("affine strengths are positive")
    }

    pub fn constant(n: u32, c: f64) -> Result<Self> {
        Self::from_fn("constant", n, |a| if a == 0 { 0.0 } else { c })
    }

    /// `f(a) = a^2 + n^2`.
    pub fn quadratic(n: u32) -> Self {
        let n2 = f64::from(n) * f64::from(n);
        Self::from_fn("quadratic", n, |a| if a == 0 { 0.0 } else { f64::from(a) * f64::from(a) + n2 })
            .expect("quadratic strengths are positive")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Largest card this function is defined for.
    pub fn deck_size(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    pub fn value(&self, card: Rank) -> f64 {
        self.values[card.0 as usize]
    }
}

type StrengthBuilder = Arc<dyn Fn(u32) -> Result<StrengthFunction> + Send + Sync>;

/// Strength functions addressable by id, built for a given deck size.
#[derive(Clone)]
pub struct StrengthRegistry {
    builders: BTreeMap<String, StrengthBuilder>,
}

impl Default for StrengthRegistry {
    fn default() -> Self {
        let mut r = Self { builders: BTreeMap::new() };
        r.register("affine", |n| Ok(StrengthFunction::affine(n)));
        r.register("constant", |n| StrengthFunction::constant(n, 1.0));
        r.register("quadratic", |n| Ok(StrengthFunction::quadratic(n)));
        r
    }
}

impl StrengthRegistry {
    pub fn register(&mut self, id: &str, build: impl Fn(u32) -> Result<StrengthFunction> + Send + Sync + 'static) {
        self.builders.insert(id.to_string(), Arc::new(build));
    }

    pub fn build(&self, id: &str, n: u32) -> Result<StrengthFunction> {
        let build = self.builders.get(id).ok_or_else(|| Error::UnknownStrength(id.to_string()))?;
        build(n)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }
}

pub fn strength_function(id: &str, n: u32) -> Result<StrengthFunction> {
    StrengthRegistry::default().build(id, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FwarState {
    pub hands: Vec<VecDeque<Rank>>,
    pub t: u64,
    strength: Vec<f64>,
    cross: Vec<f64>,
}

impl FwarState {
    pub fn new(hands: Vec<VecDeque<Rank>>, f: &StrengthFunction) -> Self {
        let strength = hands.iter().map(|h| h.iter().map(|&c| f.value(c)).sum()).collect();
        let cross = vec![0.0; hands.len()];
        Self { hands, t: 0, strength, cross }
    }

    /// `M_i`, the total strength of each hand.
    pub fn hand_strength(&self) -> &[f64] {
        &self.strength
    }

    /// `Q_i`, accumulated cross-strength per player.
    pub fn cross_strength(&self) -> &[f64] {
        &self.cross
    }

    pub fn active_players(&self) -> usize {
        self.hands.iter().filter(|h| !h.is_empty()).count()
    }

    /// `sum_i (M_i^2 - Q_i)`.
    pub fn martingale_value(&self) -> f64 {
        self.strength.iter().zip(&self.cross).map(|(m, q)| m * m - q).sum()
    }

    fn front_strengths(&self, f: &StrengthFunction) -> Vec<f64> {
        self.hands.iter().map(|h| h.front().map_or(0.0, |&c| f.value(c))).collect()
    }
}

/// Probability of each player winning the next round, `f(a_i) / sum_j f(a_j)`.
pub fn win_probabilities(state: &FwarState, f: &StrengthFunction) -> Vec<f64> {
    let weights = state.front_strengths(f);
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Plays one round with a chosen winner (which must hold cards).
pub fn fwar_round_with_winner(
    state: &FwarState,
    f: &StrengthFunction,
    winner: usize,
    rng: &mut RandomSource,
) -> Result<FwarState> {
    if state.active_players() < 2 {
        return Err(Error::Absorbing);
    }
    assert!(!state.hands[winner].is_empty(), "winner {winner} holds no cards");
    let weights = state.front_strengths(f);
    let mut next = state.clone();
    let mut pot = Vec::with_capacity(next.hands.len());
    play_round(&mut next, &weights, winner, &mut pot, rng);
    Ok(next)
}

/// Applies a round given front-card strengths and the winner. `pot` is scratch space.
fn play_round(state: &mut FwarState, weights: &[f64], winner: usize, pot: &mut Vec<Rank>, rng: &mut RandomSource) {
    let total: f64 = weights.iter().sum();
    pot.clear();
    for (i, hand) in state.hands.iter_mut().enumerate() {
        if let Some(card) = hand.pop_front() {
            pot.push(card);
        }
        state.cross[i] += weights[i] * (total - weights[i]);
        state.strength[i] -= weights[i];
    }
    state.strength[winner] += total;
    pot.shuffle(rng);
    state.hands[winner].extend(pot.iter().copied());
    state.t += 1;
}

pub fn fwar_step(state: &FwarState, f: &StrengthFunction, rng: &mut RandomSource) -> Result<FwarState> {
    if state.active_players() < 2 {
        return Err(Error::Absorbing);
    }
    let weights = state.front_strengths(f);
    let total: f64 = weights.iter().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let winner = select_index(&probabilities, rng.uniform());
    let mut next = state.clone();
    let mut pot = Vec::with_capacity(next.hands.len());
    play_round(&mut next, &weights, winner, &mut pot, rng);
    Ok(next)
}

/// One-step check of the `sum (M^2 - Q)` martingale: the exact conditional expectation of the
/// next `sum M^2`, by enumerating winners, against `sum M^2 + sum f(a_i)(sum f - f(a_i))`.
pub fn martingale_step_identity_f(state: &FwarState, f: &StrengthFunction) -> Result<(f64, f64)> {
    if state.active_players() < 2 {
        return Err(Error::Absorbing);
    }
    let weights = state.front_strengths(f);
    let total: f64 = weights.iter().sum();
    let after_play: Vec<f64> = state.strength.iter().zip(&weights).map(|(m, w)| m - w).collect();
    let mut expected = 0.0;
    for (winner, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let sum_sq: f64 =
            after_play.iter().enumerate().map(|(i, &m)| if i == winner { (m + total).powi(2) } else { m * m }).sum();
        expected += w / total * sum_sq;
    }
    let current: f64 = state.strength.iter().map(|m| m * m).sum();
    let predicted = current + weights.iter().map(|w| w * (total - w)).sum::<f64>();
    Ok((expected, predicted))
}

/// Each card goes to an independent uniform player, then every hand is shuffled. Hand sizes
/// are random and may be zero.
pub fn claim_deal(n: u32, m: usize, f: &StrengthFunction, rng: &mut RandomSource) -> Result<FwarState> {
    if m < 2 {
        return Err(Error::TooFewPlayers(m));
    }
    if n == 0 {
        return Err(Error::EmptyDeck);
    }
    let mut hands: Vec<Vec<Rank>> = vec![Vec::new(); m];
    for card in 1..=n {
        // Player i receives the card when U lands in the i-th of m equal slices of [0, 1).
        let player = ((rng.uniform() * m as f64) as usize).min(m - 1);
        hands[player].push(Rank(card));
    }
    for hand in &mut hands {
        hand.shuffle(rng);
    }
    Ok(FwarState::new(hands.into_iter().map(VecDeque::from).collect(), f))
}

/// A shuffled deck `1..=n` cut into `m` equal hands.
pub fn equal_deal(n: u32, m: usize, f: &StrengthFunction, rng: &mut RandomSource) -> Result<FwarState> {
    if m < 2 {
        return Err(Error::TooFewPlayers(m));
    }
    if n == 0 || !(n as usize).is_multiple_of(m) {
        return Err(Error::UnevenDeal { cards: n.into(), players: m });
    }
    let mut deck: Vec<Rank> = (1..=n).map(Rank).collect();
    deck.shuffle(rng);
    let per = n as usize / m;
    Ok(FwarState::new(deck.chunks(per).map(|c| c.iter().copied().collect()).collect(), f))
}

/// Means of `sum_i M_{i,0}` and `sum_i M_{i,0}^2` under the claim deal with `f(a) = a + n`.
pub fn claim_moments(n: u32, m: usize) -> (f64, f64) {
    let n = f64::from(n);
    let m = m as f64;
    let total = (3.0 * n * n + n) / 2.0;
    let squares = (14.0 * n * n * n + 9.0 * n * n + n) / 6.0;
    (total, (m - 1.0) / m * squares + total * total / m)
}

/// Leading term `9 n^4 (m - 1) / (4 m)` of the expected final `sum_i Q_i`.
pub fn q_sum_leading_term(n: u32, m: usize) -> f64 {
    let n = f64::from(n);
    let m = m as f64;
    9.0 * n.powi(4) * (m - 1.0) / (4.0 * m)
}

/// Exact expected final `sum_i Q_i` for the claim deal with `f(a) = a + n`, by optional stopping.
pub fn q_sum_expectation(n: u32, m: usize) -> f64 {
    let (total, mean_sq) = claim_moments(n, m);
    total * total - mean_sq
}

#[derive(Clone, Debug, PartialEq)]
pub struct FwarRunReport {
    pub summary: SimSummary,
    /// Mean of `sum_i Q_i` at the end of completed games.
    pub mean_q_sum: f64,
    pub q_sum_leading: f64,
}

struct FwarOutcome {
    outcome: Outcome,
    q_sum: f64,
}

fn play_fwar(mut state: FwarState, f: &StrengthFunction, rng: &mut RandomSource, round_cap: u64) -> FwarOutcome {
    let m = state.hands.len();
    let mut weights = vec![0.0; m];
    let mut probabilities = vec![0.0; m];
    let mut pot = Vec::with_capacity(m);
    let mut rounds = 0;
    while state.active_players() > 1 {
        if rounds >= round_cap {
            return FwarOutcome { outcome: Outcome::censored(round_cap), q_sum: f64::NAN };
        }
        for (w, hand) in weights.iter_mut().zip(&state.hands) {
            *w = hand.front().map_or(0.0, |&c| f.value(c));
        }
        let total: f64 = weights.iter().sum();
        for (p, w) in probabilities.iter_mut().zip(&weights) {
            *p = w / total;
        }
        let winner = select_index(&probabilities, rng.uniform());
        play_round(&mut state, &weights, winner, &mut pot, rng);
        rounds += 1;
    }
    FwarOutcome { outcome: Outcome::completed(rounds), q_sum: state.cross.iter().sum() }
}

pub fn run_fwar(config: &RunConfig, f: &StrengthFunction) -> Result<FwarRunReport> {
    if config.variant != Variant::Fwar {
        return Err(Error::InvalidConfig(format!("expected an fwar config, got {}", config.variant)));
    }
    config.validate()?;
    if f.deck_size() < config.n {
        return Err(Error::InvalidConfig(format!(
            "strength function `{}` covers cards up to {}, deck has {}",
            f.id(),
            f.deck_size(),
            config.n
        )));
    }
    let (n, m) = (config.n, config.m);
    let results = map_replications(config.seed, config.replications, config.threads, |_, rng| {
        let start = match &config.deal {
            Deal::Claim => claim_deal(n, m, f, rng)?,
            Deal::Equal => equal_deal(n, m, f, rng)?,
            Deal::Sizes(sizes) => {
                let mut deck: Vec<Rank> = (1..=n).map(Rank).collect();
                deck.shuffle(rng);
                let mut rest = deck.as_slice();
                let hands = sizes
                    .sizes()
                    .iter()
                    .map(|&s| {
                        let (h, tail) = rest.split_at(s as usize);
                        rest = tail;
                        h.iter().copied().collect()
                    })
                    .collect();
                FwarState::new(hands, f)
            }
        };
        Ok(play_fwar(start, f, rng, config.round_cap))
    })?;
    let outcomes: Vec<Outcome> = results.iter().map(|r| r.outcome).collect();
    let summary = summarize_outcomes(&outcomes, config)?;
    let completed: Vec<f64> = results.iter().filter(|r| !r.outcome.censored).map(|r| r.q_sum).collect();
    let mean_q_sum = completed.iter().sum::<f64>() / completed.len() as f64;
    Ok(FwarRunReport { summary, mean_q_sum, q_sum_leading: q_sum_leading_term(n, m) })
}
