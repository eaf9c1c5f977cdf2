//! p-war: every player plays a uniformly chosen card from an unordered hand and the round
//! winner is drawn from a winning rule's probability vector.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::random::{check_simplex, derive_stream, select_index, RandomSource};
use crate::runner::{run_replications, Outcome};
use crate::stats::SimSummary;
use crate::types::{Composition, Rank, RunConfig, Variant};
use crate::walk::apply_win;

/// A played card, `None` standing for the empty-hand marker.
pub type Played = Option<Rank>;

/// Maps the cards just played and the hands left behind to win probabilities.
///
/// Implementations must return a point of the simplex, give zero to players who played
/// nothing and hold nothing, and be equivariant: relabelling players permutes the output
/// the same way. A rule is symmetric if it ignores which remaining hand belongs to whom.
/// Rules are shared across worker threads and must not carry mutable state.
pub trait WinningRule: Send + Sync {
    fn id(&self) -> &str;

    fn is_symmetric(&self) -> bool;

    fn evaluate(&self, played: &[Played], remaining: &[Vec<Rank>]) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinRule {
    /// Equal odds for everyone who played a card.
    UniformActive,
    /// The highest played rank wins; ties split evenly.
    HighestCard,
}

impl BuiltinRule {
    pub const ALL: [BuiltinRule; 2] = [BuiltinRule::UniformActive, BuiltinRule::HighestCard];
}

impl WinningRule for BuiltinRule {
    fn id(&self) -> &str {
        match self {
            BuiltinRule::UniformActive => "uniform_active",
            BuiltinRule::HighestCard => "highest_card",
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn evaluate(&self, played: &[Played], _remaining: &[Vec<Rank>]) -> Vec<f64> {
        // `None < Some(_)`, so the empty marker sits below every rank.
        let winners: Vec<bool> = match self {
            BuiltinRule::UniformActive => played.iter().map(Option::is_some).collect(),
            BuiltinRule::HighestCard => {
                let best = played.iter().max().copied().flatten();
                played.iter().map(|p| best.is_some() && *p == best).collect()
            }
        };
        let k = winners.iter().filter(|&&w| w).count();
        winners.iter().map(|&w| if w { 1.0 / k as f64 } else { 0.0 }).collect()
    }
}

pub fn builtin_rule(name: &str) -> Result<BuiltinRule> {
    BuiltinRule::ALL.into_iter().find(|r| r.id() == name).ok_or_else(|| Error::UnknownRule(name.to_string()))
}

/// Returns a fixed vector regardless of the cards. Only a valid rule when the vector is
/// uniform over players holding cards; exists to exercise the validator.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedRule {
    pub id: String,
    pub probabilities: Vec<f64>,
    pub symmetric: bool,
}

impl WinningRule for FixedRule {
    fn id(&self) -> &str {
        &self.id
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn evaluate(&self, played: &[Played], _remaining: &[Vec<Rank>]) -> Vec<f64> {
        let mut p = self.probabilities.clone();
        p.resize(played.len(), 0.0);
        p
    }
}

/// The lowest-indexed player holding a card always wins. Breaks equivariance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FirstPlayerWins;

impl WinningRule for FirstPlayerWins {
    fn id(&self) -> &str {
        "first_player_wins"
    }

    fn is_symmetric(&self) -> bool {
        false
    }

    fn evaluate(&self, played: &[Played], _remaining: &[Vec<Rank>]) -> Vec<f64> {
        let mut p = vec![0.0; played.len()];
        if let Some(i) = played.iter().position(Option::is_some) {
            p[i] = 1.0;
        }
        p
    }
}

/// Rules addressable by id: the built-ins plus anything registered at runtime.
#[derive(Clone)]
pub struct RuleRegistry {
    rules: BTreeMap<String, Arc<dyn WinningRule>>,
}

impl Default for RuleRegistry {
    fn default() -> Self {
        let mut registry = Self { rules: BTreeMap::new() };
        for rule in BuiltinRule::ALL {
            registry.register(Arc::new(rule));
        }
        registry
    }
}

impl RuleRegistry {
    pub fn register(&mut self, rule: Arc<dyn WinningRule>) {
        self.rules.insert(rule.id().to_string(), rule);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn WinningRule>> {
        self.rules.get(id).cloned().ok_or_else(|| Error::UnknownRule(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    Simplex,
    EmptyPlayerZero,
    Equivariance,
    Symmetry,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Simplex => "simplex",
            Axiom::EmptyPlayerZero => "empty_player_zero",
            Axiom::Equivariance => "equivariance",
            Axiom::Symmetry => "symmetry",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub axiom: Axiom,
    /// How many checked configurations broke the axiom.
    pub count: u64,
    /// The first offending configuration.
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub rule_id: String,
    pub configurations: u64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, axiom: Axiom, witness: impl FnOnce() -> String) {
        match self.violations.iter_mut().find(|v| v.axiom == axiom) {
            Some(v) => v.count += 1,
            None => self.violations.push(Violation { axiom, count: 1, witness: witness() }),
        }
    }
}

const AXIOM_TOLERANCE: f64 = 1e-9;

fn describe(played: &[Played], remaining: &[Vec<Rank>], extra: &str) -> String {
    let played: Vec<String> = played.iter().map(|p| p.map_or_else(|| "phi".to_string(), |r| r.to_string())).collect();
    let remaining: Vec<String> = remaining
        .iter()
        .map(|h| format!("{{{}}}", h.iter().map(Rank::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    format!("played=({}) remaining=({}){}", played.join(","), remaining.join(","), extra)
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= AXIOM_TOLERANCE)
}

/// Checks every axiom on one configuration under the relabelling `sigma`
/// (player `i` of the permuted game is player `sigma[i]` of the original).
fn check_configuration(
    rule: &dyn WinningRule,
    played: &[Played],
    remaining: &[Vec<Rank>],
    sigma: &[usize],
    report: &mut ValidationReport,
) {
    report.configurations += 1;
    let m = played.len();
    let p = rule.evaluate(played, remaining);
    if p.len() != m || check_simplex(&p).is_err() {
        report.flag(Axiom::Simplex, || describe(played, remaining, &format!(" output={p:?}")));
    }
    for i in 0..m.min(p.len()) {
        if played[i].is_none() && remaining[i].is_empty() && p[i].abs() > AXIOM_TOLERANCE {
            report.flag(Axiom::EmptyPlayerZero, || {
                describe(played, remaining, &format!(" player={i} probability={}", p[i]))
            });
        }
    }

    let played_perm: Vec<Played> = sigma.iter().map(|&s| played[s]).collect();
    let remaining_perm: Vec<Vec<Rank>> = sigma.iter().map(|&s| remaining[s].clone()).collect();
    let permuted = rule.evaluate(&played_perm, &remaining_perm);
    let expected: Vec<f64> = sigma.iter().map(|&s| p.get(s).copied().unwrap_or(f64::NAN)).collect();
    if !close(&permuted, &expected) {
        report.flag(Axiom::Equivariance, || {
            describe(played, remaining, &format!(" sigma={sigma:?} output={p:?} permuted_output={permuted:?}"))
        });
    }

    if rule.is_symmetric() {
        let reshuffled = rule.evaluate(played, &remaining_perm);
        if !close(&reshuffled, &p) {
            report.flag(Axiom::Symmetry, || {
                describe(played, remaining, &format!(" sigma={sigma:?} output={p:?} reshuffled_output={reshuffled:?}"))
            });
        }
    }
}

/// Random legal configurations: a deck of `n` ranks drawn from `1..=n` with repeats, each card
/// dealt to a uniform player, one uniform card played from each nonempty hand.
pub fn validate_rule(
    rule: &dyn WinningRule,
    n: u32,
    m: usize,
    samples: u64,
    rng: &mut RandomSource,
) -> ValidationReport {
    let mut report = ValidationReport { rule_id: rule.id().to_string(), ..Default::default() };
    let mut sigma: Vec<usize> = (0..m).collect();
    for _ in 0..samples {
        let mut hands: Vec<Vec<Rank>> = vec![Vec::new(); m];
        for _ in 0..n {
            let rank = Rank(rng.gen_range(1..=n.max(1)));
            hands[rng.gen_range(0..m)].push(rank);
        }
        let played: Vec<Played> =
            hands.iter_mut().map(|h| (!h.is_empty()).then(|| h.swap_remove(rng.gen_range(0..h.len())))).collect();
        sigma.shuffle(rng);
        check_configuration(rule, &played, &hands, &sigma, &mut report);
    }
    report
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Every played tuple over `{phi} ∪ 1..=n` that a deck of `n` cards can produce, under every
/// relabelling of the `m` players. The cards not played are dealt round-robin to the
/// players who played something, and players who played nothing hold nothing.
pub fn validate_rule_exhaustive(rule: &dyn WinningRule, n: u32, m: usize) -> ValidationReport {
    let mut report = ValidationReport { rule_id: rule.id().to_string(), ..Default::default() };
    let sigmas = permutations(m);
    let symbols = n as usize + 1;
    let total = symbols.pow(m as u32);
    for code in 0..total {
        let mut c = code;
        let played: Vec<Played> = (0..m)
            .map(|_| {
                let digit = c % symbols;
                c /= symbols;
                (digit > 0).then_some(Rank(digit as u32))
            })
            .collect();
        let used = played.iter().flatten().count();
        // Nothing played means nobody holds a card, which no deal produces.
        if used == 0 || used > n as usize {
            continue;
        }
        let holders: Vec<usize> = (0..m).filter(|&i| played[i].is_some()).collect();
        let mut remaining: Vec<Vec<Rank>> = vec![Vec::new(); m];
        if !holders.is_empty() {
            for (k, card) in (used as u32..n).enumerate() {
                remaining[holders[k % holders.len()]].push(Rank(card % n + 1));
            }
        }
        for sigma in &sigmas {
            check_configuration(rule, &played, &remaining, sigma, &mut report);
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwarState {
    pub hands: Vec<Vec<Rank>>,
    pub t: u64,
}

impl PwarState {
    pub fn new(hands: Vec<Vec<Rank>>) -> Self {
        Self { hands, t: 0 }
    }

    pub fn sizes(&self) -> Vec<u32> {
        self.hands.iter().map(|h| h.len() as u32).collect()
    }

    pub fn active_players(&self) -> usize {
        self.hands.iter().filter(|h| !h.is_empty()).count()
    }

    /// All cards, sorted.
    pub fn deck(&self) -> Vec<Rank> {
        let mut all: Vec<Rank> = self.hands.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// Shuffles `deck` and cuts it into hands of the given sizes, which makes every assignment
/// of cards to hands of those sizes equally likely.
pub fn uniform_deal(deck: &[Rank], sizes: &Composition, rng: &mut RandomSource) -> Result<Vec<Vec<Rank>>> {
    if deck.len() != sizes.total() as usize {
        return Err(Error::SizeMismatch { expected: deck.len() as u64, actual: sizes.total().into() });
    }
    let mut shuffled = deck.to_vec();
    shuffled.shuffle(rng);
    let mut rest = shuffled.as_slice();
    Ok(sizes
        .sizes()
        .iter()
        .map(|&s| {
            let (hand, tail) = rest.split_at(s as usize);
            rest = tail;
            hand.to_vec()
        })
        .collect())
}

/// Distinct ranks `1..=n`.
pub fn standard_deck(n: u32) -> Vec<Rank> {
    (1..=n).map(Rank).collect()
}

fn draw_cards(hands: &mut [Vec<Rank>], rng: &mut RandomSource) -> Vec<Played> {
    hands.iter_mut().map(|h| (!h.is_empty()).then(|| h.swap_remove(rng.gen_range(0..h.len())))).collect()
}

fn award(hands: &mut [Vec<Rank>], played: &[Played], winner: usize) {
    hands[winner].extend(played.iter().flatten().copied());
}

/// Plays one round. Returns the next state and the winning player's index.
pub fn pwar_step(state: &PwarState, rule: &dyn WinningRule, rng: &mut RandomSource) -> Result<(PwarState, usize)> {
    if state.active_players() < 2 {
        return Err(Error::Absorbing);
    }
    let mut hands = state.hands.clone();
    let played = draw_cards(&mut hands, rng);
    let p = rule.evaluate(&played, &hands);
    check_simplex(&p)?;
    let winner = select_index(&p, rng.uniform());
    award(&mut hands, &played, winner);
    Ok((PwarState { hands, t: state.t + 1 }, winner))
}

fn play_pwar(
    deck: &[Rank],
    sizes: &Composition,
    rule: &dyn WinningRule,
    rng: &mut RandomSource,
    round_cap: u64,
) -> Result<Outcome> {
    let mut hands = uniform_deal(deck, sizes, rng)?;
    let mut rounds = 0;
    while hands.iter().filter(|h| !h.is_empty()).count() > 1 {
        if rounds >= round_cap {
            return Ok(Outcome::censored(round_cap));
        }
        let played = draw_cards(&mut hands, rng);
        let p = rule.evaluate(&played, &hands);
        check_simplex(&p)?;
        let winner = select_index(&p, rng.uniform());
        award(&mut hands, &played, winner);
        rounds += 1;
    }
    Ok(Outcome::completed(rounds))
}

/// Full games from uniform deals of the configured sizes over the deck `1..=n`.
pub fn run_pwar(config: &RunConfig, rule: &dyn WinningRule) -> Result<SimSummary> {
    if config.variant != Variant::Pwar {
        return Err(Error::InvalidConfig(format!("expected a pwar config, got {}", config.variant)));
    }
    config.validate()?;
    let sizes = config.initial_sizes()?.expect("pwar deals fix hand sizes");
    let deck = standard_deck(config.n);
    run_replications(config, |rng| play_pwar(&deck, &sizes, rule, rng, config.round_cap))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub sizes: Composition,
    pub rule_id: String,
    pub rule_symmetric: bool,
    pub replications: u64,
    /// Players holding cards before the round.
    pub active: Vec<usize>,
    /// Round wins per active player, aligned with `active`.
    pub winner_counts: Vec<u64>,
    /// Total variation distance of the winner frequencies from uniform on `active`.
    pub tv_distance: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Rounds where the new hand sizes differ from the walk's update for the same winner.
    pub size_update_mismatches: u64,
}

/// Plays `reps` single rounds, each from a fresh uniform deal of `sizes` over `1..=n`, and
/// compares the winner distribution with the uniform law on the active players.
pub fn equivalence_check(
    sizes: &Composition,
    rule: &dyn WinningRule,
    reps: u64,
    rng: &mut RandomSource,
) -> Result<ComparisonReport> {
    let deck = standard_deck(sizes.total());
    let before = sizes.clone();
    let active: Vec<usize> = before.support().collect();
    if active.len() < 2 {
        return Err(Error::Absorbing);
    }
    let mut counts = vec![0u64; active.len()];
    let mut mismatches = 0;
    for _ in 0..reps {
        let state = PwarState::new(uniform_deal(&deck, &before, rng)?);
        let (next, winner) = pwar_step(&state, rule, rng)?;
        let slot = active.iter().position(|&a| a == winner).expect("winner held cards");
        counts[slot] += 1;
        if apply_win(&before, winner)?.sizes() != next.sizes().as_slice() {
            mismatches += 1;
        }
    }
    let k = active.len() as f64;
    let total = reps as f64;
    let tv_distance = 0.5 * counts.iter().map(|&c| (c as f64 / total - 1.0 / k).abs()).sum::<f64>();
    let expected = total / k;
    let degrees_of_freedom = counts.len() - 1;
    let chi_square = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    Ok(ComparisonReport {
        sizes: sizes.clone(),
        rule_id: rule.id().to_string(),
        rule_symmetric: rule.is_symmetric(),
        replications: reps,
        active,
        winner_counts: counts,
        tv_distance,
        chi_square,
        degrees_of_freedom,
        size_update_mismatches: mismatches,
    })
}

/// Seeded convenience wrapper for [`equivalence_check`].
pub fn equivalence_check_seeded(
    sizes: &Composition,
    rule: &dyn WinningRule,
    reps: u64,
    seed: u64,
) -> Result<ComparisonReport> {
    equivalence_check(sizes, rule, reps, &mut derive_stream(seed, 0))
}
