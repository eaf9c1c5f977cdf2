//! Standard War with a 52-card deck and any number of players.
//!
//! Ties go to war: every tied player stakes one card face down and one face up, and the
//! face-up cards are compared again among those still standing. A tied player who cannot
//! stake both cards is out and whatever they had joins the pot. Pots go to the back of the
//! winner's hand in random order.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::random::RandomSource;
use crate::runner::{run_replications, Outcome};
use crate::stats::SimSummary;
use crate::types::{RunConfig, Variant};

pub const DECK_SIZE: usize = 52;

/// Aces are high (14); the suit never decides a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Card {
    pub rank: u8,
    pub suit: u8,
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.rank {
            11 => "J".to_string(),
            12 => "Q".to_string(),
            13 => "K".to_string(),
            14 => "A".to_string(),
            r => r.to_string(),
        };
        write!(f, "{r}{}", ['c', 'd', 'h', 's'][self.suit as usize % 4])
    }
}

pub fn full_deck() -> Vec<Card> {
    (0..4u8).flat_map(|suit| (2..=14u8).map(move |rank| Card { rank, suit })).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarTable {
    pub hands: Vec<VecDeque<Card>>,
    /// Cards staked in the round being played; empty between rounds.
    pub pot: Vec<Card>,
    pub active: Vec<bool>,
}

impl WarTable {
    pub fn new(hands: Vec<VecDeque<Card>>) -> Self {
        let active = hands.iter().map(|h| !h.is_empty()).collect();
        Self { hands, pot: Vec::new(), active }
    }

    /// Shuffles a full deck and deals it round-robin, so when 52 is not a multiple of `m`
    /// the lowest-indexed players get one extra card.
    pub fn deal(m: usize, rng: &mut RandomSource) -> Result<Self> {
        if !(2..=DECK_SIZE).contains(&m) {
            return Err(Error::InvalidConfig(format!("standard War needs 2 to 52 players, got {m}")));
        }
        let mut deck = full_deck();
        deck.shuffle(rng);
        let mut hands = vec![VecDeque::with_capacity(DECK_SIZE); m];
        for (k, card) in deck.into_iter().enumerate() {
            hands[k % m].push_back(card);
        }
        Ok(Self::new(hands))
    }

    pub fn card_count(&self) -> usize {
        self.hands.iter().map(VecDeque::len).sum::<usize>() + self.pot.len()
    }

    pub fn active_players(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Plays one round including any wars. Returns the players knocked out this round.
pub fn play_round(table: &mut WarTable, rng: &mut RandomSource) -> Result<Vec<usize>> {
    let starters: Vec<usize> = (0..table.hands.len()).filter(|&i| table.active[i]).collect();
    if starters.len() < 2 {
        return Err(Error::Absorbing);
    }
    table.pot.clear();
    let mut contenders: Vec<(usize, Card)> = Vec::with_capacity(starters.len());
    for &p in &starters {
        let card = table.hands[p].pop_front().expect("active players hold cards");
        table.pot.push(card);
        contenders.push((p, card));
    }

    let winner = loop {
        let best = contenders.iter().map(|(_, c)| c.rank).max().expect("at least one contender");
        let tied: Vec<usize> = contenders.iter().filter(|(_, c)| c.rank == best).map(|&(p, _)| p).collect();
        if tied.len() == 1 {
            break tied[0];
        }
        contenders.clear();
        for &p in &tied {
            let hand = &mut table.hands[p];
            if hand.len() >= 2 {
                let down = hand.pop_front().expect("checked length");
                let up = hand.pop_front().expect("checked length");
                table.pot.push(down);
                table.pot.push(up);
                contenders.push((p, up));
            } else {
                table.pot.extend(hand.drain(..));
            }
        }
        match contenders.len() {
            0 => {
                // Everybody in the war went bust.
                let bystanders: Vec<usize> =
                    starters.iter().copied().filter(|p| !tied.contains(p) && !table.hands[*p].is_empty()).collect();
                let pool = if bystanders.is_empty() { &tied } else { &bystanders };
                break pool[rng.gen_range(0..pool.len())];
            }
            1 => break contenders[0].0,
            _ => {}
        }
    };

    table.pot.shuffle(rng);
    let pot = std::mem::take(&mut table.pot);
    table.hands[winner].extend(pot);

    let mut eliminated = Vec::new();
    for &p in &starters {
        if table.hands[p].is_empty() {
            table.active[p] = false;
            eliminated.push(p);
        }
    }
    Ok(eliminated)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameResult {
    pub rounds: u64,
    /// `None` when censored.
    pub winner: Option<usize>,
    pub censored: bool,
}

/// Deals and plays a full game, calling `observe` after every round.
pub fn play_game_observed(
    m: usize,
    rng: &mut RandomSource,
    round_cap: u64,
    mut observe: impl FnMut(&WarTable),
) -> Result<GameResult> {
    let mut table = WarTable::deal(m, rng)?;
    let mut rounds = 0;
    while table.active_players() > 1 {
        if rounds >= round_cap {
            return Ok(GameResult { rounds: round_cap, winner: None, censored: true });
        }
        play_round(&mut table, rng)?;
        rounds += 1;
        observe(&table);
    }
    let winner = table.active.iter().position(|&a| a);
    Ok(GameResult { rounds, winner, censored: false })
}

pub fn play_game(m: usize, rng: &mut RandomSource, round_cap: u64) -> Result<GameResult> {
    play_game_observed(m, rng, round_cap, |_| {})
}

pub fn run_standard_war(config: &RunConfig) -> Result<SimSummary> {
    if config.variant != Variant::StandardWar {
        return Err(Error::InvalidConfig(format!("expected a standard_war config, got {}", config.variant)));
    }
    if config.n as usize != DECK_SIZE {
        return Err(Error::InvalidConfig(format!("standard War uses {DECK_SIZE} cards, not {}", config.n)));
    }
    config.validate()?;
    run_replications(config, |rng| {
        let game = play_game(config.m, rng, config.round_cap)?;
        Ok(if game.censored { Outcome::censored(config.round_cap) } else { Outcome::completed(game.rounds) })
    })
}
