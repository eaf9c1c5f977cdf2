use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("composition needs at least 2 players, got {0}")]
    TooFewPlayers(usize),
    #[error("composition must hold at least one card")]
    EmptyDeck,
    #[error("composition sums to {actual}, expected {expected}")]
    SizeMismatch { expected: u64, actual: u64 },
    #[error("{players} players cannot split {cards} cards evenly")]
    UnevenDeal { cards: u64, players: usize },
    #[error("probability vector has a negative entry at index {index}: {value}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probability vector sums to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("uniform draw {0} lies outside [0, 1]")]
    DrawOutOfRange(f64),
    #[error("state is absorbing: fewer than two players hold cards")]
    Absorbing,
    #[error("state space has {states} states, over the limit of {limit}")]
    StateSpaceTooLarge { states: usize, limit: usize },
    #[error("solver did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("closed form needs n > 2, got n = {0}")]
    DegenerateDeck(u64),
    #[error("unknown winning rule `{0}`")]
    UnknownRule(String),
    #[error("unknown strength function `{0}`")]
    UnknownStrength(String),
    #[error("strength function must satisfy f(0) = 0 and f(a) > 0 for cards, violated at a = {0}")]
    InvalidStrength(u32),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("empty accumulator")]
    EmptyAccumulator,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
