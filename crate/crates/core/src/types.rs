use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Card rank. Rank 0 is the empty-hand marker of f-war and is never dealt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rank(pub u32);

impl Rank {
    pub const EMPTY: Rank = Rank(0);

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Hand sizes of `m` players. The total is fixed for the lifetime of a game.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Composition {
    sizes: Vec<u32>,
    total: u32,
}

impl Composition {
    pub fn new(sizes: Vec<u32>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::TooFewPlayers(sizes.len()));
        }
        let total: u64 = sizes.iter().map(|&s| u64::from(s)).sum();
        if total == 0 {
            return Err(Error::EmptyDeck);
        }
        let total = u32::try_from(total).map_err(|_| Error::InvalidConfig("deck too large".into()))?;
        Ok(Self { sizes, total })
    }

    /// `n / m` cards to each of `m` players.
    pub fn equal(n: u32, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewPlayers(m));
        }
        if n == 0 {
            return Err(Error::EmptyDeck);
        }
        if !(n as usize).is_multiple_of(m) {
            return Err(Error::UnevenDeal { cards: n.into(), players: m });
        }
        Self::new(vec![n / m as u32; m])
    }

    /// Wraps sizes already known to be valid (callers that apply conserving moves).
    pub(crate) fn from_parts(sizes: Vec<u32>, total: u32) -> Self {
        debug_assert_eq!(sizes.iter().map(|&s| u64::from(s)).sum::<u64>(), u64::from(total));
        Self { sizes, total }
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn players(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    /// Indices of players still holding cards.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.sizes.iter().enumerate().filter(|(_, &s)| s > 0).map(|(i, _)| i)
    }

    pub fn support_len(&self) -> usize {
        self.sizes.iter().filter(|&&s| s > 0).count()
    }

    pub fn is_absorbing(&self) -> bool {
        self.support_len() == 1
    }

    pub fn sum_of_squares(&self) -> u64 {
        self.sizes.iter().map(|&s| u64::from(s) * u64::from(s)).sum()
    }

    /// Sizes sorted in descending order; the walk's law is invariant under relabelling.
    pub fn canonical(&self) -> Self {
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Self { sizes, total: self.total }
    }
}

impl TryFrom<Vec<u32>> for Composition {
    type Error = Error;

    fn try_from(sizes: Vec<u32>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<Composition> for Vec<u32> {
    fn from(c: Composition) -> Self {
        c.sizes
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    StickyWalk,
    Pwar,
    Fwar,
    StandardWar,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::StickyWalk => "sticky_walk",
            Variant::Pwar => "pwar",
            Variant::Fwar => "fwar",
            Variant::StandardWar => "standard_war",
        })
    }
}

/// How the deck is split at the start of each replication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deal {
    /// `n / m` cards each (round-robin remainder for standard War).
    Equal,
    /// Fixed hand sizes.
    Sizes(Composition),
    /// Every card independently uniform over players, hands then shuffled.
    Claim,
}

/// One experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub variant: Variant,
    pub n: u32,
    pub m: usize,
    pub deal: Deal,
    /// Winning rule (p-war) or strength function (f-war) id.
    pub model: Option<String>,
    pub replications: u64,
    pub seed: u64,
    pub round_cap: u64,
    pub threads: usize,
    /// Standard War only: deal 52 mod m leftover cards to the lowest indices.
    #[serde(default = "default_true")]
    pub allow_uneven_deal: bool,
    /// Histogram bin width in rounds.
    #[serde(default = "default_bin_width")]
    pub bin_width: u64,
}

fn default_bin_width() -> u64 {
    crate::stats::DEFAULT_BIN_WIDTH
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_REPLICATIONS: u64 = 1000;

/// 100 n^2, far beyond the n^2 / 2 upper bound on the mean.
pub fn default_round_cap(n: u32) -> u64 {
    100 * u64::from(n) * u64::from(n)
}

impl RunConfig {
    pub fn new(variant: Variant, n: u32, m: usize, seed: u64) -> Self {
        Self {
            variant,
            n,
            m,
            deal: Deal::Equal,
            model: None,
            replications: DEFAULT_REPLICATIONS,
            seed,
            round_cap: default_round_cap(n),
            threads: 1,
            allow_uneven_deal: true,
            bin_width: default_bin_width(),
        }
    }

    pub fn with_deal(mut self, deal: Deal) -> Self {
        self.deal = deal;
        self
    }

    pub fn with_model(mut self, id: impl Into<String>) -> Self {
        self.model = Some(id.into());
        self
    }

    pub fn with_replications(mut self, replications: u64) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_round_cap(mut self, round_cap: u64) -> Self {
        self.round_cap = round_cap;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::TooFewPlayers(self.m));
        }
        if self.n == 0 {
            return Err(Error::EmptyDeck);
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be positive".into()));
        }
        if self.round_cap == 0 {
            return Err(Error::InvalidConfig("round cap must be positive".into()));
        }
        if self.bin_width == 0 {
            return Err(Error::InvalidConfig("histogram bin width must be positive".into()));
        }
        if self.threads == 0 {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        match (&self.deal, self.variant) {
            (Deal::Equal, Variant::StandardWar) => {
                if self.m > self.n as usize {
                    return Err(Error::InvalidConfig(format!("{} players but only {} cards", self.m, self.n)));
                }
                if !self.allow_uneven_deal && !(self.n as usize).is_multiple_of(self.m) {
                    return Err(Error::UnevenDeal { cards: self.n.into(), players: self.m });
                }
            }
            (Deal::Equal, _) => {
                if !(self.n as usize).is_multiple_of(self.m) {
                    return Err(Error::UnevenDeal { cards: self.n.into(), players: self.m });
                }
            }
            (Deal::Sizes(c), _) => {
                if c.players() != self.m {
                    return Err(Error::InvalidConfig(format!("{} hand sizes for {} players", c.players(), self.m)));
                }
                if c.total() != self.n {
                    return Err(Error::SizeMismatch { expected: self.n.into(), actual: c.total().into() });
                }
            }
            (Deal::Claim, Variant::Fwar) => {}
            (Deal::Claim, v) => {
                return Err(Error::InvalidConfig(format!("claim deal is only defined for f-war, not {v}")));
            }
        }
        Ok(())
    }

    /// Starting hand sizes for deals that fix them.
    pub fn initial_sizes(&self) -> Result<Option<Composition>> {
        match &self.deal {
            Deal::Equal => Composition::equal(self.n, self.m).map(Some),
            Deal::Sizes(c) => Ok(Some(c.clone())),
            Deal::Claim => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_rejects_bad_input() {
        assert_eq!(Composition::new(vec![3]), Err(Error::TooFewPlayers(1)));
        assert_eq!(Composition::new(vec![0, 0]), Err(Error::EmptyDeck));
        assert!(matches!(Composition::equal(8, 3), Err(Error::UnevenDeal { .. })));
    }

    #[test]
    fn absorbing_and_support() {
        let c = Composition::new(vec![0, 5, 0]).unwrap();
        assert!(c.is_absorbing());
        assert_eq!(c.support().collect::<Vec<_>>(), vec![1]);
        let c = Composition::new(vec![3, 0, 1]).unwrap();
        assert!(!c.is_absorbing());
        assert_eq!(c.sum_of_squares(), 10);
        assert_eq!(c.canonical().sizes(), &[3, 1, 0]);
    }

    #[test]
    fn config_validation() {
        let cfg = RunConfig::new(Variant::StickyWalk, 8, 3, 1);
        assert!(matches!(cfg.validate(), Err(Error::UnevenDeal { .. })));
        let cfg = RunConfig::new(Variant::StickyWalk, 8, 4, 1).with_replications(0);
        assert!(cfg.validate().is_err());
        let cfg =
            RunConfig::new(Variant::StickyWalk, 7, 2, 1).with_deal(Deal::Sizes(Composition::new(vec![3, 4]).unwrap()));
        assert!(cfg.validate().is_ok());
        let cfg = RunConfig::new(Variant::StandardWar, 52, 3, 1);
        assert!(cfg.validate().is_ok());
        let cfg = RunConfig::new(Variant::Pwar, 6, 3, 1).with_deal(Deal::Claim);
        assert!(cfg.validate().is_err());
        assert_eq!(cfg.round_cap, 3600);
    }
}
