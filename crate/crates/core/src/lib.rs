//! Multiplayer War-style card games and the sticky random walk on the simplex that their
//! hand sizes follow.
//!
//! * [`walk`]: the sticky walk, its sum-of-squares martingale and the bounds it implies.
//! * [`exact`]: exact expected hitting times by Gauss-Seidel on the first-step equations.
//! * [`closed_form`]: three-player formulas.
//! * [`pwar`]: card-level engine with pluggable winning rules and a rule validator.
//! * [`fwar`]: top-card engine with strength functions and the `M`/`Q` trackers.
//! * [`war`]: standard 52-card War with war rounds.
//! * [`stats`], [`runner`], [`random`]: reproducible parallel Monte Carlo.
//! * [`verify`]: the invariant suite behind `warwalk verify`.

pub mod closed_form;
pub mod error;
pub mod exact;
pub mod fwar;
pub mod pwar;
pub mod random;
pub mod runner;
pub mod stats;
pub mod types;
pub mod verify;
pub mod walk;
pub mod war;

pub use error::{Error, Result};
pub use random::{derive_stream, sample_winner, RandomSource};
pub use stats::{Accumulator, SimSummary};
pub use types::{Composition, Deal, Rank, RunConfig, Variant};
