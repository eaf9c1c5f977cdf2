//! Closed-form expectations for the three-player sticky walk.

use crate::error::{Error, Result};

fn check_deck(a1: u32, a2: u32, a3: u32) -> Result<(f64, f64, f64, f64)> {
    let n = u64::from(a1) + u64::from(a2) + u64::from(a3);
    if n <= 2 {
        return Err(Error::DegenerateDeck(n));
    }
    Ok((f64::from(a1), f64::from(a2), f64::from(a3), n as f64))
}

/// Expected time until the first of three players runs out: `a1 a2 a3 / (n - 2)`.
///
/// `a1 a2 a3 + (n - 2) t` is a martingale while all three hold cards, which gives the
/// formula by optional stopping.
pub fn sandell_tau1(a1: u32, a2: u32, a3: u32) -> Result<f64> {
    let (a, b, c, n) = check_deck(a1, a2, a3)?;
    Ok(a * b * c / (n - 2.0))
}

/// Expected absorption time of the three-player walk:
/// `a1 a2 + a1 a3 + a2 a3 - 2 a1 a2 a3 / (n - 2)`.
pub fn three_player_expectation(a1: u32, a2: u32, a3: u32) -> Result<f64> {
    let (a, b, c, n) = check_deck(a1, a2, a3)?;
    Ok(a * b + a * c + b * c - 2.0 * a * b * c / (n - 2.0))
}

/// Equal thirds, `(7n^3 - 18n^2) / (27n - 54)`.
pub fn three_player_equal(n: u32) -> Result<f64> {
    if n <= 2 {
        return Err(Error::DegenerateDeck(n.into()));
    }
    let n = f64::from(n);
    Ok((7.0 * n * n * n - 18.0 * n * n) / (27.0 * n - 54.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(three_player_expectation(2, 2, 2).unwrap(), 8.0);
        assert_eq!(three_player_expectation(1, 1, 1).unwrap(), 1.0);
        assert_eq!(three_player_expectation(1, 1, 2).unwrap(), 3.0);
        assert_eq!(sandell_tau1(2, 2, 2).unwrap(), 2.0);
        assert_eq!(sandell_tau1(1, 1, 1).unwrap(), 1.0);
        assert_eq!(sandell_tau1(1, 1, 2).unwrap(), 1.0);
        assert_eq!(three_player_equal(6).unwrap(), 8.0);
    }

    #[test]
    fn degenerate_decks_rejected() {
        assert_eq!(sandell_tau1(1, 1, 0), Err(Error::DegenerateDeck(2)));
        assert_eq!(three_player_expectation(2, 0, 0), Err(Error::DegenerateDeck(2)));
        assert!(three_player_equal(2).is_err());
    }

    #[test]
    fn equal_thirds_agree() {
        for k in 1..40 {
            let general = three_player_expectation(k, k, k).unwrap();
            let special = three_player_equal(3 * k).unwrap();
            assert!((general - special).abs() <= 1e-9 * general.max(1.0));
        }
    }
}
