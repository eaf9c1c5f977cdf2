//! Exact expected hitting times of the sticky walk by solving the first-step equations
//!
//! `h(x) = 1 + (1/|C|) sum_{i in C} h(x after i wins)` with `h = 0` on stopped states.
//!
//! States are canonicalised to descending order, so the unknowns are partitions of `n`
//! into at most `m` parts. The system is solved by Gauss-Seidel sweeps with states
//! ordered by support size, then lexicographically from the most concentrated.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::types::Composition;
use crate::walk::apply_win;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

/// When a trajectory counts as finished.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// One player holds every card.
    Absorption,
    /// Fewer than `k` players hold cards. `SupportBelow(3)` from a 3-player start is the
    /// first elimination time.
    SupportBelow(usize),
}

impl Stop {
    fn is_stopped(self, support: usize) -> bool {
        match self {
            Stop::Absorption => support <= 1,
            Stop::SupportBelow(k) => support < k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Max absolute residual of the first-step equations on return.
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub state_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, max_sweeps: DEFAULT_MAX_SWEEPS, state_limit: DEFAULT_STATE_LIMIT }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolveReport {
    pub state_count: usize,
    pub expected_time: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solution over every canonical state of a given `(n, m)`.
#[derive(Clone, Debug)]
pub struct SolvedSpace {
    n: u32,
    m: usize,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    values: Vec<f64>,
    residual: f64,
    iterations: usize,
}

impl SolvedSpace {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Expected hitting time from `start` (any ordering of coordinates).
    pub fn expected(&self, start: &Composition) -> Option<f64> {
        if start.total() != self.n || start.players() != self.m {
            return None;
        }
        self.index.get(start.canonical().sizes()).map(|&i| self.values[i])
    }

    /// Canonical states with their solved values.
    pub fn iter(&self) -> impl Iterator<Item = (Composition, f64)> + '_ {
        self.states.iter().zip(&self.values).map(move |(s, &v)| (Composition::from_parts(s.clone(), self.n), v))
    }

    fn report(&self, start: &Composition) -> ExactSolveReport {
        ExactSolveReport {
            state_count: self.states.len(),
            expected_time: self.expected(start).expect("start lies in its own state space"),
            residual: self.residual,
            iterations: self.iterations,
        }
    }
}

/// Number of partitions of `n` into at most `m` parts.
pub fn canonical_state_count(n: u32, m: usize) -> u128 {
    let n = n as usize;
    // ways[j] over parts of size 1..=m (conjugate: at most m parts <=> parts of size <= m)
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for part in 1..=m.min(n.max(1)) {
        for j in part..=n {
            ways[j] = ways[j].saturating_add(ways[j - part]);
        }
    }
    ways[n]
}

fn enumerate(n: u32, m: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, max_part: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 0 {
            if remaining == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        // Each of the `slots` remaining coordinates is at most `max_part`.
        if u64::from(remaining) > u64::from(max_part) * slots as u64 {
            return;
        }
        let hi = remaining.min(max_part);
        for part in (0..=hi).rev() {
            prefix.push(part);
            rec(remaining - part, part, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, m, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Self-loop weight and off-diagonal `(target, weight)` pairs of one transient state.
type Row = (f64, Vec<(usize, f64)>);

pub fn solve_space(n: u32, m: usize, stop: Stop, options: &SolverOptions) -> Result<SolvedSpace> {
    if m < 2 {
        return Err(Error::TooFewPlayers(m));
    }
    if n == 0 {
        return Err(Error::EmptyDeck);
    }
    let count = canonical_state_count(n, m);
    if count > options.state_limit as u128 {
        return Err(Error::StateSpaceTooLarge {
            states: usize::try_from(count).unwrap_or(usize::MAX),
            limit: options.state_limit,
        });
    }

    let support = |s: &[u32]| s.iter().filter(|&&x| x > 0).count();
    let mut states = enumerate(n, m);
    // Enumeration is already lexicographically descending; a stable sort keeps that within
    // each support size.
    states.sort_by_key(|s| support(s));
    let index: HashMap<Vec<u32>, usize> = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();

    // Per transient state: self-loop weight and off-diagonal (target, weight) pairs.
    let mut rows: Vec<Option<Row>> = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let k = support(s);
        if stop.is_stopped(k) {
            rows.push(None);
            continue;
        }
        let here = Composition::from_parts(s.clone(), n);
        let weight = 1.0 / k as f64;
        let mut diagonal = 0.0;
        let mut off: Vec<(usize, f64)> = Vec::with_capacity(k);
        for winner in here.support() {
            let next = apply_win(&here, winner)?.canonical();
            if stop.is_stopped(next.support_len()) {
                continue;
            }
            let j = index[next.sizes()];
            if j == i {
                diagonal += weight;
            } else if let Some(entry) = off.iter_mut().find(|(t, _)| *t == j) {
                entry.1 += weight;
            } else {
                off.push((j, weight));
            }
        }
        rows.push(Some((diagonal, off)));
    }

    let mut values = vec![0.0f64; states.len()];
    let residual_of = |values: &[f64]| {
        rows.iter()
            .enumerate()
            .filter_map(|(i, row)| {
                row.as_ref().map(|(d, off)| {
                    let rhs = 1.0 + d * values[i] + off.iter().map(|&(j, w)| w * values[j]).sum::<f64>();
                    (rhs - values[i]).abs()
                })
            })
            .fold(0.0f64, f64::max)
    };

    let mut sweeps = 0;
    let mut residual = residual_of(&values);
    while residual > options.tolerance {
        if sweeps >= options.max_sweeps {
            return Err(Error::NoConvergence { iterations: sweeps, residual });
        }
        for (i, row) in rows.iter().enumerate() {
            if let Some((d, off)) = row {
                let acc = 1.0 + off.iter().map(|&(j, w)| w * values[j]).sum::<f64>();
                values[i] = acc / (1.0 - d);
            }
        }
        sweeps += 1;
        residual = residual_of(&values);
    }

    // Polish to a floating-point fixed point so integral answers come out exact. Bounded by
    // the sweeps already spent, so this at most doubles the work.
    let budget = sweeps.max(64);
    for _ in 0..budget {
        let mut changed = false;
        for (i, row) in rows.iter().enumerate() {
            if let Some((d, off)) = row {
                let acc = 1.0 + off.iter().map(|&(j, w)| w * values[j]).sum::<f64>();
                let next = acc / (1.0 - d);
                changed |= next != values[i];
                values[i] = next;
            }
        }
        sweeps += 1;
        if !changed {
            break;
        }
    }
    residual = residual_of(&values);

    Ok(SolvedSpace { n, m, states, index, values, residual, iterations: sweeps })
}

/// Expected absorption time from `start`.
pub fn exact_expected_absorption(start: &Composition, tolerance: f64) -> Result<ExactSolveReport> {
    let options = SolverOptions { tolerance, ..SolverOptions::default() };
    let space = solve_space(start.total(), start.players(), Stop::Absorption, &options)?;
    Ok(space.report(start))
}

/// Expected time until some player currently holding cards runs out.
pub fn exact_expected_first_elimination(start: &Composition, tolerance: f64) -> Result<ExactSolveReport> {
    let options = SolverOptions { tolerance, ..SolverOptions::default() };
    let space = solve_space(start.total(), start.players(), Stop::SupportBelow(start.support_len()), &options)?;
    Ok(space.report(start))
}
