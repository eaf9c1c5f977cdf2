//! Invariant checks shared by the `verify` command and the test suites.
//!
//! Every check reports a name, pass/fail and a one-line detail with the worst deviation
//! found or the first counterexample.

use serde::Serialize;

use crate::closed_form::{sandell_tau1, three_player_expectation};
use crate::exact::{solve_space, SolverOptions, Stop};
use crate::fwar::{claim_deal, fwar_step, martingale_step_identity_f, StrengthFunction};
use crate::pwar::{equivalence_check, validate_rule, validate_rule_exhaustive, WinningRule};
use crate::random::derive_stream;
use crate::types::Composition;
use crate::walk::{martingale_step_identity, theorem_bounds};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Every ordered composition of `n` into `m` nonnegative parts.
pub fn all_compositions(n: u32, m: usize) -> Vec<Composition> {
    fn rec(left: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=left {
            prefix.push(x);
            rec(left - x, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, m, &mut Vec::new(), &mut out);
    out.into_iter().filter_map(|s| Composition::new(s).ok()).collect()
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Enumerated one-step `E[sum A^2]` against `sum A^2 + |C|(|C| - 1)` over every non-absorbing
/// composition with `n <= max_n`, `2 <= m <= max_m`.
pub fn walk_martingale_identity(max_n: u32, max_m: usize) -> Check {
    let mut worst = 0.0f64;
    let mut count = 0u64;
    let mut first_bad = None;
    for m in 2..=max_m {
        for n in 1..=max_n {
            for c in all_compositions(n, m) {
                if c.is_absorbing() {
                    continue;
                }
                let (e, p) = martingale_step_identity(&c).expect("non-absorbing");
                let err = relative_error(e, p);
                count += 1;
                if err > 1e-12 && first_bad.is_none() {
                    first_bad = Some(format!("{c}: enumerated {e}, predicted {p}"));
                }
                worst = worst.max(err);
            }
        }
    }
    match first_bad {
        Some(w) => Check::new("walk_martingale_identity", false, w),
        None => Check::new(
            "walk_martingale_identity",
            true,
            format!("{count} compositions, n <= {max_n}, m <= {max_m}, max relative error {worst:e}"),
        ),
    }
}

fn solver_options() -> SolverOptions {
    SolverOptions { tolerance: 1e-12, ..SolverOptions::default() }
}

/// `h(a, b) = a b` for every two-player start with `a + b <= max_n`.
pub fn two_player_ruin(max_n: u32) -> Check {
    let mut worst = 0.0f64;
    for n in 1..=max_n {
        let space = match solve_space(n, 2, Stop::Absorption, &solver_options()) {
            Ok(s) => s,
            Err(e) => return Check::new("two_player_ruin", false, format!("n={n}: {e}")),
        };
        for a in 0..=n {
            let h = space.expected(&Composition::new(vec![a, n - a]).unwrap()).unwrap();
            let err = (h - f64::from(a) * f64::from(n - a)).abs();
            if err > 1e-8 {
                return Check::new("two_player_ruin", false, format!("({a},{}): solver {h}", n - a));
            }
            worst = worst.max(err);
        }
    }
    Check::new("two_player_ruin", true, format!("a + b <= {max_n}, max error {worst:e}"))
}

/// Absorption and first-elimination times of three players against their closed forms, for
/// every start with positive hands summing to at most `max_n`.
pub fn three_player_closed_forms(max_n: u32) -> Vec<Check> {
    let mut worst = [0.0f64; 2];
    let mut bad: [Option<String>; 2] = [None, None];
    let mut count = 0;
    for n in 3..=max_n {
        let absorb = solve_space(n, 3, Stop::Absorption, &solver_options());
        let first = solve_space(n, 3, Stop::SupportBelow(3), &solver_options());
        let (absorb, first) = match (absorb, first) {
            (Ok(a), Ok(f)) => (a, f),
            (Err(e), _) | (_, Err(e)) => {
                let msg = format!("n={n}: {e}");
                return vec![
                    Check::new("three_player_absorption", false, msg.clone()),
                    Check::new("three_player_first_elimination", false, msg),
                ];
            }
        };
        for a1 in 1..n {
            for a2 in 1..n - a1 {
                let a3 = n - a1 - a2;
                let c = Composition::new(vec![a1, a2, a3]).unwrap();
                count += 1;
                let pairs = [
                    (absorb.expected(&c).unwrap(), three_player_expectation(a1, a2, a3).unwrap()),
                    (first.expected(&c).unwrap(), sandell_tau1(a1, a2, a3).unwrap()),
                ];
                for (k, (solved, formula)) in pairs.into_iter().enumerate() {
                    let err = (solved - formula).abs();
                    if err > 1e-8 && bad[k].is_none() {
                        bad[k] = Some(format!("{c}: solver {solved}, formula {formula}"));
                    }
                    worst[k] = worst[k].max(err);
                }
            }
        }
    }
    ["three_player_absorption", "three_player_first_elimination"]
        .into_iter()
        .enumerate()
        .map(|(k, name)| match bad[k].take() {
            Some(w) => Check::new(name, false, w),
            None => Check::new(name, true, format!("{count} starts, n <= {max_n}, max error {:e}", worst[k])),
        })
        .collect()
}

/// `lower <= h <= upper` for every canonical start with `n <= max_n`, `2 <= m <= max_m`.
pub fn bound_containment(max_n: u32, max_m: usize) -> Check {
    let mut count = 0;
    for m in 2..=max_m {
        for n in 1..=max_n {
            let space = match solve_space(n, m, Stop::Absorption, &solver_options()) {
                Ok(s) => s,
                Err(e) => return Check::new("bound_containment", false, format!("n={n} m={m}: {e}")),
            };
            for (c, h) in space.iter() {
                let (lo, hi) = theorem_bounds(&c);
                count += 1;
                if h < lo - 1e-9 || h > hi + 1e-9 {
                    return Check::new("bound_containment", false, format!("{c}: {h} outside [{lo}, {hi}]"));
                }
            }
        }
    }
    Check::new("bound_containment", true, format!("{count} canonical starts, n <= {max_n}, m <= {max_m}"))
}

/// The `sum (M^2 - Q)` one-step identity on `states` random f-war states with `n <= max_n`,
/// `m <= max_m`, cycling through the affine, constant and quadratic strengths. States are
/// claim deals advanced by a random number of rounds.
pub fn fwar_martingale_identity(states: u64, max_n: u32, max_m: usize, seed: u64) -> Check {
    use rand::Rng;
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut i = 0u64;
    while checked < states {
        let mut rng = derive_stream(seed, i);
        i += 1;
        let n = rng.gen_range(2..=max_n.max(2));
        let m = rng.gen_range(2..=max_m.max(2));
        let f = match checked % 3 {
            0 => StrengthFunction::affine(n),
            1 => StrengthFunction::constant(n, 1.0).expect("positive constant"),
            _ => StrengthFunction::quadratic(n),
        };
        let mut state = claim_deal(n, m, &f, &mut rng).expect("valid deal");
        for _ in 0..rng.gen_range(0..20) {
            if state.active_players() < 2 {
                break;
            }
            state = fwar_step(&state, &f, &mut rng).expect("two players active");
        }
        if state.active_players() < 2 {
            continue;
        }
        let (e, p) = martingale_step_identity_f(&state, &f).expect("two players active");
        let err = relative_error(e, p);
        if err > 1e-9 {
            return Check::new(
                "fwar_martingale_identity",
                false,
                format!("{} n={n} m={m} hands={:?}: enumerated {e}, predicted {p}", f.id(), state.hands),
            );
        }
        worst = worst.max(err);
        checked += 1;
    }
    Check::new("fwar_martingale_identity", true, format!("{states} states, max relative error {worst:e}"))
}

/// Exhaustive axiom check of `rule` for every `n <= max_n`, `2 <= m <= max_m`.
pub fn rule_axioms_exhaustive(rule: &dyn WinningRule, max_n: u32, max_m: usize) -> Check {
    let name = format!("rule_axioms[{}]", rule.id());
    let mut configurations = 0;
    for n in 1..=max_n {
        for m in 2..=max_m {
            let report = validate_rule_exhaustive(rule, n, m);
            configurations += report.configurations;
            if let Some(v) = report.violations.first() {
                return Check::new(name, false, format!("n={n} m={m} {}: {}", v.axiom, v.witness));
            }
        }
    }
    Check::new(name, true, format!("{configurations} configurations"))
}

/// Random-sample axiom check of `rule` at deck size `n` with `m` players.
pub fn rule_axioms_sampled(rule: &dyn WinningRule, n: u32, m: usize, samples: u64, seed: u64) -> Check {
    let name = format!("rule_axioms[{}]", rule.id());
    let report = validate_rule(rule, n, m, samples, &mut derive_stream(seed, 0));
    match report.violations.first() {
        Some(v) => Check::new(name, false, format!("{} ({} of {samples}): {}", v.axiom, v.count, v.witness)),
        None => Check::new(name, true, format!("{samples} samples, n={n} m={m}")),
    }
}

/// Winner law of one round from a uniform deal: TV distance from uniform on active players.
pub fn equivalence(sizes: &Composition, rule: &dyn WinningRule, reps: u64, seed: u64) -> Check {
    let name = format!("equivalence[{}{}]", rule.id(), sizes);
    match equivalence_check(sizes, rule, reps, &mut derive_stream(seed, 0)) {
        Ok(r) => Check::new(
            name,
            r.tv_distance <= 0.02 && r.size_update_mismatches == 0,
            format!(
                "tv={:.4} chi2={:.2} df={} mismatches={}",
                r.tv_distance, r.chi_square, r.degrees_of_freedom, r.size_update_mismatches
            ),
        ),
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyLimits {
    /// Largest deck for the exhaustive walk identity and rule checks.
    pub max_n: u32,
    pub max_m: usize,
    pub seed: u64,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        Self { max_n: 12, max_m: 4, seed: 0 }
    }
}

/// The full suite with the given limits and rules.
pub fn run_suite(limits: &VerifyLimits, rules: &[&dyn WinningRule]) -> Vec<Check> {
    let mut checks = vec![walk_martingale_identity(limits.max_n, limits.max_m), two_player_ruin(20)];
    checks.extend(three_player_closed_forms(15));
    checks.push(bound_containment(15, limits.max_m));
    checks.push(fwar_martingale_identity(1000, 10, limits.max_m, limits.seed));
    for rule in rules {
        checks.push(rule_axioms_exhaustive(*rule, limits.max_n.min(10), limits.max_m));
        if rule.is_symmetric() {
            for sizes in [vec![2, 2], vec![3, 2, 1], vec![4, 4, 4]] {
                checks.push(equivalence(&Composition::new(sizes).unwrap(), *rule, 10_000, limits.seed));
            }
        }
    }
    checks
}
