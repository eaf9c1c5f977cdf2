//! CSV rendering. Column order is part of the interface and covered by golden tests.

use warwalk::SimSummary;

use crate::manifest::ExperimentManifest;

/// Shortest round-trip form; integral values keep a trailing `.0`.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

pub const WALK_HEADER: &str = "n,m,reps,mean,std_error,median,max,lower_bound,upper_bound";

pub fn walk_csv(manifest: &ExperimentManifest) -> String {
    let mut header = WALK_HEADER.to_string();
    if manifest.exact.is_some() {
        header.push_str(",exact");
    }
    let s = &manifest.summary;
    let (lo, hi) = manifest.bounds.unwrap_or((f64::NAN, f64::NAN));
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{}",
        manifest.config.n,
        manifest.config.m,
        s.replications,
        real(s.mean_rounds),
        real(s.std_error),
        real(s.median_rounds),
        s.max_rounds,
        real(lo),
        real(hi)
    );
    if let Some(exact) = manifest.exact {
        row.push(',');
        row.push_str(&real(exact));
    }
    format!("{header}\n{row}\n")
}

pub const SWEEP_HEADER: &str = "n,m,n2,n2_over_m2,avg,avg_over_n2";

pub fn sweep_row(n: u32, m: usize, summary: &SimSummary) -> String {
    let n2 = u64::from(n) * u64::from(n);
    let m2 = (m * m) as f64;
    format!(
        "{},{},{},{},{},{}\n",
        n,
        m,
        n2,
        real(n2 as f64 / m2),
        real(summary.mean_rounds),
        real(summary.mean_rounds / n2 as f64)
    )
}

pub const SUMMARY_HEADER: &str = "variant,model,n,m,reps,completed,censored,mean,std_error,median,max";

/// Summary for the card-game variants; diagnostics are appended in key order.
pub fn summary_csv(manifest: &ExperimentManifest) -> String {
    let c = &manifest.config;
    let s = &manifest.summary;
    let mut header = SUMMARY_HEADER.to_string();
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        c.variant,
        c.model.as_deref().unwrap_or(""),
        c.n,
        c.m,
        s.replications,
        s.completed,
        s.censored,
        real(s.mean_rounds),
        real(s.std_error),
        real(s.median_rounds),
        s.max_rounds
    );
    for (key, value) in &manifest.diagnostics {
        header.push(',');
        header.push_str(key);
        row.push(',');
        row.push_str(&real(*value));
    }
    format!("{header}\n{row}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_their_decimal_point() {
        assert_eq!(real(4.0), "4.0");
        assert_eq!(real(268.094), "268.094");
        assert_eq!(real(0.1 + 0.2), "0.30000000000000004");
    }
}
