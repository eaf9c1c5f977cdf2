use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn warwalk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warwalk")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn walk_csv_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let out = warwalk(&["walk", "--n", "4", "--m", "2", "--reps", "1000", "--seed", "1", "--exact"], tmp.path());
    assert_eq!(stdout(&out), golden("walk_n4_m2_seed1.csv"));
}

#[test]
fn walk_exact_values() {
    let tmp = tempfile::tempdir().unwrap();
    for (args, exact) in [
        (&["--n", "6", "--m", "3", "--reps", "10000"][..], "8.0"),
        (&["--sizes", "3,4"][..], "12.0"),
        (&["--n", "7", "--sizes", "3,4"][..], "12.0"),
    ] {
        let mut all = vec!["walk", "--seed", "3", "--exact", "--threads", "2"];
        all.extend(args);
        let text = stdout(&warwalk(&all, tmp.path()));
        let rows = csv_rows(&text);
        assert_eq!(rows[0].last().unwrap(), "exact");
        assert_eq!(rows[1].last().unwrap(), exact, "{args:?}");
        let mean: f64 = rows[1][3].parse().unwrap();
        let se: f64 = rows[1][4].parse().unwrap();
        let exact: f64 = exact.parse().unwrap();
        assert!((mean - exact).abs() <= 4.0 * se, "{args:?}: mean {mean} se {se}");
    }
}

#[test]
fn walk_json_is_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = warwalk(&["walk", "--n", "6", "--m", "2", "--seed", "9", "--output", "json", "--reps", "50"], tmp.path());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["config", "tool_version", "wall_time_seconds", "summary", "bounds", "exact", "diagnostics"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["variant"], "sticky_walk");
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["summary"]["replications"], 50);
    assert_eq!(v["bounds"], serde_json::json!([9.0, 9.0]));
    assert!(v["exact"].is_null());
}

#[test]
fn sweep_matches_golden_and_warns_on_skips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = warwalk(&["sweep", "--n-list", "4,8", "--m-list", "2,3", "--reps", "500", "--seed", "11"], tmp.path());
    assert_eq!(stdout(&out), golden("sweep_seed11.csv"));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("n=8, m=3"), "{err}");
    assert!(err.contains("n=4, m=3"), "{err}");
}

#[test]
fn fwar_and_war_outputs_match_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let d = dir.to_str().unwrap();
    let fwar = warwalk(&["fwar", "--n", "10", "--m", "3", "--reps", "300", "--seed", "5", "--out-dir", d], tmp.path());
    assert_eq!(stdout(&fwar), golden("fwar_n10_m3_seed5.csv"));
    assert_eq!(std::fs::read_to_string(dir.join("fwar_summary.csv")).unwrap(), golden("fwar_n10_m3_seed5.csv"));

    let war = warwalk(
        &["war", "--players", "3", "--reps", "200", "--seed", "5", "--out-dir", d, "--bin-width", "100", "--hist"],
        tmp.path(),
    );
    assert_eq!(stdout(&war), golden("war_m3_seed5.csv"));
    assert_eq!(
        std::fs::read_to_string(dir.join("standard_war_histogram.csv")).unwrap(),
        golden("war_m3_seed5_histogram.csv")
    );
    assert!(!dir.join("fwar_histogram.csv").exists());

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("fwar_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["deal"], "claim");
    assert_eq!(manifest["config"]["model"], "affine");
    assert_eq!(manifest["diagnostics"]["q_sum_leading"], 15000.0);
}

#[test]
fn war_histogram_counts_every_game() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    stdout(&warwalk(&["war", "--players", "2", "--reps", "3000", "--seed", "2", "--hist", "--out-dir", d], tmp.path()));
    let hist = std::fs::read_to_string(tmp.path().join("standard_war_histogram.csv")).unwrap();
    let rows = csv_rows(&hist);
    assert_eq!(rows[0], ["bin_lower", "bin_upper", "count"]);
    let total: u64 = rows[1..].iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 3000);
}

#[test]
fn pwar_highest_card_matches_three_player_value() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    let text = stdout(&warwalk(
        &["pwar", "--rule", "highest_card", "--n", "6", "--m", "3", "--reps", "10000", "--seed", "4", "--out-dir", d],
        tmp.path(),
    ));
    let rows = csv_rows(&text);
    let mean: f64 = rows[1][7].parse().unwrap();
    let se: f64 = rows[1][8].parse().unwrap();
    assert!((mean - 8.0).abs() <= 4.0 * se, "mean {mean} se {se}");
}

#[test]
fn config_file_fills_in_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("exp.conf"),
        "# walk experiment\nn = 8\nm = 2\nseed = 5\nreps = 100\nexact = true\n",
    )
    .unwrap();
    let from_file = stdout(&warwalk(&["walk", "--config", "exp.conf"], tmp.path()));
    let rows = csv_rows(&from_file);
    assert_eq!(&rows[1][..3], ["8", "2", "100"]);
    assert_eq!(rows[1][9], "16.0");

    let overridden = stdout(&warwalk(&["walk", "--config", "exp.conf", "--reps", "40", "--n", "6"], tmp.path()));
    assert_eq!(&csv_rows(&overridden)[1][..3], ["6", "2", "40"]);
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["walk", "--n", "8", "--m", "2"],
        &["walk", "--n", "8", "--m", "3", "--seed", "1"],
        &["walk", "--n", "200", "--m", "50", "--seed", "1", "--reps", "1", "--exact"],
        &["pwar", "--rule", "nope", "--n", "6", "--m", "3", "--seed", "1"],
        &["fwar", "--strength", "nope", "--n", "6", "--m", "3", "--seed", "1"],
        &["war", "--players", "60", "--seed", "1"],
    ];
    for args in cases {
        let out = warwalk(args, tmp.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(warwalk(&["walk", "--bogus"], tmp.path()).status.code(), Some(2));
}

#[test]
fn verify_passes_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let out = warwalk(&["verify", "--report", "report.json"], tmp.path());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("PASS walk_martingale_identity")));
    assert!(!text.contains("FAIL"));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["failures"], 0);
}

#[test]
fn verify_reports_a_faulty_rule() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("rule.txt"), "id = faulty\nprobabilities = 0.7, 0.7\n").unwrap();
    let out = warwalk(&["verify", "--rule-file", "rule.txt", "--max-n", "6", "--max-m", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL rule_axioms[faulty]")), "{text}");
    let report: Value = serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["checks"][0]["name"], "rule_axioms[faulty]");
}

#[test]
fn replay_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&warwalk(
        &["walk", "--n", "6", "--m", "3", "--seed", "2", "--reps", "200", "--manifest", "m.json"],
        tmp.path(),
    ));
    assert!(warwalk(&["replay", "m.json", "--threads", "3"], tmp.path()).status.success());

    let path = tmp.path().join("m.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["summary"]["max_rounds"] = Value::from(1u64);
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(warwalk(&["replay", "m.json"], tmp.path()).status.code(), Some(1));
}
