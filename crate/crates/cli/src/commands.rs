use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use warwalk::exact::exact_expected_absorption;
use warwalk::fwar::{run_fwar, StrengthRegistry};
use warwalk::pwar::{builtin_rule, run_pwar, BuiltinRule, FixedRule, RuleRegistry, WinningRule};
use warwalk::verify::{run_suite, Check, VerifyLimits};
use warwalk::walk::{run_walk, theorem_bounds};
use warwalk::war::run_standard_war;
use warwalk::{Composition, Deal, RunConfig, Variant};

use crate::args::{Common, FwarArgs, OutputArgs, PwarArgs, ReplayArgs, SweepArgs, VerifyArgs, WalkArgs, WarArgs};
use crate::config::ConfigFile;
use crate::manifest::ExperimentManifest;
use crate::output::{summary_csv, sweep_row, walk_csv, SWEEP_HEADER};

const EXACT_TOLERANCE: f64 = 1e-13;
/// The solver is good to roughly this many significant digits; the rest is rounding noise.
const EXACT_DIGITS: usize = 12;

fn round_significant(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// What a command prints and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub exit_code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self { stdout, exit_code: 0 }
    }
}

struct Shared {
    config: ConfigFile,
    seed: u64,
    reps: Option<u64>,
    round_cap: Option<u64>,
    threads: usize,
}

impl Shared {
    fn resolve(common: &Common) -> Result<Self> {
        let config = ConfigFile::load(common.config.as_deref())?;
        let seed = config
            .pick(common.seed, "seed")?
            .ok_or_else(|| anyhow!("--seed is required (as a flag or in the config file)"))?;
        let threads = match config.pick(common.threads, "threads")? {
            Some(t) => t,
            None => std::thread::available_parallelism().map_or(1, usize::from),
        };
        Ok(Self {
            seed,
            reps: config.pick(common.reps, "reps")?,
            round_cap: config.pick(common.round_cap, "round-cap")?,
            threads,
            config,
        })
    }

    fn run_config(&self, variant: Variant, n: u32, m: usize) -> RunConfig {
        let mut c = RunConfig::new(variant, n, m, self.seed).with_threads(self.threads);
        if let Some(reps) = self.reps {
            c = c.with_replications(reps);
        }
        if let Some(cap) = self.round_cap {
            c = c.with_round_cap(cap);
        }
        c
    }

    fn required<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.config.pick(flag, key)?.ok_or_else(|| anyhow!("--{key} is required"))
    }
}

pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow!("bad {what} entry `{}`: {e}", s.trim())))
        .collect()
}

/// `--sizes` wins over `--n`/`--m`, which must agree with it when also given.
fn start_deal(shared: &Shared, n: Option<u32>, m: Option<usize>, sizes: Option<String>) -> Result<(u32, usize, Deal)> {
    let n = shared.config.pick(n, "n")?;
    let m = shared.config.pick(m, "m")?;
    match shared.config.pick(sizes, "sizes")? {
        Some(text) => {
            let c = Composition::new(parse_list(&text, "--sizes")?)?;
            if n.is_some_and(|n| n != c.total()) {
                bail!("--n {} disagrees with --sizes totalling {}", n.unwrap_or_default(), c.total());
            }
            if m.is_some_and(|m| m != c.players()) {
                bail!("--m {} disagrees with {} entries in --sizes", m.unwrap_or_default(), c.players());
            }
            Ok((c.total(), c.players(), Deal::Sizes(c)))
        }
        None => {
            let n = n.ok_or_else(|| anyhow!("--n is required unless --sizes is given"))?;
            let m = m.ok_or_else(|| anyhow!("--m is required unless --sizes is given"))?;
            Ok((n, m, Deal::Equal))
        }
    }
}

/// Runs any config end to end. Replays go through here too, so a manifest reproduces itself.
pub fn run_experiment(config: &RunConfig, exact: bool) -> Result<ExperimentManifest> {
    config.validate()?;
    let clock = Instant::now();
    let mut bounds = None;
    let mut exact_value = None;
    let mut diagnostics = Vec::new();
    let summary = match config.variant {
        Variant::StickyWalk => {
            let start = config.initial_sizes()?.expect("walk deals fix hand sizes");
            bounds = Some(theorem_bounds(&start));
            if exact {
                let h = exact_expected_absorption(&start, EXACT_TOLERANCE)?.expected_time;
                exact_value = Some(round_significant(h, EXACT_DIGITS));
            }
            run_walk(config)?
        }
        Variant::Pwar => {
            let id = config.model.as_deref().ok_or_else(|| anyhow!("p-war config has no rule"))?;
            let rule = RuleRegistry::default().get(id)?;
            run_pwar(config, rule.as_ref())?
        }
        Variant::Fwar => {
            let id = config.model.as_deref().ok_or_else(|| anyhow!("f-war config has no strength function"))?;
            let f = StrengthRegistry::default().build(id, config.n)?;
            let report = run_fwar(config, &f)?;
            diagnostics.push(("mean_q_sum", report.mean_q_sum));
            diagnostics.push(("q_sum_leading", report.q_sum_leading));
            diagnostics.push(("q_sum_ratio", report.mean_q_sum / report.q_sum_leading));
            report.summary
        }
        Variant::StandardWar => run_standard_war(config)?,
    };
    let mut manifest = ExperimentManifest::new(config.clone(), summary, clock.elapsed().as_secs_f64());
    manifest.bounds = bounds;
    manifest.exact = exact_value;
    manifest.diagnostics = diagnostics.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok(manifest)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn cmd_walk(args: &WalkArgs) -> Result<Output> {
    let shared = Shared::resolve(&args.common)?;
    let (n, m, deal) = start_deal(&shared, args.n, args.m, args.sizes.clone())?;
    let config = shared.run_config(Variant::StickyWalk, n, m).with_deal(deal);
    let exact = shared.config.pick_bool(args.exact, "exact")?;
    let json = match args.output {
        Some(f) => f == crate::args::OutputFormat::Json,
        None => match shared.config.raw("output") {
            None | Some("csv") => false,
            Some("json") => true,
            Some(other) => bail!("config `output`: expected csv or json, got `{other}`"),
        },
    };
    let manifest = run_experiment(&config, exact)?;
    if let Some(path) = shared.config.pick(args.manifest.clone(), "manifest")? {
        write_file(&path, &manifest.to_json()?)?;
    }
    Ok(Output::ok(if json { manifest.to_json()? } else { walk_csv(&manifest) }))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Output> {
    let shared = Shared::resolve(&args.common)?;
    let ns: Vec<u32> = parse_list(&shared.required(args.n_list.clone(), "n-list")?, "--n-list")?;
    let ms: Vec<usize> = parse_list(&shared.required(args.m_list.clone(), "m-list")?, "--m-list")?;
    let mut out = format!("{SWEEP_HEADER}\n");
    for &n in &ns {
        for &m in &ms {
            if m < 2 || !(n as usize).is_multiple_of(m) || (n as usize) < 2 * m {
                eprintln!("warning: skipping n={n}, m={m} (need m >= 2, m | n and n/m >= 2)");
                continue;
            }
            let summary = run_walk(&shared.run_config(Variant::StickyWalk, n, m))?;
            out.push_str(&sweep_row(n, m, &summary));
        }
    }
    Ok(Output::ok(out))
}

/// Writes `<variant>_summary.csv`, `<variant>_manifest.json` and optionally the histogram;
/// returns the summary CSV.
fn emit(shared: &Shared, out: &OutputArgs, manifest: &ExperimentManifest) -> Result<String> {
    let dir = shared.config.pick(out.out_dir.clone(), "out-dir")?.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let variant = manifest.config.variant;
    let csv = summary_csv(manifest);
    write_file(&dir.join(format!("{variant}_summary.csv")), &csv)?;
    write_file(&dir.join(format!("{variant}_manifest.json")), &manifest.to_json()?)?;
    if shared.config.pick_bool(out.hist, "hist")? {
        write_file(&dir.join(format!("{variant}_histogram.csv")), &manifest.summary.histogram_csv())?;
    }
    Ok(csv)
}

fn with_bin_width(shared: &Shared, out: &OutputArgs, mut config: RunConfig) -> Result<RunConfig> {
    if let Some(w) = shared.config.pick(out.bin_width, "bin-width")? {
        config.bin_width = w;
    }
    Ok(config)
}

pub fn cmd_pwar(args: &PwarArgs) -> Result<Output> {
    let shared = Shared::resolve(&args.common)?;
    let (n, m, deal) = start_deal(&shared, args.n, args.m, args.sizes.clone())?;
    let rule: String = shared.config.pick(args.rule.clone(), "rule")?.unwrap_or_else(|| "uniform_active".into());
    let config = shared.run_config(Variant::Pwar, n, m).with_deal(deal).with_model(rule);
    let config = with_bin_width(&shared, &args.out, config)?;
    let manifest = run_experiment(&config, false)?;
    Ok(Output::ok(emit(&shared, &args.out, &manifest)?))
}

pub fn cmd_fwar(args: &FwarArgs) -> Result<Output> {
    let shared = Shared::resolve(&args.common)?;
    let n = shared.required(args.n, "n")?;
    let m = shared.required(args.m, "m")?;
    let strength: String = shared.config.pick(args.strength.clone(), "strength")?.unwrap_or_else(|| "affine".into());
    let deal = match args.deal {
        Some(crate::args::DealMode::Claim) => Deal::Claim,
        Some(crate::args::DealMode::Equal) => Deal::Equal,
        None => match shared.config.raw("deal") {
            None | Some("claim") => Deal::Claim,
            Some("equal") => Deal::Equal,
            Some(other) => bail!("config `deal`: expected claim or equal, got `{other}`"),
        },
    };
    let config = shared.run_config(Variant::Fwar, n, m).with_deal(deal).with_model(strength);
    let config = with_bin_width(&shared, &args.out, config)?;
    let manifest = run_experiment(&config, false)?;
    Ok(Output::ok(emit(&shared, &args.out, &manifest)?))
}

pub fn cmd_war(args: &WarArgs) -> Result<Output> {
    let shared = Shared::resolve(&args.common)?;
    let m = shared.required(args.players, "players")?;
    let mut config = shared.run_config(Variant::StandardWar, warwalk::war::DECK_SIZE as u32, m);
    config.allow_uneven_deal = !shared.config.pick_bool(args.strict_deal, "strict-deal")?;
    let config = with_bin_width(&shared, &args.out, config)?;
    let manifest = run_experiment(&config, false)?;
    Ok(Output::ok(emit(&shared, &args.out, &manifest)?))
}

/// Parses a rule file: either `builtin = <id>`, or `id`, `probabilities` (comma list) and
/// optionally `symmetric` (default false) describing a fixed-vector rule.
pub fn load_rule_file(path: &Path) -> Result<Box<dyn WinningRule>> {
    let file = ConfigFile::load(Some(path))?;
    if let Some(name) = file.raw("builtin") {
        return Ok(Box::new(builtin_rule(name)?));
    }
    let probabilities =
        file.raw("probabilities").ok_or_else(|| anyhow!("{}: needs `builtin` or `probabilities`", path.display()))?;
    Ok(Box::new(FixedRule {
        id: file.raw("id").unwrap_or("custom").to_string(),
        probabilities: parse_list(probabilities, "probabilities")?,
        symmetric: file.get("symmetric")?.unwrap_or(false),
    }))
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    passed: bool,
    failures: usize,
    checks: &'a [Check],
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Output> {
    let defaults = VerifyLimits::default();
    let limits = VerifyLimits {
        max_n: args.max_n.unwrap_or(defaults.max_n),
        max_m: args.max_m.unwrap_or(defaults.max_m),
        seed: args.seed.unwrap_or(defaults.seed),
    };
    let extra = args.rule_file.as_deref().map(load_rule_file).transpose()?;
    let mut rules: Vec<&dyn WinningRule> = BuiltinRule::ALL.iter().map(|r| r as &dyn WinningRule).collect();
    if let Some(rule) = &extra {
        rules.push(rule.as_ref());
    }
    let checks = run_suite(&limits, &rules);
    let failed: Vec<Check> = checks.iter().filter(|c| !c.passed).cloned().collect();

    let mut out = String::new();
    for c in &checks {
        out.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    out.push_str(&format!("{}/{} checks passed\n", checks.len() - failed.len(), checks.len()));

    if let Some(path) = &args.report {
        let report = VerifyReport { passed: failed.is_empty(), failures: failed.len(), checks: &checks };
        write_file(path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    if failed.is_empty() {
        return Ok(Output::ok(out));
    }
    let report = VerifyReport { passed: false, failures: failed.len(), checks: &failed };
    eprintln!("{}", serde_json::to_string(&report)?);
    Ok(Output { stdout: out, exit_code: 1 })
}

/// Re-runs a manifest and checks the summary is reproduced bit for bit.
pub fn cmd_replay(args: &ReplayArgs) -> Result<Output> {
    let recorded = ExperimentManifest::load(&args.manifest)?;
    let mut config = recorded.config.clone();
    if let Some(t) = args.threads {
        config.threads = t;
    }
    let rerun = run_experiment(&config, recorded.exact.is_some())?;
    let same = rerun.summary == recorded.summary
        && rerun.exact.map(f64::to_bits) == recorded.exact.map(f64::to_bits)
        && rerun.diagnostics.len() == recorded.diagnostics.len()
        && rerun
            .diagnostics
            .iter()
            .zip(&recorded.diagnostics)
            .all(|(a, b)| a.0 == b.0 && a.1.to_bits() == b.1.to_bits());
    let csv = if config.variant == Variant::StickyWalk { walk_csv(&rerun) } else { summary_csv(&rerun) };
    if same {
        Ok(Output::ok(csv))
    } else {
        eprintln!("replay of {} did not reproduce the recorded summary", args.manifest.display());
        Ok(Output { stdout: csv, exit_code: 1 })
    }
}
