//! Experiment harness: seeded universality sweeps over (n, p) grids and
//! threshold estimation by bisection, with reproducible CSV/JSON output.
//!
//! Attempts are independent tasks fanned out over a worker pool; results are
//! collected by attempt index, so the emitted records are byte-stable no
//! matter the worker count. Hosts are coupled across densities: the host
//! seed of an attempt depends on everything except p, and the per-pair
//! generators make the sparser host a subgraph of the denser one.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use cycle_embed::cycles::{enumerate_bounded_family, validate_spec, ConstantsProfile, CycleSpec};
use cycle_embed::embed::{embed, make_layers, Phase};
use cycle_embed::graph::{random_graph, RandomSeed};
use cycle_embed::oracle::brute_force_embed;

pub const WORKERS_ENV: &str = "CYCLELAB_WORKERS";

/// How specs are drawn for each (n, p) grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpecPolicy {
    /// Every spec of the bounded family (only sensible under the oracle cap).
    Exhaustive,
    /// `count` uniformly sampled members of the bounded family per n.
    Random { count: usize },
    /// An explicit spec list (shared across all n that match).
    Corpus { specs: Vec<Vec<u64>> },
}

/// Whether embeddability is decided by the exhaustive oracle or attempted by
/// the constructive pipeline. Summaries never merge the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Oracle,
    Pipeline,
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunMode::Oracle => "oracle",
            RunMode::Pipeline => "pipeline",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub ell: u64,
    pub ps: Vec<f64>,
    pub trials: usize,
    pub spec_policy: SpecPolicy,
    pub mode: RunMode,
    pub master_seed: u64,
    #[serde(default)]
    pub profile: Option<ConstantsProfile>,
    #[serde(default)]
    pub oracle_cap: Option<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(!self.ns.is_empty(), "empty n grid");
        anyhow::ensure!(!self.ps.is_empty(), "empty p grid");
        anyhow::ensure!(self.trials >= 1, "trials must be at least 1");
        for &p in &self.ps {
            anyhow::ensure!((0.0..=1.0).contains(&p), "p = {p} outside [0, 1]");
        }
        if let Some(profile) = &self.profile {
            profile.validate().map_err(|e| anyhow::anyhow!("profile: {e}"))?;
        }
        Ok(())
    }

    pub fn profile(&self) -> ConstantsProfile {
        self.profile.clone().unwrap_or_else(ConstantsProfile::desk)
    }
}

/// One attempt outcome; the CSV columns are exactly
/// `n,p,spec_id,seed,phase,success,retries,ms`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub p: f64,
    pub spec_id: String,
    pub seed: u64,
    pub phase: String,
    pub success: bool,
    pub retries: u32,
    pub ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub n: usize,
    pub p: f64,
    pub attempts: usize,
    pub successes: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub mode: RunMode,
    pub cells: Vec<SweepCell>,
}

/// Expands the spec policy for one n, deterministically under the master
/// seed.
fn specs_for(config: &SweepConfig, n: usize) -> Vec<CycleSpec> {
    match &config.spec_policy {
        SpecPolicy::Exhaustive => enumerate_bounded_family(n, config.ell, n as u64),
        SpecPolicy::Random { count } => {
            use rand::seq::SliceRandom;
            let family = enumerate_bounded_family(n, config.ell, n as u64);
            let mut rng =
                RandomSeed::new(config.master_seed, format!("specs/{n}")).rng();
            let mut picks: Vec<CycleSpec> = Vec::with_capacity(*count);
            for _ in 0..*count {
                picks.push(family.choose(&mut rng).expect("nonempty family").clone());
            }
            picks
        }
        SpecPolicy::Corpus { specs } => specs
            .iter()
            .map(|lengths| CycleSpec::new(lengths.clone()))
            .filter(|s| s.n <= n && validate_spec(s, config.ell).is_ok())
            .map(|s| pad_spec(s, n))
            .collect(),
    }
}

/// Pads a spec with isolated vertices up to n (corpus specs are given as
/// cycle cores).
fn pad_spec(spec: CycleSpec, n: usize) -> CycleSpec {
    let mut lengths = spec.lengths;
    lengths.extend(std::iter::repeat(1).take(n - lengths.iter().sum::<u64>() as usize));
    CycleSpec::new(lengths)
}

/// The host seed for an attempt: independent of p, so hosts at different
/// densities couple monotonically.
fn attempt_seed(master: u64, n: usize, spec_idx: usize, trial: usize) -> u64 {
    // splitmix64 over the coordinates.
    let mut z = master
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (spec_idx as u64).rotate_left(24)
        ^ (trial as u64).rotate_left(48);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one attempt: embeddability by the configured mode.
fn run_attempt(
    config: &SweepConfig,
    profile: &ConstantsProfile,
    n: usize,
    p: f64,
    spec: &CycleSpec,
    seed_value: u64,
) -> (bool, Phase, u32, u128) {
    let start = Instant::now();
    match config.mode {
        RunMode::Oracle => {
            let host = random_graph(n, p, &RandomSeed::new(seed_value, "host"))
                .expect("validated p");
            let cap = config.oracle_cap.unwrap_or(profile.oracle_cap);
            let ok = brute_force_embed(&host, spec, cap)
                .map(|r| r.embeddable)
                .unwrap_or(false);
            (ok, Phase::Done, 0, start.elapsed().as_millis())
        }
        RunMode::Pipeline => {
            let layers = match make_layers(n, p, &RandomSeed::new(seed_value, "layers")) {
                Ok(l) => l,
                Err(_) => return (false, Phase::Bounded, 0, start.elapsed().as_millis()),
            };
            match embed(&layers, spec, profile, &RandomSeed::new(seed_value, "embed")) {
                Ok(report) => {
                    (true, report.phase, report.retries, start.elapsed().as_millis())
                }
                Err(_) => (false, Phase::Bounded, profile.phase_retries, start.elapsed().as_millis()),
            }
        }
    }
}

/// Executes the whole grid. Records come back in deterministic attempt
/// order; `workers` 0 means use the environment variable or one.
pub fn run_sweep(config: &SweepConfig) -> anyhow::Result<(Vec<SweepRecord>, SweepSummary)> {
    config.validate()?;
    let profile = config.profile();
    // Materialize the attempt grid first.
    struct Attempt {
        n: usize,
        p: f64,
        spec: CycleSpec,
        seed_value: u64,
    }
    let mut attempts: Vec<Attempt> = Vec::new();
    for &n in &config.ns {
        let specs = specs_for(config, n);
        for &p in &config.ps {
            for (spec_idx, spec) in specs.iter().enumerate() {
                for trial in 0..config.trials {
                    attempts.push(Attempt {
                        n,
                        p,
                        spec: spec.clone(),
                        seed_value: attempt_seed(config.master_seed, n, spec_idx, trial),
                    });
                }
            }
        }
    }

    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1);
    let results: Vec<Mutex<Option<SweepRecord>>> =
        (0..attempts.len()).map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= attempts.len() {
                    break;
                }
                let a = &attempts[i];
                let (success, phase, retries, ms) =
                    run_attempt(config, &profile, a.n, a.p, &a.spec, a.seed_value);
                *results[i].lock().unwrap() = Some(SweepRecord {
                    n: a.n,
                    p: a.p,
                    spec_id: a.spec.id(),
                    seed: a.seed_value,
                    phase: phase.to_string(),
                    success,
                    retries,
                    ms,
                });
            });
        }
    });
    let records: Vec<SweepRecord> =
        results.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect();

    // Aggregate per (n, p).
    let mut cells: BTreeMap<(usize, u64), (usize, usize)> = BTreeMap::new();
    for r in &records {
        let key = (r.n, r.p.to_bits());
        let e = cells.entry(key).or_insert((0, 0));
        e.0 += 1;
        if r.success {
            e.1 += 1;
        }
    }
    let summary = SweepSummary {
        mode: config.mode,
        cells: cells
            .into_iter()
            .map(|((n, pb), (attempts, successes))| SweepCell {
                n,
                p: f64::from_bits(pb),
                attempts,
                successes,
                rate: successes as f64 / attempts as f64,
            })
            .collect(),
    };
    Ok((records, summary))
}

/// Writes records in the fixed column order.
pub fn write_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> anyhow::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "n,p,spec_id,seed,phase,success,retries,ms")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n, r.p, r.spec_id, r.seed, r.phase, r.success, r.retries, r.ms
        )?;
    }
    out.flush()?;
    Ok(())
}

/// A gnuplot-compatible companion script for a sweep CSV; data only, no
/// rendering dependencies here.
pub fn plot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'p'\n\
         set ylabel 'success rate'\n\
         set yrange [0:1.05]\n\
         # aggregate per (n, p) with smooth unique after filtering by n\n\
         plot '{csv_path}' using 2:($6 eq 'true' ? 1 : 0) smooth unique with linespoints\n"
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdEstimate {
    pub n: usize,
    pub ell: u64,
    pub mode: RunMode,
    pub target_rate: f64,
    pub p_star: f64,
    pub bracket: (f64, f64),
    pub rate_at_lo: f64,
    pub rate_at_hi: f64,
    pub trials_per_point: usize,
    /// Normal-approximation half width on the measured rates.
    pub rate_half_width: f64,
}

/// Success rate at one density under the config's mode and spec policy: a
/// trial succeeds when every drawn spec embeds.
fn success_rate(config: &SweepConfig, profile: &ConstantsProfile, n: usize, p: f64) -> f64 {
    let specs = specs_for(config, n);
    if specs.is_empty() {
        return 1.0;
    }
    let mut hits = 0usize;
    for trial in 0..config.trials {
        let mut all = true;
        for (spec_idx, spec) in specs.iter().enumerate() {
            let seed_value = attempt_seed(config.master_seed, n, spec_idx, trial);
            let (ok, _, _, _) = run_attempt(config, profile, n, p, spec, seed_value);
            if !ok {
                all = false;
                break;
            }
        }
        if all {
            hits += 1;
        }
    }
    hits as f64 / config.trials as f64
}

/// Bisection on p against the empirical success rate, with coupled seeds so
/// the same trial uses nested hosts across densities. The mode is oracle-
/// based under the cap and pipeline-based above it, never mixed.
pub fn estimate_threshold(
    n: usize,
    ell: u64,
    target_rate: f64,
    config: &SweepConfig,
    resolution: f64,
) -> anyhow::Result<ThresholdEstimate> {
    anyhow::ensure!((0.0..1.0).contains(&target_rate) && target_rate > 0.0);
    let profile = config.profile();
    let cap = config.oracle_cap.unwrap_or(profile.oracle_cap);
    let mode = if n <= cap { RunMode::Oracle } else { RunMode::Pipeline };
    let mut local = config.clone();
    local.mode = mode;
    local.ell = ell;

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let rate_hi = success_rate(&local, &profile, n, hi);
    let rate_lo = success_rate(&local, &profile, n, lo);
    anyhow::ensure!(
        rate_hi >= target_rate && rate_lo <= target_rate,
        "target rate {target_rate} not bracketed: rate(0) = {rate_lo}, rate(1) = {rate_hi}"
    );
    let mut rate_at_lo = rate_lo;
    let mut rate_at_hi = rate_hi;
    while hi - lo > resolution {
        let mid = (lo + hi) / 2.0;
        let rate = success_rate(&local, &profile, n, mid);
        if rate >= target_rate {
            hi = mid;
            rate_at_hi = rate;
        } else {
            lo = mid;
            rate_at_lo = rate;
        }
    }
    let half_width = 1.96 * (0.25 / config.trials as f64).sqrt();
    Ok(ThresholdEstimate {
        n,
        ell,
        mode,
        target_rate,
        p_star: (lo + hi) / 2.0,
        bracket: (lo, hi),
        rate_at_lo,
        rate_at_hi,
        trials_per_point: config.trials,
        rate_half_width: half_width,
    })
}

/// Least-squares slope of log p* against log n with its standard error;
/// the exploratory exponent diagnostic.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| p.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let residual: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let dof = (m - 2.0).max(1.0);
    let stderr = (residual / dof / sxx).sqrt();
    Some((slope, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(mode: RunMode) -> SweepConfig {
        SweepConfig {
            ns: vec![6],
            ell: 3,
            ps: vec![0.0, 1.0],
            trials: 3,
            spec_policy: SpecPolicy::Corpus { specs: vec![vec![3], vec![2, 2]] },
            mode,
            master_seed: 7,
            profile: None,
            oracle_cap: None,
        }
    }

    #[test]
    fn sweep_extremes_in_oracle_mode() {
        let (records, summary) = run_sweep(&tiny_config(RunMode::Oracle)).unwrap();
        assert_eq!(records.len(), 2 * 2 * 3);
        for cell in &summary.cells {
            if cell.p == 1.0 {
                assert_eq!(cell.rate, 1.0);
            } else {
                assert_eq!(cell.rate, 0.0);
            }
        }
    }

    #[test]
    fn sweep_csv_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(RunMode::Oracle);
        let (r1, _) = run_sweep(&config).unwrap();
        let (r2, _) = run_sweep(&config).unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        write_csv(&r1, &p1).unwrap();
        write_csv(&r2, &p2).unwrap();
        let a = std::fs::read_to_string(&p1).unwrap();
        let b = std::fs::read_to_string(&p2).unwrap();
        // Byte-identical up to the wall-time column, which is measured.
        let strip = |s: &str| -> String {
            s.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.starts_with("n,p,spec_id,seed,phase,success,retries,ms\n"));
    }

    #[test]
    fn summary_rates_match_recomputation_from_records() {
        let (records, summary) = run_sweep(&tiny_config(RunMode::Oracle)).unwrap();
        for cell in &summary.cells {
            let rows: Vec<_> = records
                .iter()
                .filter(|r| r.n == cell.n && r.p == cell.p)
                .collect();
            let successes = rows.iter().filter(|r| r.success).count();
            assert_eq!(cell.attempts, rows.len());
            assert_eq!(cell.successes, successes);
            assert!((cell.rate - successes as f64 / rows.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_monotone_under_coupling() {
        // Coupled hosts: embeddability at the lower density implies it at
        // the higher density, trial by trial.
        let config = SweepConfig {
            ns: vec![8],
            ell: 3,
            ps: vec![0.35, 0.7],
            trials: 12,
            spec_policy: SpecPolicy::Corpus { specs: vec![vec![3, 3], vec![5]] },
            mode: RunMode::Oracle,
            master_seed: 11,
            profile: None,
            oracle_cap: None,
        };
        let (records, _) = run_sweep(&config).unwrap();
        let mut by_key: BTreeMap<(String, u64), BTreeMap<u64, bool>> = BTreeMap::new();
        for r in &records {
            by_key
                .entry((r.spec_id.clone(), r.seed))
                .or_default()
                .insert(r.p.to_bits(), r.success);
        }
        for (_, outcomes) in by_key {
            let lo = outcomes[&0.35f64.to_bits()];
            let hi = outcomes[&0.7f64.to_bits()];
            assert!(!lo || hi, "coupled monotonicity violated");
        }
    }

    #[test]
    fn threshold_bisection_brackets_and_reproduces() {
        let config = SweepConfig {
            ns: vec![8],
            ell: 3,
            ps: vec![],
            trials: 10,
            spec_policy: SpecPolicy::Corpus { specs: vec![vec![3]] },
            mode: RunMode::Oracle,
            master_seed: 5,
            profile: None,
            oracle_cap: None,
        };
        let a = estimate_threshold(8, 3, 0.5, &config, 0.02).unwrap();
        let b = estimate_threshold(8, 3, 0.5, &config, 0.02).unwrap();
        assert_eq!(a.p_star, b.p_star);
        assert!(a.bracket.0 <= a.p_star && a.p_star <= a.bracket.1);
        assert!(a.bracket.1 - a.bracket.0 <= 0.02 + 1e-9);
        assert_eq!(a.mode, RunMode::Oracle);
    }

    #[test]
    fn slope_regression_recovers_a_line() {
        // p* = n^(-2/3) exactly.
        let pts: Vec<(usize, f64)> =
            [10usize, 20, 40, 80].iter().map(|&n| (n, (n as f64).powf(-2.0 / 3.0))).collect();
        let (slope, err) = log_log_slope(&pts).unwrap();
        assert!((slope + 2.0 / 3.0).abs() < 1e-9);
        assert!(err < 1e-9);
    }
}
