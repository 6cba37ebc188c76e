//! Command-line interface for embedding runs, universality sweeps, threshold
//! estimation, and the exhaustive oracle.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use cycle_embed::cycles::{validate_spec, ConstantsProfile, CycleSpec};
use cycle_embed::embed::{embed, ExposureLayers};
use cycle_embed::graph::{read_edge_list, RandomSeed};
use cycle_embed::oracle::exhaustive_universality;
use cycle_lab::{
    estimate_threshold, plot_script, run_sweep, write_csv, RunMode, SpecPolicy, SweepConfig,
};

#[derive(Parser)]
#[command(name = "cyclelab", about = "Cycle embedding experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a spec into a host graph loaded from an edge-list file.
    Embed {
        /// Host graph file: header "n m" then one "u v" line per edge.
        #[arg(long)]
        host: PathBuf,
        /// Target spec JSON: {"n": int, "cycles": [int, ...]}.
        #[arg(long)]
        spec: PathBuf,
        /// Profile name (currently "desk").
        #[arg(long, default_value = "desk")]
        profile: String,
        #[arg(long)]
        seed: u64,
        /// Nominal edge density used to split the host into exposure layers;
        /// defaults to the host's empirical density.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Run a sweep over an (n, p) grid from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path; a JSON summary and a gnuplot script land next to
        /// it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the density where the success rate crosses a target.
    Threshold {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Bisection stops at this p resolution.
        #[arg(long, default_value_t = 0.02)]
        resolution: f64,
        /// Spec lengths defining the probed property; repeatable. A trial
        /// succeeds when every listed spec embeds. Default: one triangle.
        #[arg(long = "spec", value_delimiter = '+')]
        specs: Vec<String>,
    },
    /// Exhaustive universality check of a host over the whole family.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        host: PathBuf,
        #[arg(long, default_value_t = 14)]
        cap: usize,
    },
}

fn profile_by_name(name: &str) -> anyhow::Result<ConstantsProfile> {
    match name {
        "desk" => Ok(ConstantsProfile::desk()),
        other => anyhow::bail!("unknown profile {other:?}; built-in profiles: desk"),
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Embed { host, spec, profile, seed, p } => {
            let host_graph = read_edge_list(&host).context("reading host")?;
            let spec: CycleSpec = serde_json::from_str(
                &std::fs::read_to_string(&spec).context("reading spec")?,
            )
            .context("parsing spec")?;
            let profile = profile_by_name(&profile)?;
            validate_spec(&spec, profile.ell)?;
            let n = host_graph.n();
            let density = if n >= 2 {
                host_graph.edge_count() as f64 / (n as f64 * (n as f64 - 1.0) / 2.0)
            } else {
                0.0
            };
            let p = p.unwrap_or(density.max(1e-9));
            let layers = ExposureLayers::split_host(&host_graph, p, &RandomSeed::new(seed, "cli"))
                .map_err(|e| anyhow::anyhow!("layer split: {e}"))?;
            match embed(&layers, &spec, &profile, &RandomSeed::new(seed, "embed")) {
                Ok(report) => {
                    let json = report.embedding.to_json(Some(&layers));
                    println!("{}", serde_json::to_string_pretty(&json)?);
                    eprintln!(
                        "embedded via {} with {} retries",
                        report.phase, report.retries
                    );
                    Ok(())
                }
                Err(e) => anyhow::bail!("embedding failed: {e}"),
            }
        }
        Command::Sweep { config, out } => {
            let config: SweepConfig = serde_json::from_str(
                &std::fs::read_to_string(&config).context("reading config")?,
            )
            .context("parsing config")?;
            let (records, summary) = run_sweep(&config)?;
            write_csv(&records, &out)?;
            let summary_path = out.with_extension("summary.json");
            std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
            let plot_path = out.with_extension("gnuplot");
            std::fs::write(&plot_path, plot_script(&out.display().to_string()))?;
            eprintln!(
                "{} records -> {}; summary -> {}",
                records.len(),
                out.display(),
                summary_path.display()
            );
            Ok(())
        }
        Command::Threshold { n, ell, rate, out, trials, seed, resolution, specs } => {
            let corpus: Vec<Vec<u64>> = if specs.is_empty() {
                vec![vec![3]]
            } else {
                specs
                    .iter()
                    .map(|s| s.parse::<u64>().map_err(|e| anyhow::anyhow!("bad spec length: {e}")))
                    .collect::<anyhow::Result<Vec<u64>>>()
                    .map(|lengths| vec![lengths])?
            };
            let config = SweepConfig {
                ns: vec![n],
                ell,
                ps: vec![],
                trials,
                spec_policy: SpecPolicy::Corpus { specs: corpus },
                mode: RunMode::Pipeline,
                master_seed: seed,
                profile: None,
                oracle_cap: None,
            };
            let estimate = estimate_threshold(n, ell, rate, &config, resolution)?;
            std::fs::write(&out, serde_json::to_string_pretty(&estimate)?)?;
            eprintln!(
                "p* = {:.4} in [{:.4}, {:.4}] ({} mode)",
                estimate.p_star, estimate.bracket.0, estimate.bracket.1, estimate.mode
            );
            Ok(())
        }
        Command::Oracle { n, ell, host, cap } => {
            let host_graph = read_edge_list(&host).context("reading host")?;
            anyhow::ensure!(host_graph.n() == n, "host has {} vertices, expected {n}", host_graph.n());
            let verdict = exhaustive_universality(n, ell, &host_graph, cap)?;
            if verdict.universal {
                println!("universal: checked {} specs", verdict.specs_checked);
            } else {
                let failing = verdict.first_failure.unwrap();
                println!(
                    "not universal: first failing spec {} after {} specs",
                    failing.id(),
                    verdict.specs_checked
                );
            }
            Ok(())
        }
    }
}
