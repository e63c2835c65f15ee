use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zfharq::sim::ExperimentConfig;
use zfharq_cli::jobs::DEFAULT_MULTIPLIERS;
use zfharq_cli::selftest::run_selftest;
use zfharq_cli::{parse_config, parse_config_str, replay, run_and_record, CliError, CliResult, Job, ProfileMode};

#[derive(Parser)]
#[command(name = "zfharq", version, about = "Multi-cell MU-MIMO scheduling simulator: ARQ-LLC versus HARQ")]
struct Cli {
    /// JSON configuration; missing keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Scheduling mode for `run`: arq_llc, harq or genie_ref.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Measurement slots, overrides the config.
    #[arg(long, global = true)]
    slots: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Warm-up and measurement in one mode; writes users.csv and metrics.json.
    Run {
        /// Skip the warm-up and use a saved CDF sidecar.
        #[arg(long)]
        cdfs: Option<PathBuf>,
    },
    /// Warm-up only; writes the ICI CDF sidecar.
    Warmup,
    /// Per-user throughput of cell 0 in several modes.
    ThroughputProfile {
        /// Comma-separated subset of inner_bound, genie, harq, arqllc, outer_bound.
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<String>>,
    },
    /// HARQ mean decoding delay and throughput versus first-block rate.
    RateDelay {
        /// One-based user indices of cell 0.
        #[arg(long, value_delimiter = ',', default_value = "1,18")]
        users: Vec<usize>,
        /// First-block rates as multiples of the mean per-transmission mutual information.
        #[arg(long, value_delimiter = ',')]
        r_multipliers: Option<Vec<f64>>,
    },
    /// Invariant checks of all modules and a seeded regression hash.
    Selftest {
        /// Also validate this CDF sidecar.
        #[arg(long)]
        cdf: Option<PathBuf>,
    },
    /// Re-run a manifest and compare output hashes.
    Replay {
        manifest: PathBuf,
    },
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => parse_config_str("")?,
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(slots) = cli.slots {
        config.slots_measure = slots;
    }
    if let Some(mode) = &cli.mode {
        config.scheduler.mode = serde_json::from_value(serde_json::Value::String(mode.clone()))
            .map_err(|_| CliError::Validation(format!("unknown mode \"{mode}\"; use arq_llc, harq or genie_ref")))?;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> CliResult<()> {
    let job = match &cli.command {
        Command::Selftest { cdf } => {
            let results = run_selftest(cdf.as_deref());
            let mut failed = false;
            for r in &results {
                match &r.outcome {
                    Ok(()) => println!("[PASS] {}", r.name),
                    Err(e) => {
                        failed = true;
                        println!("[FAIL] {}: {e}", r.name);
                    }
                }
            }
            return if failed {
                Err(CliError::Validation("self-test failed".into()))
            } else {
                Ok(())
            };
        }
        Command::Replay { manifest } => {
            let report = replay(manifest, &cli.out)?;
            for f in &report.manifest.outputs {
                let status = if report.mismatched.contains(&f.file) { "DIFFERS" } else { "identical" };
                println!("{} {status}", f.file);
            }
            return if report.mismatched.is_empty() {
                Ok(())
            } else {
                Err(CliError::Runtime(format!("{} output(s) differ from the manifest", report.mismatched.len())))
            };
        }
        Command::Run { cdfs } => Job::Run { cdfs: cdfs.clone() },
        Command::Warmup => Job::Warmup,
        Command::ThroughputProfile { modes } => Job::ThroughputProfile {
            modes: match modes {
                Some(list) => list.iter().map(|m| ProfileMode::parse(m)).collect::<CliResult<_>>()?,
                None => ProfileMode::ALL.to_vec(),
            },
        },
        Command::RateDelay { users, r_multipliers } => Job::RateDelay {
            users: users.clone(),
            r_multipliers: r_multipliers.clone().unwrap_or_else(|| DEFAULT_MULTIPLIERS.to_vec()),
        },
    };
    let config = load_config(&cli)?;
    let manifest = run_and_record(job, config, &cli.out)?;
    for f in &manifest.outputs {
        println!("{}", cli.out.join(&f.file).display());
    }
    println!("{}", cli.out.join(zfharq_cli::manifest::MANIFEST_JSON).display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
