//! Experiments the CLI can run, and the files each one writes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zfharq::harq::{genie_throughput, replay_trace, target_r_first, trace_renewal_delay};
use zfharq::ici::{CdfSet, IciModelKind};
use zfharq::layout::user_position;
use zfharq::scheduler::Mode;
use zfharq::sim::{
    run_measurement, run_model_bound, run_warmup_state, ExperimentConfig, Metrics, RFirst, RunOptions, Warmup,
};

use crate::error::{CliError, CliResult};

pub const PROFILE_CSV: &str = "throughput_profile.csv";
pub const RATE_DELAY_CSV: &str = "rate_delay.csv";
pub const USERS_CSV: &str = "users.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const CDF_SIDECAR: &str = "ici_cdfs.bin";

/// Rate multipliers of the default rate-delay sweep, applied to each
/// user's mean mutual information per scheduled slot.
pub const DEFAULT_MULTIPLIERS: [f64; 9] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

/// A command with all of its resolved arguments; stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    /// Warm-up plus measurement in the configured mode. With `cdfs`, the
    /// warm-up is replaced by a saved CDF sidecar.
    Run {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cdfs: Option<PathBuf>,
    },
    /// Warm-up only; writes the CDF sidecar.
    Warmup,
    ThroughputProfile { modes: Vec<ProfileMode> },
    RateDelay { users: Vec<usize>, r_multipliers: Vec<f64> },
}

/// Columns of the throughput profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    InnerBound,
    Genie,
    Harq,
    Arqllc,
    OuterBound,
}

impl ProfileMode {
    pub const ALL: [ProfileMode; 5] = [
        ProfileMode::InnerBound,
        ProfileMode::Genie,
        ProfileMode::Harq,
        ProfileMode::Arqllc,
        ProfileMode::OuterBound,
    ];

    pub fn parse(s: &str) -> CliResult<Self> {
        let name = s.split('@').next().unwrap_or(s);
        Ok(match name {
            "inner_bound" => ProfileMode::InnerBound,
            "genie" => ProfileMode::Genie,
            "harq" => ProfileMode::Harq,
            "arqllc" => ProfileMode::Arqllc,
            "outer_bound" => ProfileMode::OuterBound,
            _ => return Err(CliError::Validation(format!("unknown profile mode \"{s}\""))),
        })
    }

    /// Label used in the CSV `mode` column.
    pub fn label(self, config: &ExperimentConfig) -> String {
        match self {
            ProfileMode::InnerBound => "inner_bound".into(),
            ProfileMode::Genie => "genie".into(),
            ProfileMode::Harq => match &config.r_first {
                RFirst::Auto { target_fraction } => format!("harq@{target_fraction}"),
                RFirst::Fixed(_) => "harq@fixed".into(),
            },
            ProfileMode::Arqllc => "arqllc".into(),
            ProfileMode::OuterBound => "outer_bound".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    /// One-based user index in cell 0.
    pub user_index: usize,
    pub position: f64,
    pub mode: String,
    pub throughput: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateDelayRow {
    pub user_index: usize,
    pub r_first: f64,
    pub delay_sim: Option<f64>,
    pub delay_renewal: Option<f64>,
    pub throughput: f64,
    pub genie_fraction: f64,
    pub acks: u64,
}

/// Formats a float for CSV output: shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn with_mode(config: &ExperimentConfig, mode: Mode) -> ExperimentConfig {
    let mut c = config.clone();
    c.scheduler.mode = mode;
    c
}

fn measure(config: &ExperimentConfig, warmup: &Warmup, trace_cells: Vec<usize>) -> CliResult<Metrics> {
    let options = RunOptions {
        trace_cells,
        initial_queues: (!config.reset_queues).then(|| warmup.queues.clone()),
    };
    Ok(run_measurement(config, &warmup.cdfs, &options)?)
}

/// Per-user throughput of cell 0 in each requested mode.
pub fn throughput_profile(config: &ExperimentConfig, modes: &[ProfileMode]) -> CliResult<Vec<ProfileRow>> {
    let k_users = config.layout.users_per_cell;
    let mut columns: Vec<(ProfileMode, Vec<(f64, f64)>)> = Vec::new();
    let wants = |m: ProfileMode| modes.contains(&m);

    // HARQ never changes the schedule, so one Harq run gives both the
    // HARQ and the genie column.
    let feedback_run = if wants(ProfileMode::Harq) || wants(ProfileMode::Genie) {
        let mode = if wants(ProfileMode::Harq) { Mode::Harq } else { Mode::GenieRef };
        let c = with_mode(config, mode);
        let warmup = run_warmup_state(&c)?;
        Some(measure(&c, &warmup, Vec::new())?)
    } else {
        None
    };
    let arq_run = if wants(ProfileMode::Arqllc) {
        let c = with_mode(config, Mode::ArqLlc);
        let warmup = run_warmup_state(&c)?;
        Some(measure(&c, &warmup, Vec::new())?)
    } else {
        None
    };
    let column = |m: &Metrics, genie: bool| -> Vec<(f64, f64)> {
        m.cell_users(0)
            .map(|u| if genie { (u.genie_throughput, u.genie_stderr) } else { (u.throughput, u.stderr) })
            .collect()
    };
    for &mode in modes {
        let values = match mode {
            ProfileMode::InnerBound | ProfileMode::OuterBound => {
                let kind = if mode == ProfileMode::InnerBound {
                    IciModelKind::DeterministicMean
                } else {
                    IciModelKind::Rank1Extremal
                };
                column(&run_model_bound(config, kind, &[0], &RunOptions::default())?, false)
            }
            ProfileMode::Genie => column(feedback_run.as_ref().unwrap(), true),
            ProfileMode::Harq => column(feedback_run.as_ref().unwrap(), false),
            ProfileMode::Arqllc => column(arq_run.as_ref().unwrap(), false),
        };
        columns.push((mode, values));
    }
    let mut rows = Vec::with_capacity(k_users * modes.len());
    for k in 0..k_users {
        let position = user_position(k + 1, 0, k_users)?;
        for (mode, values) in &columns {
            rows.push(ProfileRow {
                user_index: k + 1,
                position,
                mode: mode.label(config),
                throughput: values[k].0,
                stderr: values[k].1,
            });
        }
    }
    Ok(rows)
}

/// HARQ delay and throughput of one user's trace at one first-block rate.
pub fn rate_delay_point(user_index: usize, trace: &[f64], r_first: f64) -> CliResult<RateDelayRow> {
    let genie = genie_throughput(trace)?;
    let run = replay_trace(trace, r_first)?;
    let renewal = trace_renewal_delay(trace, r_first)?;
    Ok(RateDelayRow {
        user_index,
        r_first,
        delay_sim: run.mean_delay,
        delay_renewal: Some(renewal.mean),
        throughput: run.throughput,
        genie_fraction: if genie > 0.0 { run.throughput / genie } else { 0.0 },
        acks: run.acks,
    })
}

/// Mean mutual information over the slots in which the user was scheduled.
pub fn mean_per_transmission(trace: &[f64]) -> f64 {
    let n = trace.iter().filter(|&&x| x > 0.0).count();
    if n == 0 {
        0.0
    } else {
        trace.iter().sum::<f64>() / n as f64
    }
}

/// Smallest first-block rate reaching `fraction` of genie on the trace,
/// with its delay figures.
pub fn delay_at_fraction(user_index: usize, trace: &[f64], fraction: f64) -> CliResult<Option<RateDelayRow>> {
    match target_r_first(trace, fraction)? {
        Some(r) => Ok(Some(rate_delay_point(user_index, trace, r)?)),
        None => Ok(None),
    }
}

/// Cell-0 mutual-information traces of a GenieRef measurement. HARQ
/// reuses the schedule of this run, so sweeping `r_first` only replays
/// the traces.
pub fn feedback_traces(config: &ExperimentConfig) -> CliResult<Metrics> {
    let c = with_mode(config, Mode::GenieRef);
    let warmup = run_warmup_state(&c)?;
    measure(&c, &warmup, vec![0])
}

/// HARQ rate-delay sweep for the listed one-based user indices of cell 0.
pub fn rate_delay(config: &ExperimentConfig, users: &[usize], multipliers: &[f64]) -> CliResult<Vec<RateDelayRow>> {
    let k_users = config.layout.users_per_cell;
    if let Some(&u) = users.iter().find(|&&u| u < 1 || u > k_users) {
        return Err(CliError::Validation(format!("user index {u} outside 1..={k_users}")));
    }
    if multipliers.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(CliError::Validation("r multipliers must be positive".into()));
    }
    let metrics = feedback_traces(config)?;
    let traces = metrics.trace(0).expect("cell 0 is traced");
    let mut rows = Vec::new();
    for &u in users {
        let trace = &traces.users[u - 1];
        let base = mean_per_transmission(trace);
        if base == 0.0 {
            log::warn!("user {u} was never scheduled; no rate-delay rows");
            continue;
        }
        for &m in multipliers {
            rows.push(rate_delay_point(u, trace, m * base)?);
        }
    }
    Ok(rows)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", path.display()))
    })?))
}

pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], w: W) -> CliResult<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["user_index", "position", "mode", "throughput_bpcu", "stderr"])?;
    for r in rows {
        out.write_record([
            r.user_index.to_string(),
            fmt_f64(r.position),
            r.mode.clone(),
            fmt_f64(r.throughput),
            fmt_f64(r.stderr),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_rate_delay_csv<W: Write>(rows: &[RateDelayRow], w: W) -> CliResult<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record([
        "user_index",
        "r_first",
        "mean_delay_slots_sim",
        "mean_delay_slots_renewal",
        "throughput_bpcu",
        "genie_fraction",
        "acks",
    ])?;
    for r in rows {
        out.write_record([
            r.user_index.to_string(),
            fmt_f64(r.r_first),
            fmt_opt(r.delay_sim),
            fmt_opt(r.delay_renewal),
            fmt_f64(r.throughput),
            fmt_f64(r.genie_fraction),
            r.acks.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_users_csv<W: Write>(metrics: &Metrics, w: W) -> CliResult<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record([
        "cell",
        "user_index",
        "position",
        "throughput_bpcu",
        "stderr",
        "genie_bpcu",
        "genie_stderr",
        "scheduled_fraction",
        "outage_fraction",
        "r_first",
        "acks",
        "mean_delay_slots",
    ])?;
    for u in &metrics.users {
        out.write_record([
            u.cell.to_string(),
            (u.user + 1).to_string(),
            fmt_f64(u.position),
            fmt_f64(u.throughput),
            fmt_f64(u.stderr),
            fmt_f64(u.genie_throughput),
            fmt_f64(u.genie_stderr),
            fmt_f64(u.scheduled_fraction),
            fmt_opt(u.outage_fraction),
            fmt_opt(u.r_first),
            u.acks.map(|a| a.to_string()).unwrap_or_default(),
            fmt_opt(u.mean_delay),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Runs `job` and writes its outputs into `out`. Returns the written
/// file names, relative to `out`.
pub fn execute(job: &Job, config: &ExperimentConfig, out: &Path) -> CliResult<Vec<String>> {
    std::fs::create_dir_all(out)?;
    match job {
        Job::Run { cdfs } => {
            let metrics = match cdfs {
                Some(path) => run_measurement(config, &load_cdfs(path, config)?, &RunOptions::default())?,
                None => measure(config, &run_warmup_state(config)?, Vec::new())?,
            };
            write_users_csv(&metrics, create(&out.join(USERS_CSV))?)?;
            let mut w = create(&out.join(METRICS_JSON))?;
            serde_json::to_writer_pretty(&mut w, &metrics).map_err(|e| CliError::Runtime(e.to_string()))?;
            w.write_all(b"\n")?;
            w.flush()?;
            Ok(vec![USERS_CSV.into(), METRICS_JSON.into()])
        }
        Job::Warmup => {
            let warmup = run_warmup_state(config)?;
            warmup.cdfs.save(&out.join(CDF_SIDECAR))?;
            Ok(vec![CDF_SIDECAR.into()])
        }
        Job::ThroughputProfile { modes } => {
            let rows = throughput_profile(config, modes)?;
            write_profile_csv(&rows, create(&out.join(PROFILE_CSV))?)?;
            Ok(vec![PROFILE_CSV.into()])
        }
        Job::RateDelay { users, r_multipliers } => {
            let rows = rate_delay(config, users, r_multipliers)?;
            write_rate_delay_csv(&rows, create(&out.join(RATE_DELAY_CSV))?)?;
            Ok(vec![RATE_DELAY_CSV.into()])
        }
    }
}

/// Loads a CDF sidecar and checks it against a layout.
pub fn load_cdfs(path: &Path, config: &ExperimentConfig) -> CliResult<CdfSet> {
    let set = CdfSet::load(path)?;
    if set.cells() != config.layout.cells || set.users() != config.layout.users_per_cell {
        return Err(CliError::Validation(format!(
            "sidecar {} holds {}x{} CDFs, config needs {}x{}",
            path.display(),
            set.cells(),
            set.users(),
            config.layout.cells,
            config.layout.users_per_cell
        )));
    }
    Ok(set)
}
