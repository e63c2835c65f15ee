use num_complex::Complex;
use rayon::prelude::*;

use super::config::{ExperimentConfig, RFirst};
use super::metrics::{
    batch_of, batch_stats, CellSummary, InfoTrace, Metrics, QueueSample, Realization, UserAccum, QUEUE_WINDOWS,
};
use crate::error::{Error, Result};
use crate::harq::{target_r_first, Feedback, HarqUserState};
use crate::ici::{instantaneous_ici, CdfSet, EmpiricalCdf, IciModel, IciModelKind};
use crate::layout::{draw_cell_channels, draw_own_channels, user_position, CellChannels, LayoutParams, PathGainMap};
use crate::rng::{derive_seed, substream, Purpose};
use crate::scheduler::{
    arqllc_service, flow_control, queue_update, schedule_slot, utility_value, Mode, RateAllocation, SchedulerParams,
    SchedulerState,
};
use crate::zfbf::{effective_gain, mutual_information, BeamAllocation};

const LABEL_WARMUP: u64 = 0x100;
const LABEL_PROBE: u64 = 0x200;
const LABEL_MEASURE: u64 = 0x300;

/// Queue-trace points kept per run.
const QUEUE_TRACE_POINTS: u64 = 1000;

/// What a measurement run should keep besides the metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Cells whose per-slot mutual information is recorded.
    pub trace_cells: Vec<usize>,
    /// Backlogs to start from, indexed `[cell][user]`; zero when `None`.
    pub initial_queues: Option<Vec<Vec<f64>>>,
}

/// Outcome of the warm-up phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Warmup {
    pub cdfs: CdfSet,
    /// Virtual queues at the end of the last pass, `[cell][user]`.
    pub queues: Vec<Vec<f64>>,
}

/// Inner bound, simulated, and outer bound GenieRef runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundMetrics {
    pub inner: Metrics,
    pub actual: Metrics,
    pub outer: Metrics,
}

/// One slot-loop phase.
struct Phase<'a> {
    layout: &'a LayoutParams<f64>,
    gains: &'a PathGainMap<f64>,
    params: SchedulerParams<f64>,
    /// Simulated cells and the ICI model each one schedules against.
    cells: Vec<(usize, IciModel<f64>)>,
    /// `Some` draws the users' ICI from a model instead of the other
    /// cells' beams; holds one model per simulated cell.
    realized_by: Option<Vec<IciModel<f64>>>,
    seed: u64,
    slots: u64,
    parallel: bool,
    record_ici: bool,
    trace_cells: Vec<usize>,
    harq: Option<Vec<f64>>,
    initial_queues: Option<Vec<Vec<f64>>>,
}

/// Mutable per-cell state of a phase.
struct CellRun<'a> {
    cell: usize,
    model: IciModel<f64>,
    realize: Option<IciModel<f64>>,
    own_gains: Vec<f64>,
    queues: SchedulerState<f64>,
    accum: Vec<UserAccum>,
    harq: Vec<HarqUserState<f64>>,
    trace: Option<Vec<Vec<f64>>>,
    ici: Option<Vec<Vec<f64>>>,
    queue_windows: [f64; QUEUE_WINDOWS],
    queue_points: Vec<f64>,
    channels: Option<CellChannels<f64>>,
    beams: BeamAllocation<f64>,
    rates: RateAllocation<f64>,
    phase: &'a Phase<'a>,
}

struct PhaseOutput {
    cells: Vec<CellOutput>,
    queue_slots: Vec<u64>,
}

struct CellOutput {
    cell: usize,
    queues: Vec<f64>,
    accum: Vec<UserAccum>,
    harq: Vec<HarqUserState<f64>>,
    trace: Option<Vec<Vec<f64>>>,
    ici: Option<Vec<Vec<f64>>>,
    queue_windows: Vec<f64>,
    queue_points: Vec<f64>,
}

fn map_cells<'a, R: Send>(
    parallel: bool,
    runs: &mut [CellRun<'a>],
    f: impl Fn(&mut CellRun<'a>) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    if parallel {
        runs.par_iter_mut().map(f).collect()
    } else {
        runs.iter_mut().map(f).collect()
    }
}

impl<'a> CellRun<'a> {
    fn schedule(&mut self, slot: u64) -> Result<BeamAllocation<f64>> {
        let p = self.phase;
        let ch = if self.ici.is_some() {
            draw_cell_channels(p.layout, slot, self.cell, p.seed)
        } else {
            draw_own_channels(p.layout, slot, self.cell, p.seed)
        };
        let own: Vec<&[Complex<f64>]> = (0..p.layout.users_per_cell).map(|k| ch.vector(k, self.cell)).collect();
        let (beams, rates) = schedule_slot(
            &own,
            &self.queues.queues,
            &self.model,
            &self.own_gains,
            p.layout.max_active(),
            &p.params,
        )?;
        debug_assert!(
            self.queues.queues.iter().all(|&q| q <= 0.0) || (beams.total_power() - 1.0).abs() < 1e-9,
            "backlogged cell {} left power unused",
            self.cell
        );
        self.channels = Some(ch);
        self.rates = rates;
        self.beams = beams.clone();
        Ok(beams)
    }

    fn realize(&mut self, slot: u64, allocations: &[BeamAllocation<f64>]) -> Result<()> {
        let p = self.phase;
        let k_users = p.layout.users_per_cell;
        let mut ch = self.channels.take().expect("schedule runs before realize");
        if let Some(ici) = self.ici.as_mut() {
            for (k, rec) in ici.iter_mut().enumerate() {
                rec.push(instantaneous_ici(k, self.cell, &ch, allocations, p.gains));
            }
        }
        let arrivals = flow_control(&self.queues.queues, &p.params);
        let mut service = vec![0.0; k_users];
        let mut info = vec![0.0; k_users];
        let mut model_rng = self
            .realize
            .as_ref()
            .map(|_| substream(p.seed, slot, self.cell, Purpose::Interference));
        let batch = batch_of(slot, p.slots);
        for (i, &k) in self.beams.active.iter().enumerate() {
            let chi = match (&self.realize, model_rng.as_mut()) {
                (Some(model), Some(rng)) => model.sample(k, rng),
                _ => match &self.ici {
                    Some(rec) => *rec[k].last().unwrap(),
                    None => {
                        ch.draw_cross(k);
                        instantaneous_ici(k, self.cell, &ch, allocations, p.gains)
                    }
                },
            };
            let s = effective_gain(self.own_gains[k], ch.vector(k, self.cell), &self.beams.steering[i], self.beams.powers[i]);
            let mi = mutual_information(s, chi);
            info[k] = mi;
            let acc = &mut self.accum[k];
            acc.scheduled += 1;
            acc.info += mi;
            acc.info_batches[batch] += mi;
            match p.params.mode {
                Mode::ArqLlc => {
                    let served = arqllc_service(self.rates.rates[i], mi);
                    if served == 0.0 {
                        acc.outages += 1;
                    }
                    acc.served += served;
                    acc.served_batches[batch] += served;
                    service[k] = served;
                }
                Mode::Harq | Mode::GenieRef => {
                    acc.served += mi;
                    acc.served_batches[batch] += mi;
                    service[k] = mi;
                }
            }
        }
        if !self.harq.is_empty() {
            for (k, state) in self.harq.iter_mut().enumerate() {
                if state.step(self.beams.position(k).is_some(), info[k])? == Feedback::Ack {
                    self.accum[k].acked_batches[batch] += state.r_first();
                }
            }
        }
        if let Some(trace) = self.trace.as_mut() {
            for (rec, &x) in trace.iter_mut().zip(&info) {
                rec.push(x);
            }
        }
        queue_update(&mut self.queues.queues, &service, &arrivals)?;
        let total = self.queues.total();
        let window = ((slot as u128 * QUEUE_WINDOWS as u128 / p.slots as u128) as usize).min(QUEUE_WINDOWS - 1);
        self.queue_windows[window] += total;
        if slot.is_multiple_of(queue_stride(p.slots)) {
            self.queue_points.push(total);
        }
        Ok(())
    }
}

fn queue_stride(slots: u64) -> u64 {
    slots.div_ceil(QUEUE_TRACE_POINTS).max(1)
}

impl Phase<'_> {
    fn run(&self) -> Result<PhaseOutput> {
        let k_users = self.layout.users_per_cell;
        let mut runs: Vec<CellRun> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, (cell, model))| {
                let mut queues = SchedulerState::new(k_users);
                if let Some(init) = &self.initial_queues {
                    queues.queues.clone_from(&init[i]);
                }
                let harq = match &self.harq {
                    Some(rates) => rates.iter().map(|&r| HarqUserState::new(r)).collect::<Result<Vec<_>>>()?,
                    None => Vec::new(),
                };
                let with_capacity = || (0..k_users).map(|_| Vec::with_capacity(self.slots as usize)).collect::<Vec<_>>();
                Ok(CellRun {
                    cell: *cell,
                    model: model.clone(),
                    realize: self.realized_by.as_ref().map(|m| m[i].clone()),
                    own_gains: self.gains.own_gains(*cell),
                    queues,
                    accum: vec![UserAccum::default(); k_users],
                    harq,
                    trace: self.trace_cells.contains(cell).then(with_capacity),
                    ici: self.record_ici.then(with_capacity),
                    queue_windows: [0.0; QUEUE_WINDOWS],
                    queue_points: Vec::new(),
                    channels: None,
                    beams: BeamAllocation::silent(),
                    rates: RateAllocation::default(),
                    phase: self,
                })
            })
            .collect::<Result<_>>()?;

        let simulated = self.realized_by.is_none();
        let mut allocations = vec![BeamAllocation::silent(); self.layout.cells];
        for slot in 0..self.slots {
            let beams = map_cells(self.parallel, &mut runs, |r| r.schedule(slot))?;
            if simulated {
                for (run, b) in runs.iter().zip(beams) {
                    allocations[run.cell] = b;
                }
            }
            let allocations = &allocations;
            map_cells(self.parallel, &mut runs, |r| r.realize(slot, allocations))?;
        }

        let stride = queue_stride(self.slots);
        Ok(PhaseOutput {
            queue_slots: (0..self.slots).step_by(stride as usize).collect(),
            cells: runs
                .into_iter()
                .map(|r| {
                    let sizes = window_sizes(self.slots);
                    CellOutput {
                        cell: r.cell,
                        queues: r.queues.queues,
                        accum: r.accum,
                        harq: r.harq,
                        trace: r.trace,
                        ici: r.ici,
                        queue_windows: r
                            .queue_windows
                            .iter()
                            .zip(sizes)
                            .map(|(s, n)| if n > 0 { s / n as f64 } else { 0.0 })
                            .collect(),
                        queue_points: r.queue_points,
                    }
                })
                .collect(),
        })
    }
}

fn window_sizes(slots: u64) -> Vec<u64> {
    let mut sizes = vec![0u64; QUEUE_WINDOWS];
    for (w, size) in sizes.iter_mut().enumerate() {
        let lo = (w as u128 * slots as u128).div_ceil(QUEUE_WINDOWS as u128);
        let hi = ((w as u128 + 1) * slots as u128).div_ceil(QUEUE_WINDOWS as u128);
        *size = (hi - lo) as u64;
    }
    sizes
}

fn empirical_models(cdfs: &CdfSet, cells: &[usize]) -> Vec<(usize, IciModel<f64>)> {
    cells.iter().map(|&c| (c, IciModel::Empirical(cdfs.cdfs[c].clone()))).collect()
}

fn check_cdfs(config: &ExperimentConfig, cdfs: &CdfSet) -> Result<()> {
    if cdfs.cells() != config.layout.cells || cdfs.users() != config.layout.users_per_cell {
        return Err(Error::InvalidArgument(format!(
            "CDF set is {}x{}, layout needs {}x{}",
            cdfs.cells(),
            cdfs.users(),
            config.layout.cells,
            config.layout.users_per_cell
        )));
    }
    Ok(())
}

/// Warm-up: every cell runs the configured scheduler, first against the
/// deterministic-mean ICI model and then, for each further iteration,
/// against the CDFs of the previous pass. Returns the CDFs of the realized
/// ICI of the last pass, `slots_warmup` samples per user.
pub fn run_warmup(config: &ExperimentConfig) -> Result<CdfSet> {
    Ok(run_warmup_state(config)?.cdfs)
}

/// [`run_warmup`] that also returns the final virtual queues.
pub fn run_warmup_state(config: &ExperimentConfig) -> Result<Warmup> {
    config.validate()?;
    let gains = PathGainMap::from_layout(&config.layout)?;
    let all: Vec<usize> = (0..config.layout.cells).collect();
    let mut models: Vec<(usize, IciModel<f64>)> =
        all.iter().map(|&c| (c, IciModel::deterministic_mean(&gains, c))).collect();
    let mut result = None;
    for iteration in 0..config.ici_iterations {
        log::info!("warm-up pass {} of {}: {} slots", iteration + 1, config.ici_iterations, config.slots_warmup);
        let phase = Phase {
            layout: &config.layout,
            gains: &gains,
            params: config.scheduler,
            cells: models,
            realized_by: None,
            seed: derive_seed(config.seed, LABEL_WARMUP + iteration as u64),
            slots: config.slots_warmup,
            parallel: config.parallel,
            record_ici: true,
            trace_cells: Vec::new(),
            harq: None,
            initial_queues: None,
        };
        let out = phase.run()?;
        let queues = out.cells.iter().map(|c| c.queues.clone()).collect();
        let set = CdfSet {
            cdfs: out
                .cells
                .into_iter()
                .map(|c| c.ici.unwrap().into_iter().map(EmpiricalCdf::build).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
        };
        models = empirical_models(&set, &all);
        result = Some(Warmup { cdfs: set, queues });
    }
    Ok(result.expect("at least one warm-up iteration"))
}

/// HARQ first-block rates per user index: the configured ones, or those
/// found on a GenieRef probe of cell 0.
pub fn resolve_r_first(config: &ExperimentConfig, cdfs: &CdfSet) -> Result<Vec<f64>> {
    match &config.r_first {
        RFirst::Fixed(rates) => Ok(rates.clone()),
        RFirst::Auto { target_fraction } => {
            check_cdfs(config, cdfs)?;
            let gains = PathGainMap::from_layout(&config.layout)?;
            let all: Vec<usize> = (0..config.layout.cells).collect();
            let mut params = config.scheduler;
            params.mode = Mode::GenieRef;
            log::info!("first-block rate probe: {} slots", config.probe_slots);
            let phase = Phase {
                layout: &config.layout,
                gains: &gains,
                params,
                cells: empirical_models(cdfs, &all),
                realized_by: None,
                seed: derive_seed(config.seed, LABEL_PROBE),
                slots: config.probe_slots,
                parallel: config.parallel,
                record_ici: false,
                trace_cells: vec![0],
                harq: None,
                initial_queues: None,
            };
            let out = phase.run()?;
            let trace = out.cells.into_iter().find(|c| c.cell == 0).and_then(|c| c.trace).unwrap();
            trace
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    Ok(match target_r_first(t, *target_fraction)? {
                        Some(r) => r,
                        None => {
                            let fallback = t.iter().sum::<f64>().max(1.0);
                            log::warn!("probe too short to target user {}; using r_first = {fallback}", k + 1);
                            fallback
                        }
                    })
                })
                .collect()
        }
    }
}

/// Warm-up followed by measurement.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Metrics> {
    let warmup = run_warmup_state(config)?;
    let options = RunOptions {
        initial_queues: (!config.reset_queues).then_some(warmup.queues),
        ..RunOptions::default()
    };
    run_measurement(config, &warmup.cdfs, &options)
}

/// Measurement with all cells scheduling against `cdfs`.
pub fn run_measurement(config: &ExperimentConfig, cdfs: &CdfSet, options: &RunOptions) -> Result<Metrics> {
    config.validate()?;
    check_cdfs(config, cdfs)?;
    let gains = PathGainMap::from_layout(&config.layout)?;
    let all: Vec<usize> = (0..config.layout.cells).collect();
    let harq = match config.scheduler.mode {
        Mode::Harq => Some(resolve_r_first(config, cdfs)?),
        _ => None,
    };
    log::info!("measurement ({:?}): {} slots", config.scheduler.mode, config.slots_measure);
    let phase = Phase {
        layout: &config.layout,
        gains: &gains,
        params: config.scheduler,
        cells: empirical_models(cdfs, &all),
        realized_by: None,
        seed: derive_seed(config.seed, LABEL_MEASURE),
        slots: config.slots_measure,
        parallel: config.parallel,
        record_ici: false,
        trace_cells: options.trace_cells.clone(),
        harq,
        initial_queues: options.initial_queues.clone(),
    };
    let out = phase.run()?;
    collect(config, &phase, IciModelKind::Empirical, Realization::Simulated, out)
}

/// GenieRef run of the listed cells with the ICI both modelled and
/// realized by `kind` (deterministic mean or rank-one). The other cells
/// are not simulated. Channels match those of `run_measurement`.
pub fn run_model_bound(
    config: &ExperimentConfig,
    kind: IciModelKind,
    cells: &[usize],
    options: &RunOptions,
) -> Result<Metrics> {
    config.validate()?;
    let gains = PathGainMap::from_layout(&config.layout)?;
    if let Some(&c) = cells.iter().find(|&&c| c >= config.layout.cells) {
        return Err(Error::InvalidArgument(format!("cell {c} does not exist")));
    }
    let model = |c: usize| match kind {
        IciModelKind::DeterministicMean => Ok(IciModel::deterministic_mean(&gains, c)),
        IciModelKind::Rank1Extremal => Ok(IciModel::rank1(&gains, c)),
        IciModelKind::Empirical => Err(Error::InvalidArgument(
            "bound runs use the deterministic-mean or rank-one model".into(),
        )),
    };
    let models: Vec<(usize, IciModel<f64>)> = cells.iter().map(|&c| Ok((c, model(c)?))).collect::<Result<_>>()?;
    let mut params = config.scheduler;
    params.mode = Mode::GenieRef;
    log::info!("{kind:?} bound run: {} slots", config.slots_measure);
    let phase = Phase {
        layout: &config.layout,
        gains: &gains,
        params,
        realized_by: Some(models.iter().map(|(_, m)| m.clone()).collect()),
        cells: models,
        seed: derive_seed(config.seed, LABEL_MEASURE),
        slots: config.slots_measure,
        parallel: config.parallel,
        record_ici: false,
        trace_cells: options.trace_cells.clone(),
        harq: None,
        initial_queues: None,
    };
    let out = phase.run()?;
    collect(config, &phase, kind, Realization::Model(kind), out)
}

/// Inner-bound, simulated and outer-bound GenieRef runs on the same
/// channels. The bound runs simulate cell 0 only.
pub fn run_bound_experiments(config: &ExperimentConfig, cdfs: &CdfSet) -> Result<BoundMetrics> {
    let mut genie = config.clone();
    genie.scheduler.mode = Mode::GenieRef;
    Ok(BoundMetrics {
        inner: run_model_bound(&genie, IciModelKind::DeterministicMean, &[0], &RunOptions::default())?,
        actual: run_measurement(&genie, cdfs, &RunOptions::default())?,
        outer: run_model_bound(&genie, IciModelKind::Rank1Extremal, &[0], &RunOptions::default())?,
    })
}

fn collect(
    config: &ExperimentConfig,
    phase: &Phase,
    scheduling_model: IciModelKind,
    realization: Realization,
    out: PhaseOutput,
) -> Result<Metrics> {
    let k_users = config.layout.users_per_cell;
    let slots = phase.slots;
    let mut users = Vec::new();
    let mut cells = Vec::new();
    let mut traces = Vec::new();
    for c in &out.cells {
        let mut throughputs = Vec::with_capacity(k_users);
        for (k, acc) in c.accum.iter().enumerate() {
            let (genie, genie_se) = batch_stats(acc.info, &acc.info_batches, slots);
            let (served, served_se) = batch_stats(acc.served, &acc.served_batches, slots);
            let harq = c.harq.get(k);
            let (throughput, stderr) = match harq {
                Some(h) => {
                    let acked = h.r_first() * h.acks() as f64;
                    (h.throughput(), batch_stats(acked, &acc.acked_batches, slots).1)
                }
                None => (served, served_se),
            };
            throughputs.push(throughput);
            users.push(super::metrics::UserMetrics {
                cell: c.cell,
                user: k,
                position: user_position(k + 1, c.cell, k_users)?,
                throughput,
                stderr,
                genie_throughput: genie,
                genie_stderr: genie_se,
                scheduled_fraction: acc.scheduled as f64 / slots as f64,
                outage_fraction: (phase.params.mode == Mode::ArqLlc)
                    .then(|| if acc.scheduled > 0 { acc.outages as f64 / acc.scheduled as f64 } else { 0.0 }),
                r_first: harq.map(|h| h.r_first()),
                acks: harq.map(|h| h.acks()),
                mean_delay: harq.and_then(|h| h.mean_delay()),
            });
        }
        cells.push(CellSummary {
            cell: c.cell,
            utility: utility_value(config.scheduler.utility, &throughputs),
            queue_windows: c.queue_windows.clone(),
        });
        if let Some(t) = &c.trace {
            traces.push(InfoTrace {
                cell: c.cell,
                users: t.clone(),
            });
        }
    }
    let queue_trace = out
        .queue_slots
        .iter()
        .enumerate()
        .map(|(i, &slot)| QueueSample {
            slot,
            totals: out.cells.iter().map(|c| c.queue_points[i]).collect(),
        })
        .collect();
    Ok(Metrics {
        mode: phase.params.mode,
        scheduling_model,
        realization,
        slots,
        users,
        cells,
        queue_trace,
        traces,
    })
}
