//! Small-scale invariant checks of every module plus a seeded regression
//! hash of a short simulation.

use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use zfharq::harq::{renewal_mean_delay, HarqUserState};
use zfharq::ici::{CdfSet, EmpiricalCdf};
use zfharq::layout::{complex_normal, LayoutParams};
use zfharq::scheduler::{flow_control, queue_update, Mode, SchedulerParams, Utility};
use zfharq::selection::weighted_waterfilling;
use zfharq::sim::{run_experiment, ExperimentConfig};
use zfharq::zfbf::{inner, norm_sqr, zf_steering};

use crate::jobs::write_users_csv;

/// SHA-256 of the per-user CSV of [`regression_config`], frozen at the
/// first release.
pub const GOLDEN_REGRESSION_SHA256: &str = "80474a04fea6dc58c433b31b8361fc5b9b694ec8da218176d091a6a172a99a2a";

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> CheckResult {
    CheckResult { name, outcome: f() }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zero_forcing() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let m = rng.random_range(2..=4usize);
        let n = rng.random_range(1..=m);
        let cols: Vec<Vec<Complex<f64>>> =
            (0..n).map(|_| (0..m).map(|_| complex_normal(&mut rng)).collect()).collect();
        let refs: Vec<&[Complex<f64>]> = cols.iter().map(|c| c.as_slice()).collect();
        let v = zf_steering(&refs).map_err(|e| e.to_string())?;
        for (k, vk) in v.iter().enumerate() {
            ensure((norm_sqr(vk).sqrt() - 1.0).abs() <= 1e-12, || "steering vector not unit norm".into())?;
            for (j, hj) in cols.iter().enumerate() {
                if j != k {
                    let leak = inner(hj, vk).norm() / norm_sqr(hj).sqrt();
                    ensure(leak <= 1e-10, || format!("leakage {leak:e}"))?;
                }
            }
        }
    }
    Ok(())
}

fn waterfilling() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n = rng.random_range(1..=4usize);
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..100.0)).collect();
        let p = weighted_waterfilling(&q, &a, 1.0).map_err(|e| e.to_string())?;
        let total: f64 = p.iter().sum();
        ensure((total - 1.0).abs() <= 1e-10, || format!("budget {total}"))?;
        let level = (0..n).filter(|&i| p[i] > 0.0).map(|i| q[i] * a[i] / (1.0 + a[i] * p[i])).fold(0.0, f64::max);
        for i in 0..n {
            let marginal = q[i] * a[i] / (1.0 + a[i] * p[i]);
            if p[i] > 0.0 {
                ensure((marginal - level).abs() <= 1e-6 * level, || "water level differs".into())?;
            } else {
                ensure(marginal <= level * (1.0 + 1e-9), || "inactive user above water level".into())?;
            }
        }
    }
    Ok(())
}

fn scheduler() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let params = SchedulerParams { v: 50.0, a_max: 50.0, utility: Utility::ProportionalFair, mode: Mode::Harq };
    let mut q = vec![0.0; 4];
    for _ in 0..10_000 {
        let a = flow_control(&q, &params);
        ensure(a.iter().all(|&x| (0.0..=50.0).contains(&x)), || "arrival outside [0, A_max]".into())?;
        let s: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..20.0)).collect();
        queue_update(&mut q, &s, &a).map_err(|e| e.to_string())?;
        ensure(q.iter().all(|&x| x >= 0.0), || "negative queue".into())?;
    }
    Ok(())
}

fn cdf() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let samples: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..5.0)).collect();
    let f = EmpiricalCdf::build(samples).map_err(|e| e.to_string())?;
    let mut prev = 0.0;
    for i in -10..70 {
        let y = f.eval(i as f64 * 0.1);
        ensure((0.0..=1.0).contains(&y) && y >= prev, || "CDF not monotone in [0, 1]".into())?;
        prev = y;
    }
    ensure(f.eval(f.max()) == 1.0, || "CDF below 1 at the largest sample".into())
}

fn harq() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut s = HarqUserState::new(3.0).map_err(|e| e.to_string())?;
    for _ in 0..10_000 {
        let sched = rng.random_bool(0.5);
        let x = if sched { rng.random_range(0.0..2.0) } else { 0.0 };
        s.step(sched, x).map_err(|e| e.to_string())?;
        let w: u64 = s.inter_ack_times().iter().sum();
        ensure(w + s.since_last_ack() == s.elapsed(), || "inter-ACK times do not add up".into())?;
    }
    let d = renewal_mean_delay(&[1.0, 1.0, 0.0]).map_err(|e| e.to_string())?;
    ensure(d.mean == 3.0, || format!("renewal delay {} for I = r/3", d.mean))
}

/// The small seeded run hashed by the regression check.
pub fn regression_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::reference(Utility::ProportionalFair, Mode::Harq);
    c.layout = LayoutParams::new(3, 4, 2, 1e6, 3.0, 0.05).expect("valid layout");
    c.slots_warmup = 400;
    c.slots_measure = 1000;
    c.probe_slots = 1000;
    c.seed = 2024;
    c
}

/// SHA-256 of the per-user CSV of the regression run.
pub fn regression_hash() -> Result<String, String> {
    let metrics = run_experiment(&regression_config()).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_users_csv(&metrics, &mut csv).map_err(|e| e.to_string())?;
    Ok(format!("{:x}", Sha256::digest(&csv)))
}

fn regression() -> Result<(), String> {
    let got = regression_hash()?;
    ensure(got == GOLDEN_REGRESSION_SHA256, || format!("hash {got} differs from golden {GOLDEN_REGRESSION_SHA256}"))
}

/// Runs every check; `cdf_sidecar` adds validation of a saved CDF file.
pub fn run_selftest(cdf_sidecar: Option<&Path>) -> Vec<CheckResult> {
    let mut results = vec![
        check("zero-forcing leakage and unit norm", zero_forcing),
        check("waterfilling budget and water level", waterfilling),
        check("flow control bounds and queue nonnegativity", scheduler),
        check("empirical CDF monotone in [0, 1]", cdf),
        check("HARQ slot accounting and renewal delay", harq),
        check("seeded simulation regression hash", regression),
    ];
    if let Some(path) = cdf_sidecar {
        results.push(check("CDF sidecar", || CdfSet::load(path).map(|_| ()).map_err(|e| e.to_string())));
    }
    results
}
