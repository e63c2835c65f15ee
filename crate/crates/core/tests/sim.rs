use zfharq::ici::IciModelKind;
use zfharq::layout::LayoutParams;
use zfharq::scheduler::{Mode, Utility};
use zfharq::sim::{
    run_bound_experiments, run_experiment, run_measurement, run_warmup, ExperimentConfig, RFirst, RunOptions,
};

fn small(cells: usize, users: usize, antennas: usize, mode: Mode) -> ExperimentConfig {
    let mut c = ExperimentConfig::reference(Utility::ProportionalFair, mode);
    c.layout = LayoutParams::new(cells, users, antennas, 1e6, 3.0, 0.05).unwrap();
    c.slots_warmup = 500;
    c.slots_measure = 2000;
    c.probe_slots = 2000;
    c
}

/// `E1(x)` by its power series, adequate for small `x`.
fn exp_integral_e1(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 1..60 {
        term *= -x / n as f64;
        sum += term / n as f64;
    }
    -0.577_215_664_901_532_9 - x.ln() - sum
}

#[test]
fn single_cell_genie_matches_closed_form() {
    let mut c = small(1, 1, 1, Mode::GenieRef);
    c.slots_measure = 100_000;
    let m = run_experiment(&c).unwrap();
    // E[log2(1 + a X)], X ~ Exp(1): e^{1/a} E1(1/a) / ln 2.
    let a: f64 = 1e6;
    let exact = (1.0 / a).exp() * exp_integral_e1(1.0 / a) / std::f64::consts::LN_2;
    let got = m.user(0, 0).unwrap().throughput;
    assert!((got - exact).abs() / exact < 0.01, "got {got}, closed form {exact}");
}

#[test]
fn single_cell_arqllc_matches_genie_to_grid() {
    // 40 dB keeps the mutual information below the 20-bit rate cap.
    let mut c = small(1, 1, 2, Mode::ArqLlc);
    c.layout.g0 = 1e4;
    c.slots_measure = 20_000;
    let cdfs = run_warmup(&c).unwrap();
    let arq = run_measurement(&c, &cdfs, &RunOptions::default()).unwrap();
    c.scheduler.mode = Mode::GenieRef;
    let genie = run_measurement(&c, &cdfs, &RunOptions::default()).unwrap();
    let (a, g) = (arq.user(0, 0).unwrap(), genie.user(0, 0).unwrap());
    assert_eq!(a.outage_fraction, Some(0.0));
    assert!(a.throughput <= g.throughput);
    assert!(g.throughput - a.throughput <= 0.01 + 1e-12, "arq {} genie {}", a.throughput, g.throughput);
}

#[test]
fn warmup_single_cell_is_interference_free() {
    let c = small(1, 3, 2, Mode::ArqLlc);
    let cdfs = run_warmup(&c).unwrap();
    for cdf in &cdfs.cdfs[0] {
        assert_eq!(cdf.len(), 500);
        assert_eq!(cdf.max(), 0.0);
    }
}

#[test]
fn warmup_records_one_sample_per_slot() {
    let mut c = small(3, 4, 2, Mode::Harq);
    c.slots_warmup = 321;
    c.ici_iterations = 2;
    let cdfs = run_warmup(&c).unwrap();
    assert_eq!(cdfs.cells(), 3);
    assert!(cdfs.cdfs.iter().flatten().all(|f| f.len() == 321));
}

#[test]
fn mirrored_users_see_the_same_interference() {
    let mut c = small(3, 6, 2, Mode::GenieRef);
    c.slots_warmup = 10_000;
    let cdfs = run_warmup(&c).unwrap();
    for cell in &cdfs.cdfs {
        for k in 0..3 {
            let d = cell[k].ks_distance(&cell[5 - k]);
            assert!(d < 0.05, "KS distance {d} between users {} and {}", k + 1, 6 - k);
        }
    }
}

#[test]
fn reruns_are_identical() {
    let mut c = small(3, 4, 2, Mode::Harq);
    c.slots_warmup = 300;
    c.slots_measure = 600;
    c.probe_slots = 600;
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    c.parallel = true;
    let p = run_experiment(&c).unwrap();
    assert_eq!(format!("{a:?}"), format!("{p:?}"));
    c.seed += 1;
    let other = run_experiment(&c).unwrap();
    assert_ne!(format!("{a:?}"), format!("{other:?}"));
}

#[test]
fn fixed_first_block_rates_are_used() {
    let mut c = small(2, 3, 2, Mode::Harq);
    c.r_first = RFirst::Fixed(vec![5.0, 6.0, 7.0]);
    let m = run_experiment(&c).unwrap();
    for u in &m.users {
        assert_eq!(u.r_first, Some(5.0 + u.user as f64));
        let acks = u.acks.unwrap();
        assert_eq!(u.throughput, u.r_first.unwrap() * acks as f64 / c.slots_measure as f64);
        assert!(u.throughput <= u.genie_throughput);
        if acks > 0 {
            assert!(u.mean_delay.unwrap() >= 1.0);
        }
    }
    c.r_first = RFirst::Fixed(vec![1.0]);
    assert!(run_experiment(&c).is_err());
}

#[test]
fn throughput_accounting() {
    let mut c = small(3, 4, 2, Mode::ArqLlc);
    c.slots_measure = 3000;
    let m = run_experiment(&c).unwrap();
    for u in &m.users {
        assert!(u.throughput >= 0.0);
        assert!(u.throughput <= u.genie_throughput + 1e-12);
        assert!(u.outage_fraction.unwrap() <= 1.0);
    }
    assert_eq!(m.users.len(), 12);
    assert_eq!(m.cells.len(), 3);
    assert!(!m.queue_trace.is_empty());
}

#[test]
fn bounds_coincide_without_interference() {
    let c = small(1, 3, 2, Mode::GenieRef);
    let cdfs = run_warmup(&c).unwrap();
    let b = run_bound_experiments(&c, &cdfs).unwrap();
    assert_eq!(b.inner.realization, zfharq::sim::Realization::Model(IciModelKind::DeterministicMean));
    for k in 0..3 {
        let t = |m: &zfharq::sim::Metrics| m.user(0, k).unwrap().throughput;
        assert_eq!(t(&b.inner), t(&b.actual));
        assert_eq!(t(&b.outer), t(&b.actual));
    }
}

#[test]
fn bounds_are_ordered() {
    let mut c = small(3, 6, 2, Mode::GenieRef);
    c.slots_warmup = 5000;
    c.slots_measure = 20_000;
    let cdfs = run_warmup(&c).unwrap();
    let b = run_bound_experiments(&c, &cdfs).unwrap();
    let gap: f64 = zfharq::ici::gap_constant();
    for k in 0..6 {
        let (i, a, o) = (b.inner.user(0, k).unwrap(), b.actual.user(0, k).unwrap(), b.outer.user(0, k).unwrap());
        let s = |x: f64, y: f64| 3.0 * (x * x + y * y).sqrt();
        assert!(i.throughput <= a.throughput + s(i.stderr, a.stderr), "user {}: inner {} actual {}", k + 1, i.throughput, a.throughput);
        assert!(a.throughput <= o.throughput + s(a.stderr, o.stderr), "user {}: actual {} outer {}", k + 1, a.throughput, o.throughput);
        assert!(o.throughput - i.throughput <= gap + s(i.stderr, o.stderr));
    }
}
