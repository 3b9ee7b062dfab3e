mod common;

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::OnceLock;

use gprc_core::lti::connect_feedback;
use gprc_core::sim::{
    generate_position, period_metrics, run_scenario, DisturbanceMap, Duration, Horizon,
    PositionMode, PositionModeKind, RcVariant, ScenarioConfig, ScenarioResult, Segment, TraceKind,
    VelocityProfile,
};
use proptest::prelude::*;

fn case_study() -> &'static ScenarioResult {
    static R: OnceLock<ScenarioResult> = OnceLock::new();
    R.get_or_init(|| run_scenario(&ScenarioConfig::default()).unwrap())
}

/// Velocity at which one revolution takes exactly 1717 samples.
fn exact_period_config(variant: RcVariant, periods: usize) -> ScenarioConfig {
    ScenarioConfig {
        variant,
        velocity: VelocityProfile::constant(TAU / 1.717).unwrap(),
        duration: Duration::Periods(periods),
        ..ScenarioConfig::default()
    }
}

#[test]
fn disturbance_map_term_by_term() {
    let d = DisturbanceMap::case_study();
    let oracle = |p: f64| {
        1.5 * p.sin()
            + 0.8 * (3.0 * p).sin()
            + 0.6 * (9.0 * p).sin()
            + 0.4 * (18.0 * p).sin()
            + 0.2 * (27.0 * p).sin()
    };
    assert_eq!(d.eval(0.0), 0.0);
    assert!((d.eval(FRAC_PI_2) - 1.1).abs() < 1e-12);
    for i in 0..100 {
        let p = 0.0628 * i as f64;
        assert!((d.eval(p) - oracle(p)).abs() < 1e-12);
    }
}

#[test]
fn one_revolution_at_nominal_speed() {
    let prof = VelocityProfile::constant(3.6593).unwrap();
    let tr = generate_position(&prof, 1e-3, &PositionMode::Ideal, Horizon::Samples(1718)).unwrap();
    assert!((tr.position[1717] - TAU).abs() < 1e-3);
    assert!(tr.position[1717] < TAU && tr.position[1716] < TAU);
    // the first revolution ends after 1717 sampling intervals
    assert_eq!(case_study().fences[1], 1718);
}

#[test]
fn ramp_matches_closed_form() {
    let prof = VelocityProfile::new(vec![Segment::ramp(1.0, 3.6593, 5.0)]).unwrap();
    let tr = generate_position(&prof, 1e-3, &PositionMode::Ideal, Horizon::Samples(1001)).unwrap();
    for (k, &p) in tr.position.iter().enumerate() {
        let t = k as f64 * 1e-3;
        let want = 3.6593 * t + 0.5 * (5.0 - 3.6593) * t * t;
        assert!((p - want).abs() < 1e-6, "sample {k}");
    }
}

#[test]
fn plain_loop_is_the_process_sensitivity() {
    let r = case_study();
    let plant = r.design.plant.to_state_space().unwrap();
    let ctrl = r.design.controller.to_state_space().unwrap();
    let mut ps = connect_feedback(&plant, &ctrl).unwrap().process_sensitivity;
    let neg_d: Vec<f64> = r.d.iter().map(|d| -d).collect();
    let want = ps.simulate(&neg_d).unwrap();
    let e = &r.trace(TraceKind::None).unwrap().e;
    assert!(common::max_abs_diff(e, &want) < 1e-8);
}

#[test]
fn zero_disturbance_gives_zero_signals() {
    let cfg = ScenarioConfig {
        disturbance: DisturbanceMap::zero(TAU).unwrap(),
        duration: Duration::Periods(3),
        ..ScenarioConfig::default()
    };
    let r = run_scenario(&cfg).unwrap();
    for t in &r.traces {
        assert!(t.e.iter().chain(&t.f).all(|&x| x == 0.0), "{:?}", t.kind);
    }
}

#[test]
fn plain_loop_is_periodic_at_constant_speed() {
    let r = run_scenario(&exact_period_config(RcVariant::None, 4)).unwrap();
    let e = &r.trace(TraceKind::None).unwrap().e;
    let scale = e.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let start = r.fences[2];
    let resid = (start..start + 1717)
        .map(|k| (e[k + 1717] - e[k]).abs())
        .fold(0.0, f64::max);
    assert!(resid < 0.01 * scale, "{resid} vs {scale}");
}

#[test]
fn plain_loop_metric_is_flat_before_the_change() {
    let r = case_study();
    let m = r.metrics(TraceKind::None).unwrap();
    for j in 1..3 {
        assert!((m[j].norm - m[0].norm).abs() <= 0.05 * m[0].norm);
    }
}

#[test]
fn first_period_matches_the_plain_loop() {
    let r = case_study();
    let base = &r.trace(TraceKind::None).unwrap().e[..r.fences[1]];
    for kind in [TraceKind::Traditional, TraceKind::Spatial] {
        let e = &r.trace(kind).unwrap().e[..r.fences[1]];
        assert!(common::max_abs_diff(e, base) <= 1e-12);
    }
    // the spatial memory is empty for the whole first revolution, the
    // time-domain memory for its first N samples
    let f = &r.trace(TraceKind::Spatial).unwrap().f;
    assert!(f[..r.fences[1]].iter().all(|&x| x == 0.0));
    let f = &r.trace(TraceKind::Traditional).unwrap().f;
    assert!(f[..1717].iter().all(|&x| x == 0.0));
}

#[test]
fn both_variants_learn_and_diverge_after_the_change() {
    let r = case_study();
    let t = r.metrics(TraceKind::Traditional).unwrap();
    let s = r.metrics(TraceKind::Spatial).unwrap();
    assert_eq!(t.len(), 10);
    assert!(t[0].norm >= 10.0 * t[2].norm);
    assert!(s[0].norm >= 10.0 * s[2].norm);
    assert!(t[4].norm >= 3.0 * t[2].norm);
    assert!(s[4].norm <= s[2].norm);
    for j in 4..10 {
        assert!(s[j].norm < t[j].norm, "period {}", j + 1);
    }
    assert!(t[2].norm <= t[1].norm);
    assert_eq!(r.spatial_fits, Some(9));
}

#[test]
fn metrics_are_consistent_with_fences() {
    let r = case_study();
    for (_, m) in period_metrics(r).unwrap() {
        assert_eq!(m.len(), r.fences.len() - 1);
        assert_eq!(m.last().unwrap().end, r.samples());
        let total: usize = m.iter().map(|p| p.samples()).sum();
        assert_eq!(total, r.samples());
    }
    for w in r.fences.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn traditional_converges_at_exact_period() {
    let r = run_scenario(&exact_period_config(RcVariant::Traditional, 6)).unwrap();
    let m = r.metrics(TraceKind::Traditional).unwrap();
    assert!(m[5].norm < 0.01 * m[0].norm, "{m:?}");
}

#[test]
fn runs_are_reproducible() {
    let cfg = ScenarioConfig {
        duration: Duration::Periods(3),
        ..ScenarioConfig::default()
    };
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a.traces, b.traces);
    assert_eq!(a.p, b.p);
}

#[test]
fn fixed_duration_and_tracking_mode() {
    let cfg = ScenarioConfig {
        variant: RcVariant::Spatial,
        duration: Duration::Seconds(4.0),
        position_mode: PositionModeKind::ClosedLoopTracking,
        ..ScenarioConfig::default()
    };
    let r = run_scenario(&cfg).unwrap();
    assert_eq!(r.samples(), 4000);
    assert!(r.fences.len() >= 3);
    assert!(*r.fences.last().unwrap() < r.samples());
}

#[test]
fn too_short_runs_are_rejected() {
    let cfg = ScenarioConfig {
        duration: Duration::Seconds(2.0),
        ..ScenarioConfig::default()
    };
    assert!(run_scenario(&cfg).is_err());
    let cfg = ScenarioConfig {
        duration: Duration::Periods(1),
        ..ScenarioConfig::default()
    };
    assert!(run_scenario(&cfg).is_err());
}

proptest! {
    #[test]
    fn integer_harmonic_maps_are_periodic(p in -100.0..100.0f64) {
        let d = DisturbanceMap::case_study();
        prop_assert!((d.eval(p) - d.eval(p + TAU)).abs() < 1e-12);
        prop_assert!(d.eval(p).abs() <= 3.5);
    }
}
