use alloc::vec::Vec;
use core::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::field::parse_field;
use crate::fixtures;
use crate::sim::{integrate, IntegrateOptions};

fn cells(net: &TypedNetwork, names: &[&str]) -> Vec<CellId> {
    names.iter().map(|n| net.cell_id(n).unwrap()).collect()
}

fn named(net: &TypedNetwork, classes: &[&[&str]]) -> Coloring {
    Coloring::from_named_classes(net, classes).unwrap()
}

/// Samples `state(t)` and its derivative on `n + 1` uniform points plus
/// `extra` times.
fn synthetic(
    net: &TypedNetwork,
    t0: f64,
    t1: f64,
    n: usize,
    extra: &[f64],
    state: impl Fn(f64) -> (Vec<f64>, Vec<f64>),
) -> Trajectory {
    let mut times: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
    times.extend_from_slice(extra);
    times.sort_unstable_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let (mut xs, mut fs) = (Vec::new(), Vec::new());
    for &t in &times {
        let (x, f) = state(t);
        xs.extend(x);
        fs.extend(f);
    }
    Trajectory::from_samples(net.layout().clone(), times, xs, Some(fs)).unwrap()
}

const T: f64 = 2.0 * PI;

/// Fig. 1 data with `x3(t) = x1(t + T/2)` and both right cells
/// `T/2`-periodic.
fn half_period_swap() -> Trajectory {
    let net = fixtures::fig1();
    synthetic(&net, 0.0, 4.0 * T, 1600, &[], |t| {
        let (s, c, s2, c2) = (libm::sin(t), libm::cos(t), libm::sin(2.0 * t), libm::cos(2.0 * t));
        let x = alloc::vec![s + 0.3 * c2, 0.5 + 0.4 * s2, -s + 0.3 * c2, -0.2 + 0.3 * c2];
        let f = alloc::vec![c - 0.6 * s2, 0.8 * c2, -c - 0.6 * s2, -0.6 * s2];
        (x, f)
    })
}

/// As `half_period_swap`, but the right cells only have period `T` and are not
/// related by the half-period shift.
fn unmatched_right_cells() -> Trajectory {
    let net = fixtures::fig1();
    synthetic(&net, 0.0, 4.0 * T, 1600, &[], |t| {
        let (s, c, s2, c2) = (libm::sin(t), libm::cos(t), libm::sin(2.0 * t), libm::cos(2.0 * t));
        let x = alloc::vec![s + 0.3 * c2, 0.5 + 0.4 * s, -s + 0.3 * c2, -0.2 + 0.3 * c];
        let f = alloc::vec![c - 0.6 * s2, 0.4 * c, -c - 0.6 * s2, -0.3 * s];
        (x, f)
    })
}

#[test]
fn distinct_cells_give_trivial_pattern() {
    let net = fixtures::fig1();
    let p = pattern_at(&net, &[0.0, 1.0, 2.0, 3.0], 1e-9).unwrap();
    assert!(p.pattern.is_trivial());
    assert!(p.ambiguous.is_empty());
}

#[test]
fn fig1_two_pair_pattern() {
    let net = fixtures::fig1();
    let p = pattern_at(&net, &[0.7, -1.2, 0.7, -1.2], 1e-9).unwrap();
    assert_eq!(p.pattern, named(&net, &[&["1", "3"], &["2", "4"]]));
}

#[test]
fn unbalanced_pointwise_pattern_is_returned() {
    let net = fixtures::fig1();
    let p = pattern_at(&net, &[0.5, 0.5, 1.0, 2.0], 1e-9).unwrap();
    assert_eq!(p.pattern, named(&net, &[&["1", "2"]]));
    assert!(!is_balanced(&net, &p.pattern).unwrap().is_balanced());
}

#[test]
fn gray_band_and_chaining_are_ambiguous() {
    let net = fixtures::fig1();
    let c = cells(&net, &["1", "2", "3", "4"]);
    let p = pattern_at(&net, &[0.0, 5e-9, 10.0, 20.0], 1e-9).unwrap();
    assert!(p.pattern.is_trivial());
    assert_eq!(p.ambiguous, alloc::vec![(c[0], c[1])]);
    let p = pattern_at(&net, &[0.0, 0.8e-9, 1.6e-9, 20.0], 1e-9).unwrap();
    assert!(p.pattern.same_color(c[0], c[2]));
    assert_eq!(p.ambiguous, alloc::vec![(c[0], c[2])]);
}

#[test]
fn different_dimensions_never_merge() {
    let net = fixtures::chain();
    let p = pattern_at(&net, &[0.0, 0.0, 0.0], 1e-9).unwrap();
    assert!(p.pattern.is_trivial());
}

proptest! {
    #[test]
    fn exact_pattern_matches_definition(labels in proptest::collection::vec(0u8..3, 4)) {
        let net = fixtures::fig1();
        let x: Vec<f64> = labels.iter().map(|&l| l as f64 * 0.37).collect();
        let p = pattern_at(&net, &x, 0.0).unwrap();
        for a in net.cells() {
            for b in net.cells() {
                prop_assert_eq!(p.pattern.same_color(a, b), x[a.index()] == x[b.index()]);
            }
        }
    }

    #[test]
    fn interval_pattern_is_antitone(a in 0usize..40, len in 0usize..40, extra in 1usize..40) {
        let traj = half_period_swap();
        let net = fixtures::fig1();
        let times = traj.times();
        let (i, j, k) = (a, (a + len).min(times.len() - 1), (a + len + extra).min(times.len() - 1));
        let inner = pattern_on_interval(&net, &traj, times[i], times[j], 1e-9).unwrap();
        let outer = pattern_on_interval(&net, &traj, times[i], times[k], 1e-9).unwrap();
        prop_assert!(outer.pattern.is_finer(&inner.pattern).unwrap());
    }
}

#[test]
fn constant_trajectory_on_a_synchrony_space() {
    let net = fixtures::fig1();
    let traj = synthetic(&net, 0.0, 1.0, 10, &[], |_| (alloc::vec![0.2, 1.0, 0.2, -1.0], alloc::vec![0.0; 4]));
    let report = pattern_on_interval(&net, &traj, 0.0, 1.0, 1e-9).unwrap();
    assert_eq!(report.pattern, named(&net, &[&["1", "3"]]));
    assert!(report.is_balanced());
    assert_eq!(report.max_same_color_deviation, 0.0);
    assert!(report.min_separation > 1e-8);
    assert_eq!(report.samples, 21);

    let windows = constant_pattern_window(&net, &traj, 1e-9).unwrap();
    assert_eq!(windows.windows.len(), 1);
    assert_eq!((windows.windows[0].from, windows.windows[0].to), (0.0, 1.0));
    assert!(windows.isolated.is_empty());
}

/// Two cells with `x = (sin t, sin 2t)`, equal exactly at `π/3`, `π` and
/// `5π/3` on `[0.1, 6]`.
fn crossing() -> (TypedNetwork, Trajectory, [f64; 3]) {
    let net = fixtures::pair_same_type();
    let hits = [PI / 3.0, PI, 5.0 * PI / 3.0];
    let traj = synthetic(&net, 0.1, 6.0, 300, &hits, |t| {
        (
            alloc::vec![libm::sin(t), libm::sin(2.0 * t)],
            alloc::vec![libm::cos(t), 2.0 * libm::cos(2.0 * t)],
        )
    });
    (net, traj, hits)
}

#[test]
fn isolated_equalities_are_excluded_from_interval_patterns() {
    let (net, traj, hits) = crossing();
    let at = traj.times().iter().position(|&t| t == hits[1]).unwrap();
    assert!(!pattern_at(&net, traj.state(at), 1e-9).unwrap().pattern.is_trivial());
    let report = pattern_on_interval(&net, &traj, 0.1, 6.0, 1e-9).unwrap();
    assert!(report.pattern.is_trivial());
    assert!(report.pairs[0].min_distance <= 1e-15);
}

#[test]
fn windows_split_at_isolated_equalities() {
    let (net, traj, hits) = crossing();
    let d = constant_pattern_window(&net, &traj, 1e-9).unwrap();
    assert_eq!(d.windows.len(), 4);
    assert!(d.windows.iter().all(|w| w.pattern.is_trivial() && w.samples > 1));
    let iso: Vec<f64> = d.isolated.iter().map(|(t, _)| *t).collect();
    assert_eq!(iso, hits.to_vec());
    assert!(d.semicontinuity_ok);
    for (w, t) in d.windows.iter().skip(1).zip(hits) {
        assert!(w.from > t);
    }
}

#[test]
fn single_sample_interval_equals_pointwise() {
    let traj = half_period_swap();
    let net = fixtures::fig1();
    for i in [0, 17, 400] {
        let t = traj.times()[i];
        let report = pattern_on_interval(&net, &traj, t, t, 1e-9).unwrap();
        assert_eq!(report.samples, 1);
        assert_eq!(report.pattern, pattern_at(&net, traj.state(i), 1e-9).unwrap().pattern);
    }
}

#[test]
fn interval_errors() {
    let traj = half_period_swap();
    let net = fixtures::fig1();
    assert!(matches!(pattern_on_interval(&net, &traj, 2.0, 1.0, 1e-9), Err(AnalyzeError::EmptyInterval { .. })));
    assert!(matches!(pattern_on_interval(&net, &traj, -1.0, 1.0, 1e-9), Err(AnalyzeError::OutOfSpan { .. })));
    let other = fixtures::ring3();
    assert!(matches!(pattern_on_interval(&other, &traj, 0.0, 1.0, 1e-9), Err(AnalyzeError::LayoutMismatch)));
}

#[test]
fn equilibrium_is_stationary_everywhere() {
    let net = fixtures::fig1();
    let traj = synthetic(&net, 0.0, 1.0, 10, &[], |_| (alloc::vec![0.2, 1.0, 0.2, -1.0], alloc::vec![0.0; 4]));
    let report = stationary_cells(&net, &traj, 0.0, 1.0, 1e-10).unwrap();
    assert_eq!(report.stationary.len(), 4);
    assert!(report.propagation_satisfied());
}

#[test]
fn frozen_upstream_cell_in_a_chain() {
    let net = fixtures::chain();
    let field = parse_field("cells 1 { dx = [0, 0]; } cells 2 { dx = -self + sum(link, u -> u[0]); }", &net).unwrap();
    let traj = integrate(&net, &field, &[1.0, 0.5, 0.0], 0.0, 2.0, &IntegrateOptions::default()).unwrap();
    let report = stationary_cells(&net, &traj, 0.0, 2.0, 1e-10).unwrap();
    assert_eq!(report.stationary, cells(&net, &["1"]));
    assert!(report.propagation_satisfied());
    assert!(report.max_rates[1] > 0.1);
}

#[test]
fn cancellation_is_flagged_non_generic() {
    let net = fixtures::chain();
    let src = "
cells 1 { dx = [-self[1], self[0]]; }
cells 2 { dx = (self - 0.5) * (1 + sum(link, u -> u[0])); }
";
    let field = parse_field(src, &net).unwrap();
    let traj = integrate(&net, &field, &[1.0, 0.0, 0.5], 0.0, 2.0, &IntegrateOptions::default()).unwrap();
    let report = stationary_cells(&net, &traj, 0.0, 2.0, 1e-10).unwrap();
    let c = cells(&net, &["1", "2"]);
    assert_eq!(report.stationary, alloc::vec![c[1]]);
    assert!(report.non_generic());
    assert_eq!(report.violations, alloc::vec![(c[1], c[0])]);
}

#[test]
fn half_period_swap_is_detected() {
    let net = fixtures::fig1();
    let traj = half_period_swap();
    let report = detect_phase_shift(&net, &traj, T / 2.0, 1e-6).unwrap();
    let c = cells(&net, &["1", "2", "3", "4"]);
    assert_eq!(report.pairs(), alloc::vec![(c[0], c[2])]);
    assert_eq!(report.self_related, alloc::vec![c[1], c[3]]);
    assert!(report.doubled_balanced());
    assert!(!report.non_generic());
    let periods = report.periods.as_ref().unwrap();
    assert!((periods[0].period().unwrap() - T).abs() <= 1e-3 * T);
    assert!((periods[1].period().unwrap() - T / 2.0).abs() <= 1e-3 * T);
}

#[test]
fn zero_shift_gives_the_diagonal() {
    let net = fixtures::fig1();
    for traj in [half_period_swap(), unmatched_right_cells()] {
        let report = detect_phase_shift(&net, &traj, 0.0, 1e-9).unwrap();
        assert_eq!(report.self_related, net.cells().collect::<Vec<_>>());
        assert!(report.relations.is_empty());
        assert!(!report.non_generic());
    }
}

#[test]
fn unmatched_inputs_violate_the_input_condition() {
    let net = fixtures::fig1();
    let report = detect_phase_shift(&net, &unmatched_right_cells(), T / 2.0, 1e-6).unwrap();
    let c = cells(&net, &["1", "3"]);
    assert_eq!(report.pairs(), alloc::vec![(c[0], c[1])]);
    assert!(report.non_generic());
    assert!(!report.doubled_balanced());
    assert!(report.rigid_phase_violations.contains(&(c[0], c[1])));
}

#[test]
fn first_copy_restriction_is_the_plain_pattern() {
    let net = fixtures::fig1();
    let traj = half_period_swap();
    for theta in [0.0, 0.3, T / 2.0, T] {
        let report = detect_phase_shift(&net, &traj, theta, 1e-6).unwrap();
        let plain = pattern_on_interval(&net, &traj, traj.t0(), traj.t1() - theta, 1e-6).unwrap();
        assert_eq!(report.base_pattern, plain.pattern);
    }
    assert!(matches!(detect_phase_shift(&net, &traj, 5.0 * T, 1e-6), Err(AnalyzeError::InvalidShift { .. })));
    assert!(matches!(detect_phase_shift(&net, &traj, -1.0, 1e-6), Err(AnalyzeError::InvalidShift { .. })));
}

#[test]
fn constant_trajectory_has_degenerate_periods() {
    let net = fixtures::fig1();
    let traj = synthetic(&net, 0.0, 10.0, 200, &[], |_| (alloc::vec![0.2, 1.0, 0.2, -1.0], alloc::vec![0.0; 4]));
    let report = periodicity_report(&net, &traj, &PeriodOptions::default()).unwrap();
    assert!(report.cells.iter().all(|p| *p == CellPeriod::Constant));
    assert!(report.checks.is_empty());
}

#[test]
fn half_period_swap_period_propagation() {
    let net = fixtures::fig1();
    let report = periodicity_report(&net, &half_period_swap(), &PeriodOptions::default()).unwrap();
    let p: Vec<f64> = report.cells.iter().map(|c| c.period().unwrap()).collect();
    for (est, exact) in p.iter().zip([T, T / 2.0, T, T / 2.0]) {
        assert!((est - exact).abs() <= 1e-3 * exact, "{est} vs {exact}");
    }
    assert!(report.holds());
    assert_eq!(report.whole_state_consistent, Some(true));
    let c1 = net.cell_id("1").unwrap();
    assert!(report.checks.iter().filter(|k| k.cell == c1).all(|k| k.holds()));
}

fn chain_with_periods(p_cell: f64, p_input: f64) -> (TypedNetwork, Trajectory) {
    let net = fixtures::chain();
    let (wi, wc) = (2.0 * PI / p_input, 2.0 * PI / p_cell);
    let traj = synthetic(&net, 0.0, 8.0 * p_cell.max(p_input), 4000, &[], |t| {
        (
            alloc::vec![libm::sin(wi * t), libm::cos(wi * t), libm::sin(wc * t)],
            alloc::vec![wi * libm::cos(wi * t), -wi * libm::sin(wi * t), wc * libm::cos(wc * t)],
        )
    });
    (net, traj)
}

#[test]
fn input_period_dividing_the_cell_period_passes() {
    let (net, traj) = chain_with_periods(2.0, 1.0);
    let report = periodicity_report(&net, &traj, &PeriodOptions::default()).unwrap();
    assert!(report.holds());
    assert_eq!(report.checks.len(), 1);
    assert_eq!(report.checks[0].multiple, Some(1));
    assert_eq!(report.whole_state, None);
}

#[test]
fn incommensurate_input_period_is_flagged() {
    let (net, traj) = chain_with_periods(2.0, 1.3);
    let report = periodicity_report(&net, &traj, &PeriodOptions::default()).unwrap();
    assert!(!report.holds());
    assert!((report.cells[1].period().unwrap() - 2.0).abs() < 2e-3);
    assert!((report.cells[0].period().unwrap() - 1.3).abs() < 1.3e-3);
}

#[test]
fn short_span_is_rejected() {
    let net = fixtures::fig1();
    let traj = synthetic(&net, 0.0, 1.0, 20, &[], |t| (alloc::vec![t; 4], alloc::vec![1.0; 4]));
    assert!(matches!(
        periodicity_report(&net, &traj, &PeriodOptions::default()),
        Err(AnalyzeError::InsufficientSpan { .. })
    ));
}
