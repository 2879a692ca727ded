use alloc::vec::Vec;

use super::*;
use crate::analyze::constant_pattern_window;
use crate::coloring::is_balanced;
use crate::field::{eval_field, FieldSpec};
use crate::fixtures;
use crate::network::NetworkSpec;
use crate::sim::{integrate, IntegrateOptions};

const FIG1_DECOUPLED: &str = "cells 1 { dx = -0.1 * self; } cells 2 { dx = -0.1 * self; }";
const FIG1_RELAX_TO_ONE: &str = "cells 1 { dx = 1 - self; } cells 2 { dx = 1 - self; }";

fn named(net: &TypedNetwork, classes: &[&[&str]]) -> Coloring {
    Coloring::from_named_classes(net, classes).unwrap()
}

fn random_states(net: &TypedNetwork, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, 0);
    (0..n).map(|_| (0..net.layout().total_dim()).map(|_| uniform(&mut rng, -3.0, 3.0)).collect()).collect()
}

/// Fig. 1 trajectory on `x1 = x3`, `x2 = x4` under a contraction.
fn fig1_reference() -> Trajectory {
    let net = fixtures::fig1();
    let field = parse_field(
        "cells 1 { dx = -self + 0.3 * sum(magenta, u -> u) + 0.2; } cells 2 { dx = -2 * self + sin(sum(blue, u -> u)); }",
        &net,
    )
    .unwrap();
    let mut opts = IntegrateOptions::default();
    opts.output_times = Some((1..200).map(|i| i as f64 * 0.01).collect());
    integrate(&net, &field, &[1.5, -1.0, 1.5, -1.0], 0.0, 2.0, &opts).unwrap()
}

#[test]
fn zero_size_gives_the_zero_field() {
    for (_, net) in fixtures::all() {
        let h = random_admissible_perturbation(&net, &PerturbationFamily::DslCoefficients, 0.0, 3).unwrap();
        assert_eq!(h.sup_bound, 0.0);
        for x in random_states(&net, 5, 1) {
            assert!(eval_field(&net, &*h.field, &x).unwrap().iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn dsl_perturbations_are_certified_and_admissible() {
    for (_, net) in fixtures::all() {
        for seed in 0..5 {
            let h = random_admissible_perturbation(&net, &PerturbationFamily::DslCoefficients, 1e-2, seed).unwrap();
            assert!(h.sup_bound <= 1e-2 && h.sup_bound > 0.0);
            assert!(h.admissibility.passed());
            for x in random_states(&net, 20, seed) {
                assert!(sup_norm(&eval_field(&net, &*h.field, &x).unwrap()) <= h.sup_bound);
            }
        }
    }
}

#[test]
fn distinct_seeds_give_distinct_perturbations() {
    let net = fixtures::fig1();
    let a = random_admissible_perturbation(&net, &PerturbationFamily::DslCoefficients, 1e-2, 1).unwrap();
    let b = random_admissible_perturbation(&net, &PerturbationFamily::DslCoefficients, 1e-2, 2).unwrap();
    let again = random_admissible_perturbation(&net, &PerturbationFamily::DslCoefficients, 1e-2, 1).unwrap();
    assert_ne!(a.source, b.source);
    assert_eq!(a.source, again.source);
    let x = [0.1, 0.2, 0.3, 0.4];
    assert_ne!(eval_field(&net, &*a.field, &x).unwrap(), eval_field(&net, &*b.field, &x).unwrap());
}

#[test]
fn bump_perturbation_along_a_reference_trajectory() {
    let net = fixtures::fig1();
    let reference = fig1_reference();
    let family = PerturbationFamily::Bump { reference: reference.clone(), bumps: 5 };
    let h = random_admissible_perturbation(&net, &family, 1e-2, 7).unwrap();
    assert!(h.c1_bound.unwrap() <= 1e-2);
    assert!(h.sup_bound <= h.c1_bound.unwrap());
    assert!(check_admissibility(&net, &*h.field, 1000, 1e-12, &mut stream(8, 0)).unwrap().passed());

    let terms = bump_terms(&net, &reference, 5, 1e-2, &mut stream(7, 0)).unwrap();
    assert_eq!(terms.len(), 2);
    let mut hit = 0;
    for i in 0..reference.len() {
        let x = reference.state(i);
        let g = eval_field(&net, &*h.field, x).unwrap();
        for term in &terms {
            let c = term.cell;
            let tuple: Vec<f64> =
                net.input_arrows(c).iter().flat_map(|&a| reference.cell_state(i, net.tail(a)).iter().copied()).collect();
            let expected = term.symmetries as f64 * term.bump.eval_point(&tuple) * term.direction[0];
            assert!((g[c.index()] - expected).abs() <= 1e-15);
            hit += usize::from(expected != 0.0);
        }
    }
    assert!(hit > 0);
    assert_eq!(terms[0].symmetries, 2);
}

#[test]
fn bump_perturbations_vanish_off_support() {
    let net = fixtures::fig1();
    let reference = fig1_reference();
    let terms = bump_terms(&net, &reference, 5, 1e-2, &mut stream(3, 0)).unwrap();
    for term in &terms {
        let basis = &term.bump.basis;
        let far: Vec<f64> = basis.anchor.iter().map(|a| a + 2.0 * basis.enclosing_radius + 1.0).collect();
        assert_eq!(term.bump.eval_point(&far), 0.0);
    }
}

#[test]
fn unbalanced_synchrony_breaks_out() {
    let net = fixtures::fig1();
    let mut cfg = DecayConfig::new(net.clone(), FIG1_DECOUPLED, named(&net, &[&["1", "2", "3"]]));
    cfg.seeds = 30;
    let stats = unbalanced_decay_experiment(&cfg).unwrap();
    assert!(!stats.initially_balanced);
    assert_eq!(stats.failures, 0);
    assert!(stats.verdict.passed, "{}", stats.fraction());
    assert_eq!(stats.verdict.seeds, 30);
    assert!(stats.breakout_times().iter().all(|&t| t > 0.0));
}

#[test]
fn balanced_synchrony_survives_every_perturbation() {
    let net = fixtures::fig1();
    let mut cfg = DecayConfig::new(net.clone(), FIG1_DECOUPLED, named(&net, &[&["1", "3"]]));
    cfg.seeds = 30;
    cfg.breakout = 1e-6;
    let stats = unbalanced_decay_experiment(&cfg).unwrap();
    assert!(stats.initially_balanced);
    assert_eq!(stats.breakouts, 0);
    assert!(stats.verdict.passed);
    assert_eq!(stats.verdict.threshold, 0.0);
    assert!(stats.trials.iter().all(|t| t.max_deviation <= 1e-6));
}

#[test]
fn zero_perturbation_keeps_unbalanced_synchrony() {
    let net = fixtures::fig1();
    let mut cfg = DecayConfig::new(net.clone(), FIG1_DECOUPLED, named(&net, &[&["1", "2", "3"]]));
    cfg.seeds = 30;
    cfg.eps = 0.0;
    let stats = unbalanced_decay_experiment(&cfg).unwrap();
    assert_eq!(stats.breakouts, 0);
    assert!(stats.trials.iter().all(|t| t.max_deviation <= 1e-12));
}

#[test]
fn trials_are_reproducible_and_order_independent() {
    let net = fixtures::fig1();
    let mut cfg = DecayConfig::new(net.clone(), FIG1_DECOUPLED, named(&net, &[&["1", "2", "3"]]));
    cfg.seeds = 30;
    let forward: Vec<DecayTrial> = (0..30).map(|s| decay_trial(&cfg, s)).collect();
    let backward: Vec<DecayTrial> = (0..30).rev().map(|s| decay_trial(&cfg, s)).collect();
    assert_eq!(summarize_decay(&cfg, forward).unwrap(), summarize_decay(&cfg, backward).unwrap());
}

#[test]
fn statistical_verdicts_need_enough_seeds() {
    let net = fixtures::fig1();
    let mut cfg = DecayConfig::new(net.clone(), FIG1_DECOUPLED, named(&net, &[&["1", "3"]]));
    cfg.seeds = 10;
    assert!(matches!(unbalanced_decay_experiment(&cfg), Err(HarnessError::TooFewSeeds { .. })));
    cfg.seeds = 30;
    cfg.eps = -1.0;
    assert!(matches!(unbalanced_decay_experiment(&cfg), Err(HarnessError::BadEpsilon(_))));
}

#[test]
fn linear_field_equilibrium_patterns() {
    let net = fixtures::fig1();
    let src = "cells 1 { dx = -self + 0.25 * sum(magenta, u -> u); } cells 2 { dx = -self + 0.25 * sum(blue, u -> u); }";
    let mut cfg = EquilibriumConfig::new(net.clone(), src);
    cfg.seeds = 30;
    let stats = equilibrium_pattern_experiment(&cfg).unwrap();
    assert_eq!(stats.equilibria.len(), 1);
    let eq = &stats.equilibria[0];
    assert!(sup_norm(&eq.state) <= 1e-12);
    assert_eq!(eq.pattern, Coloring::uniform(4));
    assert_eq!(stats.unbalanced, 1);

    let ring = fixtures::ring3();
    let mut cfg = EquilibriumConfig::new(ring.clone(), "cells r1 { dx = -self + 0.5 * sum(e, u -> u); }");
    cfg.seeds = 30;
    let stats = equilibrium_pattern_experiment(&cfg).unwrap();
    assert_eq!(stats.equilibria.len(), 1);
    assert_eq!(stats.equilibria[0].pattern, Coloring::uniform(3));
    assert_eq!(stats.unbalanced, 0);
    assert!(stats.verdict.passed);
}

#[test]
fn unbalanced_equilibrium_becomes_balanced_under_perturbation() {
    let net = fixtures::fig1();
    let mut cfg = EquilibriumConfig::new(net.clone(), FIG1_RELAX_TO_ONE);
    cfg.seeds = 30;
    cfg.guesses = alloc::vec![alloc::vec![0.5; 4]];
    cfg.random_starts = 2;
    let stats = equilibrium_pattern_experiment(&cfg).unwrap();
    assert_eq!(stats.equilibria.len(), 1);
    assert_eq!(stats.unbalanced, 1);
    assert!(stats.verdict.passed, "{}", stats.verdict.observed);
    let first = stats.continued[0].result.as_ref().unwrap();
    assert_eq!(first.pattern, named(&net, &[&["1", "3"], &["2", "4"]]));
}

#[test]
fn perturbation_away_from_the_equilibrium_changes_nothing() {
    let net = fixtures::fig1();
    let reference = fig1_reference();
    let mut cfg = EquilibriumConfig::new(net.clone(), FIG1_RELAX_TO_ONE);
    cfg.seeds = 30;
    cfg.random_starts = 1;
    cfg.family = PerturbationFamily::Bump { reference, bumps: 4 };
    let stats = equilibrium_pattern_experiment(&cfg).unwrap();
    for c in &stats.continued {
        let r = c.result.as_ref().unwrap();
        assert_eq!(r.state, stats.equilibria[0].state);
        assert_eq!(r.pattern, stats.equilibria[0].pattern);
    }
}

const FIG1_BISTABLE: &str =
    "cells 1 { dx = -self + 0.2 * sum(magenta, u -> u) + 0.3; } cells 2 { dx = self - self^3 + 0.1 * sum(blue, u -> u); }";

#[test]
fn hyperbolic_equilibrium_pattern_is_rigid_and_balanced() {
    let net = fixtures::fig1();
    let solution = SolutionFamily::Equilibrium { guess: alloc::vec![0.32, 1.03, 0.32, -0.97] };
    let verdict = rigidity_probe(&RigidityConfig::new(net.clone(), FIG1_BISTABLE, solution)).unwrap();
    assert_eq!(verdict.base_pattern, named(&net, &[&["1", "3"]]));
    assert!(verdict.rigid);
    assert!(verdict.base_balanced);
    assert!(verdict.consistent());
    assert_eq!(verdict.effective_seeds, 30);
}

#[test]
fn accidental_equality_is_not_rigid() {
    let net = fixtures::fig1();
    let solution = SolutionFamily::Equilibrium { guess: alloc::vec![0.5; 4] };
    let verdict = rigidity_probe(&RigidityConfig::new(net.clone(), FIG1_RELAX_TO_ONE, solution.clone())).unwrap();
    assert_eq!(verdict.base_pattern, Coloring::uniform(4));
    assert!(!verdict.base_balanced);
    assert!(!verdict.rigid);
    assert!(verdict.consistent());

    let mut cfg = RigidityConfig::new(net, FIG1_RELAX_TO_ONE, solution);
    cfg.eps = 0.0;
    assert!(rigidity_probe(&cfg).unwrap().rigid);
}

#[test]
fn synchronized_oscillation_is_rigid() {
    let net = NetworkSpec::new()
        .cell_type("osc", 2)
        .arrow_type("link")
        .cell("a", "osc")
        .cell("b", "osc")
        .arrow("ab", "link", "a", "b")
        .arrow("ba", "link", "b", "a")
        .build()
        .unwrap();
    let src = "
fn r2(x, y) = x^2 + y^2;
cells a { dx = [self[0] - self[1] - self[0] * r2(self[0], self[1]) + 0.1 * sum(link, u -> u[0] - self[0]),
               self[0] + self[1] - self[1] * r2(self[0], self[1]) + 0.1 * sum(link, u -> u[1] - self[1])]; }
";
    let solution = SolutionFamily::Periodic { guess: alloc::vec![1.0, 0.0, 1.0, 0.0], period: 6.3 };
    let mut cfg = RigidityConfig::new(net.clone(), src, solution);
    cfg.seeds = 8;
    cfg.tol = 1e-6;
    cfg.newton.tol = 1e-9;
    let verdict = rigidity_probe(&cfg).unwrap();
    assert_eq!(verdict.base_pattern, Coloring::uniform(2));
    assert!(verdict.rigid, "{verdict:?}");
    assert!(verdict.base_balanced);

    let base = parse_field(src, &net).unwrap();
    let orbit =
        find_periodic_orbit(&net, &base, &[1.0, 0.0, 1.0, 0.0], 6.3, &cfg.integrator, &cfg.newton).unwrap();
    assert!((orbit.period - 2.0 * core::f64::consts::PI).abs() < 1e-7);
}

const CHAIN_CANCELLATION: &str = "
cells 1 { dx = [-self[1], self[0]]; }
cells 2 { dx = (self - 0.5) * (1 + sum(link, u -> u[0])); }
";

#[test]
fn frozen_cell_with_moving_inputs_does_not_persist() {
    let net = fixtures::chain();
    let mut cfg = StationarityConfig::new(net, CHAIN_CANCELLATION, alloc::vec![1.0, 0.0, 0.5]);
    cfg.seeds = 30;
    let stats = stationarity_experiment(&cfg).unwrap();
    assert!(stats.base.non_generic());
    assert!(stats.failures.is_empty());
    assert!(stats.verdict.passed);
    assert!(stats.persisted.len() <= 1);
}

#[test]
fn contractive_fields_compile_and_are_admissible() {
    for (name, net) in fixtures::all() {
        for seed in 0..3 {
            let src = random_contractive_source(&net, &mut stream(seed, 0));
            let field: FieldSpec = parse_field(&src, &net).unwrap_or_else(|e| panic!("{name}: {e}\n{src}"));
            assert!(check_admissibility(&net, &field, 50, 1e-12, &mut stream(seed, 1)).unwrap().passed());
        }
    }
}

#[test]
fn constant_pattern_windows_are_balanced() {
    let (mut windows, mut balanced) = (0usize, 0usize);
    for (_, net) in fixtures::all() {
        for seed in 0..100 {
            let mut rng = stream(seed, 0);
            let field = parse_field(&random_contractive_source(&net, &mut rng), &net).unwrap();
            let x0: Vec<f64> = (0..net.layout().total_dim()).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
            let traj = integrate(&net, &field, &x0, 0.0, 5.0, &IntegrateOptions::default()).unwrap();
            for w in constant_pattern_window(&net, &traj, 1e-9).unwrap().windows {
                windows += 1;
                balanced += usize::from(is_balanced(&net, &w.pattern).unwrap().is_balanced());
            }
        }
    }
    assert!(balanced as f64 >= 0.99 * windows as f64, "{balanced}/{windows}");
}
