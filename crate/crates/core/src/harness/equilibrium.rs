//! Synchrony patterns of equilibria and rigidity of solution patterns under
//! perturbation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::newton::{find_equilibrium, find_periodic_orbit, NewtonOptions};
use super::{
    check_eps, check_seeds, compile_base, perturbation_from, perturbed, HarnessError, PerturbationFamily, Verdict, DEFAULT_THRESHOLD,
};
use crate::analyze::{pattern_at, pattern_on_interval};
use crate::coloring::{is_balanced, Coloring};
use crate::field::CellField;
use crate::network::TypedNetwork;
use crate::rng::{stream, uniform};
use crate::sim::{integrate, IntegrateOptions};
use crate::state::sup_distance;

/// Random Newton starts draw from streams above this offset, so they never
/// share a stream with a perturbation seed.
const START_STREAMS: u64 = 1 << 32;

#[derive(Clone, Debug)]
pub struct EquilibriumConfig {
    pub network: TypedNetwork,
    pub base: String,
    /// Overrides of `param` values in the base source.
    pub params: Vec<(String, f64)>,
    /// Explicit Newton starts, tried before the random ones.
    pub guesses: Vec<Vec<f64>>,
    /// Random starts drawn uniformly from `[-start_box, start_box]^n`.
    pub random_starts: usize,
    pub start_box: f64,
    pub family: PerturbationFamily,
    pub eps: f64,
    pub seeds: usize,
    pub seed_base: u64,
    /// Equality tolerance for synchrony patterns.
    pub tol: f64,
    pub threshold: f64,
    pub newton: NewtonOptions,
}

impl EquilibriumConfig {
    pub fn new(network: TypedNetwork, base: &str) -> Self {
        Self {
            network,
            base: base.into(),
            params: Vec::new(),
            guesses: Vec::new(),
            random_starts: 10,
            start_box: 2.0,
            family: PerturbationFamily::DslCoefficients,
            eps: 1e-2,
            seeds: 100,
            seed_base: 0,
            tol: 1e-9,
            threshold: DEFAULT_THRESHOLD,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumRecord {
    pub state: Vec<f64>,
    pub pattern: Coloring,
    pub balanced: bool,
}

/// Continuation of one base equilibrium under one perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedRecord {
    pub seed: usize,
    pub equilibrium: usize,
    pub result: Result<EquilibriumRecord, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumStats {
    pub starts: usize,
    /// Newton failures among the starts.
    pub failures: Vec<String>,
    /// Distinct equilibria of the base field.
    pub equilibria: Vec<EquilibriumRecord>,
    /// Base equilibria with an unbalanced pattern: non-generic, flagged.
    pub unbalanced: usize,
    pub continued: Vec<ContinuedRecord>,
    /// Fraction of converged continuations with a balanced pattern.
    pub verdict: Verdict,
}

fn record(net: &TypedNetwork, x: Vec<f64>, tol: f64) -> Result<EquilibriumRecord, HarnessError> {
    let pattern = pattern_at(net, &x, tol)?.pattern;
    let balanced = is_balanced(net, &pattern)?.is_balanced();
    Ok(EquilibriumRecord { state: x, pattern, balanced })
}

/// Finds equilibria of the base field, flags unbalanced equilibrium
/// patterns, then continues each equilibrium under `cfg.seeds` random
/// perturbations and counts how many continued patterns are balanced.
pub fn equilibrium_pattern_experiment(cfg: &EquilibriumConfig) -> Result<EquilibriumStats, HarnessError> {
    check_seeds(cfg.seeds)?;
    check_eps(cfg.eps)?;
    let net = &cfg.network;
    let base = compile_base(net, &cfg.base, &cfg.params)?;
    let n = net.layout().total_dim();
    let mut starts = cfg.guesses.clone();
    for k in 0..cfg.random_starts {
        let mut rng = stream(cfg.seed_base, START_STREAMS + k as u64);
        starts.push((0..n).map(|_| uniform(&mut rng, -cfg.start_box, cfg.start_box)).collect());
    }
    let mut failures = Vec::new();
    let mut equilibria: Vec<EquilibriumRecord> = Vec::new();
    for guess in &starts {
        if guess.len() != n {
            return Err(HarnessError::BadInitialState { expected: n, found: guess.len() });
        }
        match find_equilibrium(net, &*base, guess, &cfg.newton) {
            Ok(x) => {
                if equilibria.iter().all(|e| sup_distance(&e.state, &x) > 1e-8) {
                    equilibria.push(record(net, x, cfg.tol)?);
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let unbalanced = equilibria.iter().filter(|e| !e.balanced).count();
    let mut continued = Vec::new();
    for seed in 0..cfg.seeds {
        let mut rng = stream(cfg.seed_base, seed as u64);
        let h = perturbation_from(net, &cfg.family, cfg.eps, &mut rng)?;
        let field = perturbed(&base, &h);
        for (i, e) in equilibria.iter().enumerate() {
            let result = find_equilibrium(net, &field, &e.state, &cfg.newton)
                .map_err(|e| e.to_string())
                .and_then(|x| record(net, x, cfg.tol).map_err(|e| e.to_string()));
            continued.push(ContinuedRecord { seed, equilibrium: i, result });
        }
    }
    let converged: Vec<&EquilibriumRecord> = continued.iter().filter_map(|c| c.result.as_ref().ok()).collect();
    let balanced = converged.iter().filter(|r| r.balanced).count();
    let observed = if converged.is_empty() { 0.0 } else { balanced as f64 / converged.len() as f64 };
    Ok(EquilibriumStats {
        starts: starts.len(),
        failures,
        equilibria,
        unbalanced,
        continued,
        verdict: Verdict {
            observed,
            threshold: cfg.threshold,
            seeds: cfg.seeds,
            seed_base: cfg.seed_base,
            passed: observed >= cfg.threshold,
        },
    })
}

/// Solution whose pattern is probed.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionFamily {
    /// Continued by Newton iteration from the base equilibrium.
    Equilibrium { guess: Vec<f64> },
    /// Continued by shooting from the base orbit.
    Periodic { guess: Vec<f64>, period: f64 },
}

#[derive(Clone, Debug)]
pub struct RigidityConfig {
    pub network: TypedNetwork,
    pub base: String,
    pub params: Vec<(String, f64)>,
    pub solution: SolutionFamily,
    pub family: PerturbationFamily,
    pub eps: f64,
    pub seeds: usize,
    pub seed_base: u64,
    pub tol: f64,
    pub newton: NewtonOptions,
    pub integrator: IntegrateOptions,
}

impl RigidityConfig {
    pub fn new(network: TypedNetwork, base: &str, solution: SolutionFamily) -> Self {
        Self {
            network,
            base: base.into(),
            params: Vec::new(),
            solution,
            family: PerturbationFamily::DslCoefficients,
            eps: 1e-2,
            seeds: 30,
            seed_base: 0,
            tol: 1e-9,
            newton: NewtonOptions::default(),
            integrator: IntegrateOptions::dopri(1e-11, 1e-13),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityVerdict {
    pub base_pattern: Coloring,
    pub base_balanced: bool,
    /// Seeds whose continuation converged.
    pub effective_seeds: usize,
    /// Seeds whose continued pattern differs from the base pattern.
    pub changed: Vec<usize>,
    pub failures: Vec<(usize, String)>,
    /// Every continued pattern equals the base pattern, at resolution
    /// `(eps, effective_seeds)`.
    pub rigid: bool,
    pub eps: f64,
    pub seeds: usize,
    pub seed_base: u64,
}

impl RigidityVerdict {
    /// A rigid pattern is balanced.
    pub fn consistent(&self) -> bool {
        !self.rigid || self.base_balanced
    }
}

struct Solved {
    pattern: Coloring,
    guess: Vec<f64>,
    period: Option<f64>,
}

fn solve_family(
    cfg: &RigidityConfig,
    field: &dyn CellField,
    guess: &[f64],
    period: Option<f64>,
) -> Result<Solved, HarnessError> {
    let net = &cfg.network;
    match period {
        None => {
            let x = find_equilibrium(net, field, guess, &cfg.newton)?;
            let pattern = pattern_at(net, &x, cfg.tol)?.pattern;
            Ok(Solved { pattern, guess: x, period: None })
        }
        Some(t) => {
            let orbit = find_periodic_orbit(net, field, guess, t, &cfg.integrator, &cfg.newton)?;
            let mut opts = cfg.integrator.clone();
            opts.output_times = Some((1..400).map(|i| orbit.period * i as f64 / 400.0).collect());
            let traj = integrate(net, field, &orbit.point, 0.0, orbit.period, &opts)?;
            let pattern = pattern_on_interval(net, &traj, 0.0, orbit.period, cfg.tol)?.pattern;
            Ok(Solved { pattern, guess: orbit.point, period: Some(orbit.period) })
        }
    }
}

/// Continues the base solution under `cfg.seeds` perturbations of size
/// `cfg.eps` and compares synchrony patterns.
pub fn rigidity_probe(cfg: &RigidityConfig) -> Result<RigidityVerdict, HarnessError> {
    check_eps(cfg.eps)?;
    let net = &cfg.network;
    let base = compile_base(net, &cfg.base, &cfg.params)?;
    let (guess, period) = match &cfg.solution {
        SolutionFamily::Equilibrium { guess } => (guess.clone(), None),
        SolutionFamily::Periodic { guess, period } => (guess.clone(), Some(*period)),
    };
    let solved = solve_family(cfg, &*base, &guess, period)?;
    let base_balanced = is_balanced(net, &solved.pattern)?.is_balanced();
    let mut changed = Vec::new();
    let mut failures = Vec::new();
    for seed in 0..cfg.seeds {
        let mut rng = stream(cfg.seed_base, seed as u64);
        let h = perturbation_from(net, &cfg.family, cfg.eps, &mut rng)?;
        let field = perturbed(&base, &h);
        match solve_family(cfg, &field, &solved.guess, solved.period) {
            Ok(s) if s.pattern != solved.pattern => changed.push(seed),
            Ok(_) => {}
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    let effective_seeds = cfg.seeds - failures.len();
    Ok(RigidityVerdict {
        base_pattern: solved.pattern,
        base_balanced,
        effective_seeds,
        rigid: changed.is_empty() && effective_seeds > 0,
        changed,
        failures,
        eps: cfg.eps,
        seeds: cfg.seeds,
        seed_base: cfg.seed_base,
    })
}
