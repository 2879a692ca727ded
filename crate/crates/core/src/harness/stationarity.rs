//! Persistence of a stationary cell with moving inputs under perturbation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{check_eps, check_seeds, compile_base, perturbation_from, perturbed, HarnessError, PerturbationFamily, Verdict};
use crate::analyze::{stationary_cells, StationaryReport};
use crate::field::{CellField, SharedField};
use crate::network::TypedNetwork;
use crate::rng::stream;
use crate::sim::{integrate, IntegrateOptions};

#[derive(Clone, Debug)]
pub struct StationarityConfig {
    pub network: TypedNetwork,
    pub base: String,
    /// Overrides of `param` values in the base source.
    pub params: Vec<(String, f64)>,
    pub x0: Vec<f64>,
    pub t_end: f64,
    /// Interval on which stationarity is tested.
    pub window: (f64, f64),
    pub tol_rate: f64,
    pub family: PerturbationFamily,
    pub eps: f64,
    pub seeds: usize,
    pub seed_base: u64,
    /// Largest fraction of seeds in which the non-generic configuration may
    /// persist.
    pub max_persistence: f64,
    pub integrator: IntegrateOptions,
}

impl StationarityConfig {
    pub fn new(network: TypedNetwork, base: &str, x0: Vec<f64>) -> Self {
        Self {
            network,
            base: base.into(),
            params: Vec::new(),
            x0,
            t_end: 5.0,
            window: (0.0, 5.0),
            tol_rate: 1e-6,
            family: PerturbationFamily::DslCoefficients,
            eps: 1e-2,
            seeds: 100,
            seed_base: 0,
            max_persistence: 0.05,
            integrator: IntegrateOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarityStats {
    /// Report for the unperturbed field.
    pub base: StationaryReport,
    /// Seeds in which some stationary cell still has moving inputs.
    pub persisted: Vec<usize>,
    pub failures: Vec<(usize, String)>,
    /// Persistence fraction; passes when at most `max_persistence`.
    pub verdict: Verdict,
}

fn run(cfg: &StationarityConfig, field: &dyn CellField) -> Result<StationaryReport, HarnessError> {
    let net = &cfg.network;
    if cfg.x0.len() != net.layout().total_dim() {
        return Err(HarnessError::BadInitialState { expected: net.layout().total_dim(), found: cfg.x0.len() });
    }
    let traj = integrate(net, field, &cfg.x0, 0.0, cfg.t_end, &cfg.integrator)?;
    Ok(stationary_cells(net, &traj, cfg.window.0, cfg.window.1, cfg.tol_rate)?)
}

fn base_field(cfg: &StationarityConfig) -> Result<SharedField, HarnessError> {
    compile_base(&cfg.network, &cfg.base, &cfg.params)
}

/// Stationarity report for seed `seed`'s perturbation of the base field.
pub fn stationarity_trial(cfg: &StationarityConfig, seed: usize) -> Result<StationaryReport, HarnessError> {
    let base = base_field(cfg)?;
    let h = perturbation_from(&cfg.network, &cfg.family, cfg.eps, &mut stream(cfg.seed_base, seed as u64))?;
    run(cfg, &perturbed(&base, &h))
}

/// Stationarity report for the unperturbed base field.
pub fn stationarity_base(cfg: &StationarityConfig) -> Result<StationaryReport, HarnessError> {
    run(cfg, &*base_field(cfg)?)
}

/// Aggregates per-seed outcomes in seed order, whatever order they ran in.
pub fn summarize_stationarity(
    cfg: &StationarityConfig,
    base: StationaryReport,
    mut trials: Vec<(usize, Result<StationaryReport, String>)>,
) -> StationarityStats {
    trials.sort_by_key(|t| t.0);
    let mut persisted = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in trials.iter() {
        match r {
            Ok(r) if r.non_generic() => persisted.push(*seed),
            Ok(_) => {}
            Err(e) => failures.push((*seed, e.clone())),
        }
    }
    let observed = if trials.is_empty() { 0.0 } else { persisted.len() as f64 / trials.len() as f64 };
    StationarityStats {
        base,
        persisted,
        failures,
        verdict: Verdict {
            observed,
            threshold: cfg.max_persistence,
            seeds: trials.len(),
            seed_base: cfg.seed_base,
            passed: observed <= cfg.max_persistence,
        },
    }
}

/// Analyzes the base field, then counts the perturbations under which a
/// stationary cell with moving inputs survives.
pub fn stationarity_experiment(cfg: &StationarityConfig) -> Result<StationarityStats, HarnessError> {
    check_seeds(cfg.seeds)?;
    check_eps(cfg.eps)?;
    let base = stationarity_base(cfg)?;
    let trials = (0..cfg.seeds).map(|s| (s, stationarity_trial(cfg, s).map_err(|e| e.to_string()))).collect();
    Ok(summarize_stationarity(cfg, base, trials))
}
