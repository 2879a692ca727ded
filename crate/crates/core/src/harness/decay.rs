//! Breakout of synchrony under random admissible perturbations.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    check_eps, check_seeds, compile_base, perturbation_from, perturbed, random_state_on, HarnessError, PerturbationFamily, Verdict,
    DEFAULT_BREAKOUT, DEFAULT_THRESHOLD,
};
use crate::coloring::{is_balanced, Coloring};
use crate::field::SharedField;
use crate::network::TypedNetwork;
use crate::rng::stream;
use crate::sim::{integrate, same_color_deviation, IntegrateOptions};

#[derive(Clone, Debug)]
pub struct DecayConfig {
    pub network: TypedNetwork,
    /// DSL source of the base field.
    pub base: String,
    /// Overrides of `param` values in the base source.
    pub params: Vec<(String, f64)>,
    /// Pattern whose synchrony space holds the initial states.
    pub pattern: Coloring,
    pub family: PerturbationFamily,
    pub eps: f64,
    pub seeds: usize,
    pub seed_base: u64,
    pub t_end: f64,
    /// Same-color deviation counted as a breakout.
    pub breakout: f64,
    /// Fraction of seeds that must break out.
    pub threshold: f64,
    pub integrator: IntegrateOptions,
}

impl DecayConfig {
    pub fn new(network: TypedNetwork, base: &str, pattern: Coloring) -> Self {
        Self {
            network,
            base: base.into(),
            params: Vec::new(),
            pattern,
            family: PerturbationFamily::DslCoefficients,
            eps: 1e-2,
            seeds: 100,
            seed_base: 0,
            t_end: 10.0,
            breakout: DEFAULT_BREAKOUT,
            threshold: DEFAULT_THRESHOLD,
            integrator: IntegrateOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTrial {
    pub seed: usize,
    /// First stored time at which the same-color deviation exceeded the
    /// breakout level.
    pub breakout_time: Option<f64>,
    pub max_deviation: f64,
    /// Integration or perturbation failure; the trial then counts as no
    /// breakout.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayStats {
    pub trials: Vec<DecayTrial>,
    pub breakouts: usize,
    pub failures: usize,
    pub initially_balanced: bool,
    /// Breakout fraction: at least the configured threshold for an
    /// unbalanced pattern, exactly 0 for a balanced one.
    pub verdict: Verdict,
}

impl DecayStats {
    pub fn fraction(&self) -> f64 {
        self.verdict.observed
    }

    pub fn breakout_times(&self) -> Vec<f64> {
        self.trials.iter().filter_map(|t| t.breakout_time).collect()
    }
}

fn base_field(cfg: &DecayConfig) -> Result<SharedField, HarnessError> {
    compile_base(&cfg.network, &cfg.base, &cfg.params)
}

/// Runs seed `seed`: perturbs the base field, starts on the synchrony space
/// of the pattern and records when the pattern breaks.
pub fn decay_trial(cfg: &DecayConfig, seed: usize) -> DecayTrial {
    match run_trial(cfg, seed) {
        Ok(t) => t,
        Err(e) => DecayTrial { seed, breakout_time: None, max_deviation: 0.0, error: Some(e.to_string()) },
    }
}

fn run_trial(cfg: &DecayConfig, seed: usize) -> Result<DecayTrial, HarnessError> {
    let net = &cfg.network;
    let base = base_field(cfg)?;
    let mut rng = stream(cfg.seed_base, seed as u64);
    let h = perturbation_from(net, &cfg.family, cfg.eps, &mut rng)?;
    let field = perturbed(&base, &h);
    let x0 = random_state_on(net, &cfg.pattern, &mut rng)?;
    let traj = integrate(net, &field, &x0, 0.0, cfg.t_end, &cfg.integrator)?;
    let mut trial = DecayTrial { seed, breakout_time: None, max_deviation: 0.0, error: None };
    for i in 0..traj.len() {
        let dev = same_color_deviation(net, &cfg.pattern, traj.state(i));
        trial.max_deviation = trial.max_deviation.max(dev);
        if dev > cfg.breakout && trial.breakout_time.is_none() {
            trial.breakout_time = Some(traj.times()[i]);
        }
    }
    Ok(trial)
}

/// Aggregates trials in seed order, whatever order they ran in.
pub fn summarize_decay(cfg: &DecayConfig, mut trials: Vec<DecayTrial>) -> Result<DecayStats, HarnessError> {
    trials.sort_by_key(|t| t.seed);
    let breakouts = trials.iter().filter(|t| t.breakout_time.is_some()).count();
    let failures = trials.iter().filter(|t| t.error.is_some()).count();
    let observed = if trials.is_empty() { 0.0 } else { breakouts as f64 / trials.len() as f64 };
    let initially_balanced = is_balanced(&cfg.network, &cfg.pattern)?.is_balanced();
    let (threshold, passed) = if initially_balanced {
        (0.0, breakouts == 0 && failures == 0)
    } else {
        (cfg.threshold, observed >= cfg.threshold)
    };
    Ok(DecayStats {
        breakouts,
        failures,
        initially_balanced,
        verdict: Verdict { observed, threshold, seeds: trials.len(), seed_base: cfg.seed_base, passed },
        trials,
    })
}

/// Breakout statistics over `cfg.seeds` seeds. Success means a breakout
/// fraction of at least `cfg.threshold` for an unbalanced pattern and no
/// breakout at all for a balanced one.
pub fn unbalanced_decay_experiment(cfg: &DecayConfig) -> Result<DecayStats, HarnessError> {
    check_seeds(cfg.seeds)?;
    check_eps(cfg.eps)?;
    base_field(cfg)?;
    let trials = (0..cfg.seeds).map(|s| decay_trial(cfg, s)).collect();
    summarize_decay(cfg, trials)
}
