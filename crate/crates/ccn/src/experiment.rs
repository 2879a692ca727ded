//! Experiment configuration files, the per-seed runner and result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ccn_core::field::parse_field_with;
use ccn_core::harness::{
    decay_trial, equilibrium_pattern_experiment, rigidity_probe, stationarity_base, stationarity_trial,
    summarize_decay, summarize_stationarity, DecayConfig, EquilibriumConfig, HarnessError, NewtonOptions,
    PerturbationFamily, RigidityConfig, SolutionFamily, StationarityConfig, Verdict, MIN_SEEDS,
};
use ccn_core::sim::{integrate, IntegrateOptions, Method};
use ccn_core::TypedNetwork;
use serde::{Deserialize, Serialize};

use crate::formats::{self, coloring_from_classes, state_from_map, state_map, FormatError, NetworkFile, StateMap};
use crate::parallel::map_seeds;
use crate::report::{StationarySummary, REPORT_VERSION};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("field: {0}")]
    Dsl(#[from] ccn_core::field::DslError),
    #[error("reference trajectory: {0}")]
    Reference(#[from] ccn_core::sim::SimError),
    #[error("config: {0}")]
    Config(String),
}

impl ExperimentError {
    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::Format(e) => e.code(),
            ExperimentError::Harness(HarnessError::TooFewSeeds { .. } | HarnessError::BadEpsilon(_)) => "bad-config",
            ExperimentError::Harness(HarnessError::BadInitialState { .. }) => "bad-state",
            ExperimentError::Harness(HarnessError::Dsl(_)) | ExperimentError::Dsl(_) => "dsl-error",
            ExperimentError::Harness(_) => "experiment-failed",
            ExperimentError::Reference(_) => "simulation-failed",
            ExperimentError::Config(_) => "bad-config",
        }
    }

    /// Input problems rather than runtime failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self.code(), "io" | "experiment-failed" | "simulation-failed")
    }
}

/// Where the network comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSource {
    Fixture(String),
    /// Path relative to the config file.
    File(PathBuf),
    Inline(NetworkFile),
}

/// Where the base field comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSource {
    File(PathBuf),
    Source(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub rtol: Option<f64>,
    #[serde(default)]
    pub atol: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
}

fn default_method() -> String {
    "dopri5".into()
}

impl Integrator {
    pub fn options(&self) -> Result<IntegrateOptions, ExperimentError> {
        match self.method.as_str() {
            "dopri5" => Ok(IntegrateOptions::dopri(
                self.rtol.unwrap_or(Method::DEFAULT_RTOL),
                self.atol.unwrap_or(Method::DEFAULT_ATOL),
            )),
            "rk4" => {
                let h = self.step.ok_or_else(|| ExperimentError::Config("rk4 needs a step".into()))?;
                Ok(IntegrateOptions::rk4(h))
            }
            m => Err(ExperimentError::Config(format!("unknown method {m:?}"))),
        }
    }
}

/// Perturbation family and sample. The `bump` family places `bumps` bumps
/// along the base trajectory from `reference_x0` over `[0, reference_t1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub family: String,
    pub eps: f64,
    pub seeds: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bumps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_x0: Option<StateMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_t1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    /// Same-colored cell lists; other cells get their own colors.
    pub pattern: Vec<Vec<String>>,
    pub t_end: Option<f64>,
    pub breakout: Option<f64>,
    pub threshold: Option<f64>,
    pub integrator: Option<Integrator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSpec {
    #[serde(default)]
    pub guesses: Vec<StateMap>,
    pub random_starts: Option<usize>,
    pub start_box: Option<f64>,
    pub tol: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolutionSpec {
    Equilibrium { guess: StateMap },
    Periodic { guess: StateMap, period: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigiditySpec {
    pub solution: SolutionSpec,
    pub tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub integrator: Option<Integrator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaritySpec {
    pub x0: StateMap,
    pub t_end: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub tol_rate: Option<f64>,
    pub max_persistence: Option<f64>,
    pub integrator: Option<Integrator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentKind {
    Decay(DecaySpec),
    Equilibrium(EquilibriumSpec),
    Rigidity(RigiditySpec),
    Stationarity(StationaritySpec),
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Decay(_) => "decay",
            Self::Equilibrium(_) => "equilibrium",
            Self::Rigidity(_) => "rigidity",
            Self::Stationarity(_) => "stationarity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub network: NetworkSource,
    pub field: FieldSource,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub perturbation: PerturbationSpec,
    pub experiment: ExperimentKind,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ExperimentError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(FormatError::from)?;
    if cfg.version != CONFIG_VERSION {
        return Err(FormatError::Version { kind: "experiment config", found: cfg.version }.into());
    }
    Ok(cfg)
}

/// A config with its network and field source resolved.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub network: TypedNetwork,
    pub source: String,
    pub params: Vec<(String, f64)>,
    pub family: PerturbationFamily,
}

/// Resolves files relative to `base_dir`, applies `-P` overrides and
/// `--seed`, compiles the base field once to surface errors early and
/// builds the perturbation family.
pub fn prepare(
    mut config: ExperimentConfig,
    base_dir: &Path,
    overrides: &[(String, f64)],
    seed: Option<u64>,
) -> Result<Prepared, ExperimentError> {
    let network = match &config.network {
        NetworkSource::Fixture(name) => formats::load_network(&format!("{}{name}", formats::FIXTURE_PREFIX))?,
        NetworkSource::File(p) => formats::load_network(&base_dir.join(p).to_string_lossy())?,
        NetworkSource::Inline(file) => file.to_spec().build().map_err(FormatError::from)?,
    };
    let source = match &config.field {
        FieldSource::File(p) => formats::read_text(&base_dir.join(p))?,
        FieldSource::Source(s) => s.clone(),
    };
    for (k, v) in overrides {
        config.params.insert(k.clone(), *v);
    }
    if let Some(s) = seed {
        config.perturbation.seed_base = s;
    }
    let params: Vec<(String, f64)> = config.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let refs: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let base = parse_field_with(&source, &network, &refs)?;
    let pert = &config.perturbation;
    let family = match (pert.family.as_str(), pert.bumps, &pert.reference_x0, pert.reference_t1) {
        ("dsl", None, None, None) => PerturbationFamily::DslCoefficients,
        ("bump", Some(bumps), Some(x0), Some(t1)) => {
            let x0 = state_from_map(&network, x0)?;
            let reference = integrate(&network, &base, &x0, 0.0, t1, &IntegrateOptions::default())?;
            PerturbationFamily::Bump { reference, bumps }
        }
        ("dsl", ..) => return Err(ExperimentError::Config("the dsl family takes no bump settings".into())),
        ("bump", ..) => {
            return Err(ExperimentError::Config("the bump family needs bumps, reference_x0 and reference_t1".into()))
        }
        (f, ..) => return Err(ExperimentError::Config(format!("unknown perturbation family {f:?}"))),
    };
    if config.perturbation.seeds < MIN_SEEDS && !matches!(config.experiment, ExperimentKind::Rigidity(_)) {
        return Err(HarnessError::TooFewSeeds { min: MIN_SEEDS, found: config.perturbation.seeds }.into());
    }
    Ok(Prepared { config, network, source, params, family })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub observed: f64,
    pub threshold: f64,
    pub seeds: usize,
    pub seed_base: u64,
    pub passed: bool,
}

impl From<&Verdict> for VerdictSummary {
    fn from(v: &Verdict) -> Self {
        Self { observed: v.observed, threshold: v.threshold, seeds: v.seeds, seed_base: v.seed_base, passed: v.passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub seed: usize,
    pub breakout_time: Option<f64>,
    pub max_deviation: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub state: StateMap,
    pub pattern: String,
    pub balanced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuedRow {
    pub seed: usize,
    pub equilibrium: usize,
    pub pattern: Option<String>,
    pub balanced: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: usize,
    pub flagged: bool,
    pub error: Option<String>,
}

/// Kind-specific part of the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Details {
    Decay {
        pattern: String,
        initially_balanced: bool,
        breakouts: usize,
        failures: usize,
        trials: Vec<DecayRow>,
    },
    Equilibrium {
        starts: usize,
        newton_failures: Vec<String>,
        equilibria: Vec<EquilibriumSummary>,
        unbalanced: usize,
        continued: Vec<ContinuedRow>,
    },
    Rigidity {
        base_pattern: String,
        base_balanced: bool,
        effective_seeds: usize,
        rigid: bool,
        consistent: bool,
        eps: f64,
        seeds: Vec<SeedOutcome>,
    },
    Stationarity {
        base: StationarySummary,
        non_generic: bool,
        persisted: usize,
        seeds: Vec<SeedOutcome>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub version: u32,
    pub name: Option<String>,
    pub kind: String,
    pub family: String,
    pub eps: f64,
    pub params: BTreeMap<String, f64>,
    /// `None` for rigidity probes, whose outcome is `details.rigid`.
    pub verdict: Option<VerdictSummary>,
    pub details: Details,
}

impl ExperimentResults {
    /// Whether the experiment's claim held.
    pub fn passed(&self) -> bool {
        match (&self.verdict, &self.details) {
            (Some(v), _) => v.passed,
            (None, Details::Rigidity { consistent, .. }) => *consistent,
            (None, _) => true,
        }
    }

    /// Per-seed CSV rows with a header.
    pub fn summary_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let err = |e: &Option<String>| e.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let mut s = String::new();
        match &self.details {
            Details::Decay { trials, .. } => {
                s.push_str("seed,broke_out,breakout_time,max_deviation,error\n");
                for t in trials {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{}",
                        t.seed,
                        t.breakout_time.is_some(),
                        opt(t.breakout_time),
                        t.max_deviation,
                        err(&t.error)
                    );
                }
            }
            Details::Equilibrium { continued, .. } => {
                s.push_str("seed,equilibrium,converged,balanced,pattern,error\n");
                for c in continued {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},\"{}\",{}",
                        c.seed,
                        c.equilibrium,
                        c.error.is_none(),
                        c.balanced.map_or_else(String::new, |b| b.to_string()),
                        c.pattern.as_deref().unwrap_or(""),
                        err(&c.error)
                    );
                }
            }
            Details::Rigidity { seeds, .. } | Details::Stationarity { seeds, .. } => {
                let flag = if matches!(self.details, Details::Rigidity { .. }) { "changed" } else { "persisted" };
                let _ = writeln!(s, "seed,{flag},error");
                for o in seeds {
                    let _ = writeln!(s, "{},{},{}", o.seed, o.flagged, err(&o.error));
                }
            }
        }
        s
    }

    /// Gnuplot-ready per-seed data.
    pub fn plot_data(&self) -> (Vec<String>, Vec<Vec<f64>>) {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        match &self.details {
            Details::Decay { trials, .. } => (
                vec!["seed".into(), "max_deviation".into(), "breakout_time".into()],
                trials
                    .iter()
                    .map(|t| vec![t.seed as f64, t.max_deviation, t.breakout_time.unwrap_or(f64::NAN)])
                    .collect(),
            ),
            Details::Equilibrium { continued, .. } => (
                vec!["seed".into(), "equilibrium".into(), "balanced".into()],
                continued
                    .iter()
                    .map(|c| vec![c.seed as f64, c.equilibrium as f64, c.balanced.map_or(f64::NAN, flag)])
                    .collect(),
            ),
            Details::Rigidity { seeds, .. } | Details::Stationarity { seeds, .. } => (
                vec!["seed".into(), "flagged".into()],
                seeds.iter().map(|o| vec![o.seed as f64, flag(o.flagged)]).collect(),
            ),
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{} experiment{} ({} perturbations, eps {:e})\n",
            self.kind,
            self.name.as_deref().map(|n| format!(" {n:?}")).unwrap_or_default(),
            self.family,
            self.eps
        );
        if let Some(v) = &self.verdict {
            let _ = writeln!(
                s,
                "observed {:.4} against threshold {} over {} seeds (seed base {}): {}",
                v.observed,
                v.threshold,
                v.seeds,
                v.seed_base,
                if v.passed { "PASS" } else { "FAIL" }
            );
        }
        match &self.details {
            Details::Decay { pattern, initially_balanced, breakouts, failures, .. } => {
                let _ = writeln!(
                    s,
                    "pattern {pattern} ({}): {breakouts} breakouts, {failures} failed trials",
                    if *initially_balanced { "balanced" } else { "unbalanced" }
                );
            }
            Details::Equilibrium { equilibria, unbalanced, newton_failures, .. } => {
                let _ = writeln!(
                    s,
                    "{} equilibria ({unbalanced} with unbalanced pattern, flagged non-generic), {} Newton failures",
                    equilibria.len(),
                    newton_failures.len()
                );
                for e in equilibria {
                    let _ = writeln!(s, "  {} {}", e.pattern, if e.balanced { "balanced" } else { "unbalanced" });
                }
            }
            Details::Rigidity { base_pattern, base_balanced, effective_seeds, rigid, consistent, .. } => {
                let _ = writeln!(
                    s,
                    "pattern {base_pattern} ({}) is {} over {effective_seeds} converged seeds; rigid implies balanced: {}",
                    if *base_balanced { "balanced" } else { "unbalanced" },
                    if *rigid { "rigid" } else { "not rigid" },
                    if *consistent { "PASS" } else { "FAIL" }
                );
            }
            Details::Stationarity { base, non_generic, persisted, .. } => {
                let _ = writeln!(
                    s,
                    "base: stationary {:?}, {}; persisted in {persisted} seeds",
                    base.stationary,
                    if *non_generic { "non-generic" } else { "propagation satisfied" }
                );
            }
        }
        s
    }
}

fn or<T>(v: Option<T>, default: T) -> T {
    v.unwrap_or(default)
}

fn integrator(spec: &Option<Integrator>, default: IntegrateOptions) -> Result<IntegrateOptions, ExperimentError> {
    spec.as_ref().map_or(Ok(default), Integrator::options)
}

/// Runs a prepared experiment with `jobs` worker threads. Decay and
/// stationarity seeds run in parallel; the other kinds run serially. The
/// results do not depend on `jobs`.
pub fn run(p: &Prepared, jobs: usize) -> Result<ExperimentResults, ExperimentError> {
    let net = &p.network;
    let pert = &p.config.perturbation;
    let details;
    let verdict;
    match &p.config.experiment {
        ExperimentKind::Decay(spec) => {
            let pattern = coloring_from_classes(net, &spec.pattern)?;
            let mut cfg = DecayConfig::new(net.clone(), &p.source, pattern.clone());
            cfg.params = p.params.clone();
            cfg.family = p.family.clone();
            cfg.eps = pert.eps;
            cfg.seeds = pert.seeds;
            cfg.seed_base = pert.seed_base;
            cfg.t_end = or(spec.t_end, cfg.t_end);
            cfg.breakout = or(spec.breakout, cfg.breakout);
            cfg.threshold = or(spec.threshold, cfg.threshold);
            cfg.integrator = integrator(&spec.integrator, cfg.integrator)?;
            let trials = map_seeds(cfg.seeds, jobs, |s| decay_trial(&cfg, s));
            let stats = summarize_decay(&cfg, trials)?;
            verdict = Some((&stats.verdict).into());
            details = Details::Decay {
                pattern: pattern.describe(net),
                initially_balanced: stats.initially_balanced,
                breakouts: stats.breakouts,
                failures: stats.failures,
                trials: stats
                    .trials
                    .iter()
                    .map(|t| DecayRow {
                        seed: t.seed,
                        breakout_time: t.breakout_time,
                        max_deviation: t.max_deviation,
                        error: t.error.clone(),
                    })
                    .collect(),
            };
        }
        ExperimentKind::Equilibrium(spec) => {
            let mut cfg = EquilibriumConfig::new(net.clone(), &p.source);
            cfg.params = p.params.clone();
            cfg.family = p.family.clone();
            cfg.eps = pert.eps;
            cfg.seeds = pert.seeds;
            cfg.seed_base = pert.seed_base;
            cfg.guesses = spec.guesses.iter().map(|g| state_from_map(net, g)).collect::<Result<_, _>>()?;
            cfg.random_starts = or(spec.random_starts, cfg.random_starts);
            cfg.start_box = or(spec.start_box, cfg.start_box);
            cfg.tol = or(spec.tol, cfg.tol);
            cfg.threshold = or(spec.threshold, cfg.threshold);
            let stats = equilibrium_pattern_experiment(&cfg)?;
            verdict = Some((&stats.verdict).into());
            details = Details::Equilibrium {
                starts: stats.starts,
                newton_failures: stats.failures.clone(),
                equilibria: stats
                    .equilibria
                    .iter()
                    .map(|e| EquilibriumSummary {
                        state: state_map(net, &e.state),
                        pattern: e.pattern.describe(net),
                        balanced: e.balanced,
                    })
                    .collect(),
                unbalanced: stats.unbalanced,
                continued: stats
                    .continued
                    .iter()
                    .map(|c| match &c.result {
                        Ok(r) => ContinuedRow {
                            seed: c.seed,
                            equilibrium: c.equilibrium,
                            pattern: Some(r.pattern.describe(net)),
                            balanced: Some(r.balanced),
                            error: None,
                        },
                        Err(e) => ContinuedRow {
                            seed: c.seed,
                            equilibrium: c.equilibrium,
                            pattern: None,
                            balanced: None,
                            error: Some(e.clone()),
                        },
                    })
                    .collect(),
            };
        }
        ExperimentKind::Rigidity(spec) => {
            let solution = match &spec.solution {
                SolutionSpec::Equilibrium { guess } => SolutionFamily::Equilibrium { guess: state_from_map(net, guess)? },
                SolutionSpec::Periodic { guess, period } => {
                    SolutionFamily::Periodic { guess: state_from_map(net, guess)?, period: *period }
                }
            };
            let mut cfg = RigidityConfig::new(net.clone(), &p.source, solution);
            cfg.params = p.params.clone();
            cfg.family = p.family.clone();
            cfg.eps = pert.eps;
            cfg.seeds = pert.seeds;
            cfg.seed_base = pert.seed_base;
            cfg.tol = or(spec.tol, cfg.tol);
            cfg.newton = NewtonOptions { tol: or(spec.newton_tol, cfg.newton.tol), ..cfg.newton };
            cfg.integrator = integrator(&spec.integrator, cfg.integrator)?;
            let v = rigidity_probe(&cfg)?;
            verdict = None;
            let seeds = (0..cfg.seeds)
                .map(|s| SeedOutcome {
                    seed: s,
                    flagged: v.changed.contains(&s),
                    error: v.failures.iter().find(|f| f.0 == s).map(|f| f.1.clone()),
                })
                .collect();
            details = Details::Rigidity {
                base_pattern: v.base_pattern.describe(net),
                base_balanced: v.base_balanced,
                effective_seeds: v.effective_seeds,
                rigid: v.rigid,
                consistent: v.consistent(),
                eps: v.eps,
                seeds,
            };
        }
        ExperimentKind::Stationarity(spec) => {
            let x0 = state_from_map(net, &spec.x0)?;
            let mut cfg = StationarityConfig::new(net.clone(), &p.source, x0);
            cfg.params = p.params.clone();
            cfg.family = p.family.clone();
            cfg.eps = pert.eps;
            cfg.seeds = pert.seeds;
            cfg.seed_base = pert.seed_base;
            cfg.t_end = or(spec.t_end, cfg.t_end);
            cfg.window = or(spec.window, (0.0, cfg.t_end));
            cfg.tol_rate = or(spec.tol_rate, cfg.tol_rate);
            cfg.max_persistence = or(spec.max_persistence, cfg.max_persistence);
            cfg.integrator = integrator(&spec.integrator, cfg.integrator)?;
            let base = stationarity_base(&cfg)?;
            let trials =
                map_seeds(cfg.seeds, jobs, |s| (s, stationarity_trial(&cfg, s).map_err(|e| e.to_string())));
            let outcomes: Vec<SeedOutcome> = trials
                .iter()
                .map(|(s, r)| SeedOutcome {
                    seed: *s,
                    flagged: r.as_ref().is_ok_and(|r| r.non_generic()),
                    error: r.as_ref().err().cloned(),
                })
                .collect();
            let stats = summarize_stationarity(&cfg, base, trials);
            verdict = Some((&stats.verdict).into());
            details = Details::Stationarity {
                base: StationarySummary::new(net, &stats.base),
                non_generic: stats.base.non_generic(),
                persisted: stats.persisted.len(),
                seeds: outcomes,
            };
        }
    }
    Ok(ExperimentResults {
        version: REPORT_VERSION,
        name: p.config.name.clone(),
        kind: p.config.experiment.name().into(),
        family: p.family.name().into(),
        eps: pert.eps,
        params: p.config.params.clone(),
        verdict,
        details,
    })
}
