//! Statistical experiments: random admissible perturbations destroy
//! unbalanced synchrony, keep balanced synchrony, and leave rigid patterns
//! balanced.
//!
//! A generic property is replaced by "holds for a fraction of random
//! perturbations at least `threshold`". Every stochastic quantity of seed `i`
//! comes from stream `i` of the family keyed by `seed_base`, so trials can run
//! in any order or in parallel and still reproduce bit-for-bit.

mod decay;
mod equilibrium;
mod generate;
mod newton;
mod stationarity;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

pub use decay::{decay_trial, summarize_decay, unbalanced_decay_experiment, DecayConfig, DecayStats, DecayTrial};
pub use equilibrium::{
    equilibrium_pattern_experiment, rigidity_probe, EquilibriumConfig, EquilibriumRecord, EquilibriumStats,
    RigidityConfig, RigidityVerdict, SolutionFamily,
};
pub use generate::{random_contractive_source, random_perturbation_source};
pub use newton::{find_equilibrium, find_periodic_orbit, NewtonError, NewtonOptions, PeriodicOrbit};
pub use stationarity::{
    stationarity_base, stationarity_experiment, stationarity_trial, summarize_stationarity, StationarityConfig,
    StationarityStats,
};

use crate::analyze::AnalyzeError;
use crate::coloring::{Coloring, ColoringError};
use crate::field::{
    check_admissibility, parse_field, parse_field_with, symmetrize, AdmissibilityReport, BumpBasis, BumpError, BumpFunction,
    CurveSegment, DslError, FieldError, RawFunction, SharedField, SumField,
};
use crate::network::{input_isomorphisms, CellId, TypedNetwork};
use crate::rng::{stream, uniform, StreamRng};
use crate::sim::{SimError, Trajectory};
use crate::state::sup_norm;

/// Default fraction of seeds that must show a generic outcome.
pub const DEFAULT_THRESHOLD: f64 = 0.95;
/// Same-color deviation above which synchrony counts as broken.
pub const DEFAULT_BREAKOUT: f64 = 1e-3;
/// Samples and tolerance of the admissibility check run on every
/// perturbation.
pub const ADMISSIBILITY_SAMPLES: usize = 100;
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bump(#[from] BumpError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("perturbation failed certification: {0}")]
    Certification(String),
    #[error("perturbation size must be non-negative and finite, got {0}")]
    BadEpsilon(f64),
    #[error("a statistical verdict needs at least {min} seeds, got {found}")]
    TooFewSeeds { min: usize, found: usize },
    #[error("cells of one color have different dimensions")]
    MixedDimensions,
    #[error("initial state length {found} does not match the network ({expected})")]
    BadInitialState { expected: usize, found: usize },
}

/// Fewest seeds accepted for a statistical verdict.
pub const MIN_SEEDS: usize = 30;

fn check_seeds(seeds: usize) -> Result<(), HarnessError> {
    if seeds < MIN_SEEDS {
        return Err(HarnessError::TooFewSeeds { min: MIN_SEEDS, found: seeds });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<(), HarnessError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(HarnessError::BadEpsilon(eps));
    }
    Ok(())
}

/// Compiles the base field of an experiment with parameter overrides.
fn compile_base(net: &TypedNetwork, src: &str, params: &[(String, f64)]) -> Result<SharedField, HarnessError> {
    let overrides: Vec<(&str, f64)> = params.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    Ok(Arc::new(parse_field_with(src, net, &overrides)?))
}

/// Outcome of a statistical claim, with what is needed to reproduce it.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub observed: f64,
    pub threshold: f64,
    pub seeds: usize,
    pub seed_base: u64,
    pub passed: bool,
}

/// How random perturbations are drawn.
#[derive(Clone, Debug)]
pub enum PerturbationFamily {
    /// Random bounded DSL terms: certified supremum norm.
    DslCoefficients,
    /// Symmetrized bump functions centred along the input tuples of each
    /// class representative on a reference trajectory: certified C¹ norm.
    Bump { reference: Trajectory, bumps: usize },
}

impl PerturbationFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DslCoefficients => "dsl",
            Self::Bump { .. } => "bump",
        }
    }
}

/// A random admissible field with its certified size.
#[derive(Clone)]
pub struct Perturbation {
    pub field: SharedField,
    /// Certified bound on the supremum norm.
    pub sup_bound: f64,
    /// Certified bound on the C¹ norm, when the family provides one.
    pub c1_bound: Option<f64>,
    pub admissibility: AdmissibilityReport,
    /// DSL source of the perturbation, for the coefficient family.
    pub source: Option<String>,
}

impl core::fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Perturbation")
            .field("sup_bound", &self.sup_bound)
            .field("c1_bound", &self.c1_bound)
            .field("admissibility", &self.admissibility)
            .finish_non_exhaustive()
    }
}

/// Draws a perturbation of size at most `eps` from stream 0 of `seed`.
pub fn random_admissible_perturbation(
    net: &TypedNetwork,
    family: &PerturbationFamily,
    eps: f64,
    seed: u64,
) -> Result<Perturbation, HarnessError> {
    perturbation_from(net, family, eps, &mut stream(seed, 0))
}

/// Draws a perturbation of size at most `eps` from `rng`, and verifies its
/// admissibility before returning it.
pub fn perturbation_from(
    net: &TypedNetwork,
    family: &PerturbationFamily,
    eps: f64,
    rng: &mut StreamRng,
) -> Result<Perturbation, HarnessError> {
    check_eps(eps)?;
    let (field, sup_bound, c1_bound, source): (SharedField, f64, Option<f64>, Option<String>) = match family {
        PerturbationFamily::DslCoefficients => {
            let (src, bound) = random_perturbation_source(net, eps, rng);
            (Arc::new(parse_field(&src, net)?), bound, None, Some(src))
        }
        PerturbationFamily::Bump { reference, bumps } => {
            let (field, sup, c1) = bump_perturbation(net, reference, *bumps, eps, rng)?;
            (field, sup, Some(c1), None)
        }
    };
    if sup_bound > eps || c1_bound.is_some_and(|c| c > eps) {
        return Err(HarnessError::Certification(alloc::format!(
            "bounds sup {sup_bound:e}, C1 {c1_bound:?} exceed {eps:e}"
        )));
    }
    let admissibility = check_admissibility(net, &*field, ADMISSIBILITY_SAMPLES, ADMISSIBILITY_TOL, rng)?;
    if !admissibility.passed() {
        return Err(HarnessError::Certification(alloc::format!(
            "admissibility violation {:e}",
            admissibility.max_violation
        )));
    }
    Ok(Perturbation { field, sup_bound, c1_bound, admissibility, source })
}

/// One symmetrized bump term: `Σ_{γ ∈ B(c,c)} φ(γ* x) · y` on the class of
/// `cell`.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpTerm {
    pub cell: CellId,
    pub bump: BumpFunction,
    pub direction: Vec<f64>,
    /// `|B(c, c)|`.
    pub symmetries: usize,
}

impl BumpTerm {
    /// Certified bound on the supremum norm of the symmetrized term.
    pub fn sup_bound(&self) -> f64 {
        self.symmetries as f64 * self.bump.sup_norm() * sup_norm(&self.direction)
    }

    /// Certified bound on the C¹ norm of the symmetrized term.
    pub fn c1_bound(&self) -> f64 {
        self.symmetries as f64 * self.bump.c1_bound() * sup_norm(&self.direction)
    }
}

/// Random bump terms, one per input-isomorphism class, along the input
/// tuples of the class representative on `reference`, with
/// `|B(c,c)| · max|z_n| · |y|∞ ≤ eps`.
pub fn bump_terms(
    net: &TypedNetwork,
    reference: &Trajectory,
    bumps: usize,
    eps: f64,
    rng: &mut StreamRng,
) -> Result<Vec<BumpTerm>, HarnessError> {
    if reference.layout() != net.layout() {
        return Err(HarnessError::Analyze(AnalyzeError::LayoutMismatch));
    }
    let classes = net.input_classes();
    let mut seen = Vec::new();
    let mut terms = Vec::new();
    for c in net.cells() {
        if seen.contains(&classes[c.index()]) {
            continue;
        }
        seen.push(classes[c.index()]);
        let tails: Vec<CellId> = net.input_arrows(c).iter().map(|&a| net.tail(a)).collect();
        let points: Vec<Vec<f64>> = (0..reference.len())
            .map(|i| tails.iter().flat_map(|&t| reference.cell_state(i, t).iter().copied()).collect())
            .collect();
        let segment = CurveSegment::new(reference.times().to_vec(), points)?;
        let basis = BumpBasis::along(&segment, bumps)?;
        let symmetries = input_isomorphisms(net, c, c).expect("cell of the network").len();
        let zmax = eps / symmetries as f64;
        let coefficients: Vec<f64> = (0..bumps).map(|_| zmax * uniform(rng, -1.0, 1.0)).collect();
        let direction: Vec<f64> = (0..net.dim(c)).map(|_| uniform(rng, -1.0, 1.0)).collect();
        terms.push(BumpTerm { cell: c, bump: BumpFunction { basis, coefficients }, direction, symmetries });
    }
    Ok(terms)
}

fn bump_perturbation(
    net: &TypedNetwork,
    reference: &Trajectory,
    bumps: usize,
    eps: f64,
    rng: &mut StreamRng,
) -> Result<(SharedField, f64, f64), HarnessError> {
    let terms = bump_terms(net, reference, bumps, eps, rng)?;
    let sup = terms.iter().map(BumpTerm::sup_bound).fold(0.0, f64::max);
    let c1 = terms.iter().map(BumpTerm::c1_bound).fold(0.0, f64::max);
    let raw = terms
        .into_iter()
        .map(|t| (t.cell, Box::new(t.bump) as Box<dyn RawFunction>, t.direction))
        .collect();
    Ok((Arc::new(symmetrize(net, raw)?), sup, c1))
}

/// `base + h`.
pub fn perturbed(base: &SharedField, h: &Perturbation) -> SumField {
    SumField { parts: alloc::vec![base.clone(), h.field.clone()] }
}

/// A state on the synchrony space of `pattern`: one random value per color,
/// drawn uniformly from `[-1, 1]`.
pub fn random_state_on(net: &TypedNetwork, pattern: &Coloring, rng: &mut StreamRng) -> Result<Vec<f64>, HarnessError> {
    let layout = net.layout();
    let mut values: Vec<Option<Vec<f64>>> = alloc::vec![None; pattern.num_colors()];
    let mut x = alloc::vec![0.0; layout.total_dim()];
    for c in net.cells() {
        let slot = &mut values[pattern.color(c)];
        let v = slot.get_or_insert_with(|| (0..net.dim(c)).map(|_| uniform(rng, -1.0, 1.0)).collect());
        if v.len() != net.dim(c) {
            return Err(HarnessError::MixedDimensions);
        }
        layout.cell_mut(&mut x, c).copy_from_slice(v);
    }
    Ok(x)
}

#[cfg(test)]
mod tests;
