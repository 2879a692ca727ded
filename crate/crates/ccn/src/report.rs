//! Versioned JSON reports and their table renderings.

use std::fmt::Write as _;

use ccn_core::analyze::{
    CellPeriod, PatternReport, PatternWindow, PeriodicityReport, PhaseShiftReport, StationaryReport,
    WindowDecomposition,
};
use ccn_core::coloring::BalancednessCertificate;
use ccn_core::network::{InputIsomorphism, ValidationReport};
use ccn_core::sim::DerivativeSource;
use ccn_core::{CellId, Coloring, Trajectory, TypedNetwork};
use serde::{Deserialize, Serialize};

use crate::formats::{ColoringFile, NetworkFile, StateMap};

pub const REPORT_VERSION: u32 = 1;

/// JSON has no infinities; they are written as `null`.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

fn pair(net: &TypedNetwork, (a, b): (CellId, CellId)) -> [String; 2] {
    [net.cell_name(a).into(), net.cell_name(b).into()]
}

fn names(net: &TypedNetwork, cells: &[CellId]) -> Vec<String> {
    cells.iter().map(|&c| net.cell_name(c).into()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub version: u32,
    pub valid: bool,
    pub violations: Vec<Issue>,
}

impl ValidateReport {
    pub fn new(report: &ValidationReport) -> Self {
        let violations =
            report.violations.iter().map(|v| Issue { code: v.code().into(), message: v.to_string() }).collect();
        Self { version: REPORT_VERSION, valid: report.is_valid(), violations }
    }

    pub fn table(&self) -> String {
        if self.valid {
            return "valid\n".into();
        }
        let mut s = format!("invalid: {} violation(s)\n", self.violations.len());
        for v in &self.violations {
            let _ = writeln!(s, "  [{}] {}", v.code, v.message);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsomorphismSet {
    pub source: String,
    pub target: String,
    /// Each map lists `[arrow, image]` pairs in input order.
    pub maps: Vec<Vec<[String; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsomorphismsReport {
    pub version: u32,
    pub include_internal: bool,
    pub sets: Vec<IsomorphismSet>,
}

impl IsomorphismsReport {
    pub fn new(
        net: &TypedNetwork,
        sets: &[(CellId, CellId, Vec<InputIsomorphism>)],
        include_internal: bool,
    ) -> Self {
        let sets = sets
            .iter()
            .map(|(c, c2, isos)| IsomorphismSet {
                source: net.cell_name(*c).into(),
                target: net.cell_name(*c2).into(),
                maps: isos
                    .iter()
                    .map(|b| {
                        net.input_arrows(*c)
                            .iter()
                            .zip(&b.images)
                            .filter(|(a, _)| include_internal || !net.is_internal(**a))
                            .map(|(&a, &i)| [net.arrow_name(a).into(), net.arrow_name(i).into()])
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Self { version: REPORT_VERSION, include_internal, sets }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        for set in &self.sets {
            let _ = writeln!(s, "B({}, {}): {} isomorphism(s)", set.source, set.target, set.maps.len());
            for m in &set.maps {
                let parts: Vec<String> = m.iter().map(|[a, b]| format!("{a}->{b}")).collect();
                let _ = writeln!(s, "  {}", parts.join(" "));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringEntry {
    /// Non-trivial classes, e.g. `{1⋈3, 2⋈4}`.
    pub classes: String,
    pub coloring: ColoringFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringsReport {
    pub version: u32,
    pub method: String,
    pub colorings: Vec<ColoringEntry>,
    /// `[finer, coarser]` index pairs of the Hasse diagram.
    pub finer_than: Vec<[usize; 2]>,
}

impl ColoringsReport {
    pub fn new(net: &TypedNetwork, method: &str, colorings: &[Coloring], edges: &[(usize, usize)]) -> Self {
        Self {
            version: REPORT_VERSION,
            method: method.into(),
            colorings: colorings
                .iter()
                .map(|c| ColoringEntry { classes: c.describe(net), coloring: ColoringFile::new(net, c) })
                .collect(),
            finer_than: edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// Numbered list followed by the finer-than order in DOT syntax.
    pub fn table(&self) -> String {
        let mut s = format!("{} balanced coloring(s)\n", self.colorings.len());
        for (i, c) in self.colorings.iter().enumerate() {
            let _ = writeln!(s, "{i:>3}  {}", c.classes);
        }
        s.push_str("digraph finer_than {\n");
        for (i, c) in self.colorings.iter().enumerate() {
            let _ = writeln!(s, "  {i} [label=\"{}\"];", c.classes);
        }
        for [a, b] in &self.finer_than {
            let _ = writeln!(s, "  {a} -> {b};");
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub version: u32,
    pub coloring: String,
    pub network: NetworkFile,
    /// Quotient cell of each original cell.
    pub projection: std::collections::BTreeMap<String, String>,
}

impl QuotientReport {
    pub fn table(&self) -> String {
        let mut s = format!(
            "quotient by {}: {} cell(s), {} arrow(s)\n",
            self.coloring,
            self.network.cells.len(),
            self.network.arrows.len()
        );
        for (c, q) in &self.projection {
            let _ = writeln!(s, "  {c} -> {q}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub version: u32,
    pub method: String,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub field_evaluations: usize,
    pub final_state: StateMap,
}

impl SimulateReport {
    pub fn new(net: &TypedNetwork, traj: &Trajectory) -> Self {
        Self {
            version: REPORT_VERSION,
            method: traj.meta.method.into(),
            t0: traj.t0(),
            t1: traj.t1(),
            samples: traj.len(),
            steps_accepted: traj.meta.steps_accepted,
            steps_rejected: traj.meta.steps_rejected,
            field_evaluations: traj.meta.field_evaluations,
            final_state: crate::formats::state_map(net, traj.final_state()),
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{} on [{}, {}]: {} samples, {} steps accepted, {} rejected, {} field evaluations\nfinal state:\n",
            self.method, self.t0, self.t1, self.samples, self.steps_accepted, self.steps_rejected, self.field_evaluations
        );
        for (c, v) in &self.final_state {
            let _ = writeln!(s, "  {c} = {}", serde_json::to_string(v).expect("serializable"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub cells: [String; 2],
    pub same_color: bool,
    pub max_distance: Option<f64>,
    pub min_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub sigma: f64,
    pub tau: f64,
    pub samples: usize,
    pub resolution: f64,
    pub classes: String,
    pub pattern: ColoringFile,
    pub balanced: bool,
    /// For an unbalanced pattern: two same-colored cells without a
    /// color-preserving isomorphism.
    pub unbalanced_witness: Option<[String; 2]>,
    pub max_same_color_deviation: f64,
    pub min_separation: Option<f64>,
    pub ambiguous: Vec<[String; 2]>,
    pub pairs: Vec<PairDistance>,
}

impl PatternSummary {
    pub fn new(net: &TypedNetwork, r: &PatternReport) -> Self {
        let unbalanced_witness = match &r.certificate {
            BalancednessCertificate::Unbalanced { cells, .. } => Some(pair(net, *cells)),
            BalancednessCertificate::Balanced { .. } => None,
        };
        Self {
            sigma: r.sigma,
            tau: r.tau,
            samples: r.samples,
            resolution: r.resolution,
            classes: r.pattern.describe(net),
            pattern: ColoringFile::new(net, &r.pattern),
            balanced: r.is_balanced(),
            unbalanced_witness,
            max_same_color_deviation: r.max_same_color_deviation,
            min_separation: finite(r.min_separation),
            ambiguous: r.ambiguous.iter().map(|&p| pair(net, p)).collect(),
            pairs: r
                .pairs
                .iter()
                .map(|p| PairDistance {
                    cells: pair(net, (p.a, p.b)),
                    same_color: p.same_color,
                    max_distance: finite(p.max_distance),
                    min_distance: finite(p.min_distance),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    pub classes: String,
    pub pattern: ColoringFile,
    pub balanced: bool,
    pub semicontinuous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolatedTime {
    pub t: f64,
    pub classes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowsSummary {
    pub windows: Vec<WindowSummary>,
    pub isolated: Vec<IsolatedTime>,
    pub semicontinuity_ok: bool,
}

impl WindowsSummary {
    pub fn new(net: &TypedNetwork, d: &WindowDecomposition) -> Self {
        let window = |w: &PatternWindow| WindowSummary {
            from: w.from,
            to: w.to,
            samples: w.samples,
            classes: w.pattern.describe(net),
            pattern: ColoringFile::new(net, &w.pattern),
            balanced: ccn_core::coloring::is_balanced(net, &w.pattern).is_ok_and(|c| c.is_balanced()),
            semicontinuous: w.semicontinuous,
        };
        Self {
            windows: d.windows.iter().map(window).collect(),
            isolated: d.isolated.iter().map(|(t, c)| IsolatedTime { t: *t, classes: c.describe(net) }).collect(),
            semicontinuity_ok: d.semicontinuity_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarySummary {
    pub sigma: f64,
    pub tau: f64,
    pub samples: usize,
    pub derivatives: String,
    pub max_rates: std::collections::BTreeMap<String, f64>,
    pub stationary: Vec<String>,
    /// `[cell, input]`: a stationary cell whose input moves.
    pub violations: Vec<[String; 2]>,
    pub propagation_satisfied: bool,
}

pub fn derivative_source_name(d: DerivativeSource) -> &'static str {
    match d {
        DerivativeSource::Field => "field",
        DerivativeSource::FiniteDifference => "finite-difference",
    }
}

impl StationarySummary {
    pub fn new(net: &TypedNetwork, r: &StationaryReport) -> Self {
        Self {
            sigma: r.sigma,
            tau: r.tau,
            samples: r.samples,
            derivatives: derivative_source_name(r.derivatives).into(),
            max_rates: net.cells().map(|c| (net.cell_name(c).to_string(), r.max_rates[c.index()])).collect(),
            stationary: names(net, &r.stationary),
            violations: r.violations.iter().map(|&p| pair(net, p)).collect(),
            propagation_satisfied: r.propagation_satisfied(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PeriodSummary {
    Constant,
    Periodic { period: f64, correlation: f64 },
    Aperiodic,
}

impl From<&CellPeriod> for PeriodSummary {
    fn from(p: &CellPeriod) -> Self {
        match *p {
            CellPeriod::Constant => Self::Constant,
            CellPeriod::Periodic { period, correlation } => Self::Periodic { period, correlation },
            CellPeriod::Aperiodic => Self::Aperiodic,
        }
    }
}

impl PeriodSummary {
    fn short(&self) -> String {
        match self {
            Self::Constant => "constant".into(),
            Self::Periodic { period, .. } => format!("{period:.6}"),
            Self::Aperiodic => "aperiodic".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationSummary {
    pub cell: String,
    pub period: f64,
    pub input: String,
    pub input_period: PeriodSummary,
    pub multiple: Option<usize>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicitySummary {
    pub cells: std::collections::BTreeMap<String, PeriodSummary>,
    pub checks: Vec<PropagationSummary>,
    pub whole_state: Option<PeriodSummary>,
    pub whole_state_consistent: Option<bool>,
    pub holds: bool,
}

impl PeriodicitySummary {
    pub fn new(net: &TypedNetwork, r: &PeriodicityReport) -> Self {
        Self {
            cells: net.cells().map(|c| (net.cell_name(c).to_string(), (&r.cells[c.index()]).into())).collect(),
            checks: r
                .checks
                .iter()
                .map(|k| PropagationSummary {
                    cell: net.cell_name(k.cell).into(),
                    period: k.period,
                    input: net.cell_name(k.input).into(),
                    input_period: (&k.input_period).into(),
                    multiple: k.multiple,
                    holds: k.holds(),
                })
                .collect(),
            whole_state: r.whole_state.as_ref().map(Into::into),
            whole_state_consistent: r.whole_state_consistent,
            holds: r.holds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub theta: f64,
    /// Unordered pairs related by the shift.
    pub pairs: Vec<[String; 2]>,
    /// Ordered `[c, c2]` with `x_c(t) = x_c2(t + θ)`.
    pub relations: Vec<[String; 2]>,
    pub self_related: Vec<String>,
    pub base_pattern: String,
    pub doubled_pattern: PatternSummary,
    pub doubled_balanced: bool,
    pub rigid_phase_violations: Vec<[String; 2]>,
    pub non_generic: bool,
}

impl PhaseSummary {
    pub fn new(net: &TypedNetwork, r: &PhaseShiftReport) -> Self {
        Self {
            theta: r.theta,
            pairs: r.pairs().into_iter().map(|p| pair(net, p)).collect(),
            relations: r.relations.iter().map(|&p| pair(net, p)).collect(),
            self_related: names(net, &r.self_related),
            base_pattern: r.base_pattern.describe(net),
            doubled_pattern: PatternSummary::new(&r.doubled.network, &r.doubled_pattern),
            doubled_balanced: r.doubled_balanced(),
            rigid_phase_violations: r.rigid_phase_violations.iter().map(|&p| pair(net, p)).collect(),
            non_generic: r.non_generic(),
        }
    }
}

/// A section that may fail independently of the rest of the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section<T> {
    Ok(T),
    Error(String),
}

impl<T> Section<T> {
    pub fn from_result<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Self::Ok(v),
            Err(e) => Self::Error(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub version: u32,
    pub tol: f64,
    pub tol_rate: f64,
    pub derivatives: String,
    pub pattern: PatternSummary,
    pub windows: Section<WindowsSummary>,
    pub stationary: StationarySummary,
    pub periodicity: Section<PeriodicitySummary>,
    pub phase: Option<Section<PhaseSummary>>,
}

impl AnalyzeReport {
    pub fn table(&self) -> String {
        let p = &self.pattern;
        let mut s = format!(
            "interval [{}, {}], {} samples, tol {:e}\npattern {} ({})\n  max same-color deviation {:.3e}, min separation {}\n",
            p.sigma,
            p.tau,
            p.samples,
            self.tol,
            p.classes,
            if p.balanced { "balanced" } else { "unbalanced" },
            p.max_same_color_deviation,
            fmt_opt(p.min_separation),
        );
        if !p.ambiguous.is_empty() {
            let amb: Vec<String> = p.ambiguous.iter().map(|[a, b]| format!("{a}~{b}")).collect();
            let _ = writeln!(s, "  ambiguous pairs: {}", amb.join(" "));
        }
        match &self.windows {
            Section::Ok(w) => {
                let _ = writeln!(
                    s,
                    "constant-pattern windows: {} (semicontinuity {})",
                    w.windows.len(),
                    if w.semicontinuity_ok { "ok" } else { "violated" }
                );
                for w in &w.windows {
                    let _ = writeln!(
                        s,
                        "  [{:.6}, {:.6}] {} {}",
                        w.from,
                        w.to,
                        w.classes,
                        if w.balanced { "balanced" } else { "unbalanced" }
                    );
                }
            }
            Section::Error(e) => {
                let _ = writeln!(s, "windows: {e}");
            }
        }
        let st = &self.stationary;
        let _ = writeln!(
            s,
            "stationary cells ({} rates): {}; propagation {}",
            st.derivatives,
            if st.stationary.is_empty() { "none".into() } else { st.stationary.join(" ") },
            if st.propagation_satisfied { "satisfied" } else { "violated (non-generic)" }
        );
        for [c, i] in &st.violations {
            let _ = writeln!(s, "  {c} is stationary but its input {i} moves");
        }
        match &self.periodicity {
            Section::Ok(r) => {
                let cells: Vec<String> = r.cells.iter().map(|(c, p)| format!("{c}={}", p.short())).collect();
                let _ = writeln!(
                    s,
                    "periods: {}; propagation {}",
                    cells.join(" "),
                    if r.holds { "holds" } else { "fails" }
                );
                for k in r.checks.iter().filter(|k| !k.holds) {
                    let _ = writeln!(s, "  {} (period {:.6}) has input {} with period {}", k.cell, k.period, k.input, k.input_period.short());
                }
            }
            Section::Error(e) => {
                let _ = writeln!(s, "periods: {e}");
            }
        }
        match &self.phase {
            Some(Section::Ok(ph)) => {
                let pairs: Vec<String> = ph.pairs.iter().map(|[a, b]| format!("({a},{b})")).collect();
                let _ = writeln!(
                    s,
                    "phase shift {}: pairs {}; self-related {}; doubled pattern {}",
                    ph.theta,
                    if pairs.is_empty() { "none".into() } else { pairs.join(" ") },
                    if ph.self_related.is_empty() { "none".into() } else { ph.self_related.join(" ") },
                    if ph.doubled_balanced { "balanced" } else { "unbalanced" }
                );
                for [a, b] in &ph.rigid_phase_violations {
                    let _ = writeln!(s, "  ({a},{b}) has no aligning input isomorphism (non-generic)");
                }
            }
            Some(Section::Error(e)) => {
                let _ = writeln!(s, "phase shift: {e}");
            }
            None => {}
        }
        s
    }
}
