//! Synchrony patterns of states and trajectories, constant-pattern windows,
//! stationary cells, phase shifts and period propagation.
//!
//! Continuous-time statements are checked on a finite sample set: the stored
//! grid points in an interval, the interval endpoints and the dense-output
//! midpoints between consecutive samples. Every verdict therefore holds "at
//! resolution h", where h is the largest gap between samples.

mod period;
mod phase;
mod stationary;

use alloc::vec::Vec;

pub use period::{estimate_period, periodicity_report, CellPeriod, PeriodOptions, PeriodicityReport, PropagationCheck};
pub use phase::{detect_phase_shift, PhaseShiftReport};
pub use stationary::{stationary_cells, StationaryReport};

use crate::coloring::{is_balanced, BalancednessCertificate, Coloring, ColoringError, AMBIGUITY_FACTOR};
use crate::network::{CellId, TypedNetwork};
use crate::sim::{SimError, Trajectory};
use crate::state::StateLayout;
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AnalyzeError {
    #[error("empty interval [{sigma}, {tau}]")]
    EmptyInterval { sigma: f64, tau: f64 },
    #[error("interval [{sigma}, {tau}] leaves the trajectory span [{t0}, {t1}]")]
    OutOfSpan { sigma: f64, tau: f64, t0: f64, t1: f64 },
    #[error("no stored samples in [{sigma}, {tau}]")]
    NoSamples { sigma: f64, tau: f64 },
    #[error("shift {theta} must be non-negative and shorter than the span {span}")]
    InvalidShift { theta: f64, span: f64 },
    #[error("span {span} is too short: need at least {needed}")]
    InsufficientSpan { span: f64, needed: f64 },
    #[error("trajectory layout does not match the network")]
    LayoutMismatch,
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Synchrony pattern of a single state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointPattern {
    pub pattern: Coloring,
    /// Pairs whose distance lies in the gray band `(tol, 10·tol]`, and
    /// same-colored pairs merged only through the transitive closure.
    pub ambiguous: Vec<(CellId, CellId)>,
}

/// Distances between one pair of cells over a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEvidence {
    pub a: CellId,
    pub b: CellId,
    pub same_color: bool,
    /// Largest distance over the samples (`+∞` for cells of different
    /// dimension).
    pub max_distance: f64,
    /// Smallest distance over the samples.
    pub min_distance: f64,
}

/// Synchrony pattern of a trajectory on `[sigma, tau]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternReport {
    pub sigma: f64,
    pub tau: f64,
    pub samples: usize,
    /// Largest gap between consecutive samples.
    pub resolution: f64,
    pub pattern: Coloring,
    pub pairs: Vec<PairEvidence>,
    /// Largest distance between same-colored cells at any sample.
    pub max_same_color_deviation: f64,
    /// Smallest, over differently colored pairs, of their largest distance.
    pub min_separation: f64,
    pub ambiguous: Vec<(CellId, CellId)>,
    pub certificate: BalancednessCertificate,
}

impl PatternReport {
    pub fn is_balanced(&self) -> bool {
        self.certificate.is_balanced()
    }
}

/// Running per-pair distance extremes over a set of states.
pub(crate) struct PairStats {
    n: usize,
    max: Vec<f64>,
    min: Vec<f64>,
}

impl PairStats {
    pub(crate) fn new(n: usize) -> Self {
        Self { n, max: alloc::vec![0.0; n * n], min: alloc::vec![f64::INFINITY; n * n] }
    }

    pub(crate) fn add(&mut self, layout: &StateLayout, x: &[f64]) {
        for a in 0..self.n {
            for b in a + 1..self.n {
                let d = layout.cell_distance(x, CellId::new(a), CellId::new(b)).unwrap_or(f64::INFINITY);
                let k = a * self.n + b;
                self.max[k] = self.max[k].max(d);
                self.min[k] = self.min[k].min(d);
            }
        }
    }

    fn max_distance(&self, a: usize, b: usize) -> f64 {
        self.max[a.min(b) * self.n + a.max(b)]
    }

    /// Pattern from the closure of pairs within `tol` at every sample.
    pub(crate) fn pattern(&self, tol: f64) -> Coloring {
        let mut uf = UnionFind::new(self.n);
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.max_distance(a, b) <= tol {
                    uf.union(a, b);
                }
            }
        }
        Coloring::from_labels(&uf.labels())
    }

    fn ambiguous(&self, pattern: &Coloring, tol: f64) -> Vec<(CellId, CellId)> {
        let wide = AMBIGUITY_FACTOR * tol;
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                let d = self.max_distance(a, b);
                let (ca, cb) = (CellId::new(a), CellId::new(b));
                if (pattern.same_color(ca, cb) && d > tol) || (d > tol && d <= wide) {
                    out.push((ca, cb));
                }
            }
        }
        out
    }

    fn evidence(&self, pattern: &Coloring) -> Vec<PairEvidence> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                let k = a * self.n + b;
                let (ca, cb) = (CellId::new(a), CellId::new(b));
                out.push(PairEvidence {
                    a: ca,
                    b: cb,
                    same_color: pattern.same_color(ca, cb),
                    max_distance: self.max[k],
                    min_distance: self.min[k],
                });
            }
        }
        out
    }
}

/// Synchrony pattern `⋈_x`: the transitive closure of `|x_c − x_c2| ≤ tol`.
/// Cells of different dimension are never equal. The result need not be
/// balanced.
pub fn pattern_at(net: &TypedNetwork, x: &[f64], tol: f64) -> Result<PointPattern, AnalyzeError> {
    let layout = net.layout();
    layout.check(x).map_err(ColoringError::from)?;
    let mut stats = PairStats::new(net.num_cells());
    stats.add(layout, x);
    let pattern = stats.pattern(tol);
    let ambiguous = stats.ambiguous(&pattern, tol);
    Ok(PointPattern { pattern, ambiguous })
}

fn check_layout(net: &TypedNetwork, traj: &Trajectory) -> Result<(), AnalyzeError> {
    if traj.layout() != net.layout() {
        return Err(AnalyzeError::LayoutMismatch);
    }
    Ok(())
}

fn check_interval(traj: &Trajectory, sigma: f64, tau: f64) -> Result<(), AnalyzeError> {
    if !(sigma <= tau) {
        return Err(AnalyzeError::EmptyInterval { sigma, tau });
    }
    let (t0, t1) = (traj.t0(), traj.t1());
    if sigma < t0 || tau > t1 {
        return Err(AnalyzeError::OutOfSpan { sigma, tau, t0, t1 });
    }
    Ok(())
}

/// Sample times for `[sigma, tau]`: the endpoints, the stored grid points
/// in between and the midpoint of every gap.
pub(crate) fn sample_times(traj: &Trajectory, sigma: f64, tau: f64) -> Vec<f64> {
    let mut knots = alloc::vec![sigma];
    knots.extend(traj.times().iter().copied().filter(|&t| t > sigma && t < tau));
    if tau > sigma {
        knots.push(tau);
    }
    let mut out = Vec::with_capacity(2 * knots.len());
    for w in knots.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(*knots.last().expect("at least one knot"));
    out
}

fn resolution(times: &[f64]) -> f64 {
    times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

pub(crate) fn report_from_stats(
    net: &TypedNetwork,
    stats: &PairStats,
    sigma: f64,
    tau: f64,
    times: &[f64],
    tol: f64,
) -> Result<PatternReport, AnalyzeError> {
    let pattern = stats.pattern(tol);
    let pairs = stats.evidence(&pattern);
    let max_same_color_deviation = pairs.iter().filter(|p| p.same_color).map(|p| p.max_distance).fold(0.0, f64::max);
    let min_separation =
        pairs.iter().filter(|p| !p.same_color).map(|p| p.max_distance).fold(f64::INFINITY, f64::min);
    let ambiguous = stats.ambiguous(&pattern, tol);
    let certificate = is_balanced(net, &pattern)?;
    Ok(PatternReport {
        sigma,
        tau,
        samples: times.len(),
        resolution: resolution(times),
        pattern,
        pairs,
        max_same_color_deviation,
        min_separation,
        ambiguous,
        certificate,
    })
}

/// Interval synchrony pattern `⋈_{x,J}`: two cells share a color iff they
/// agree within `tol` at every sample of `[sigma, tau]` (up to transitive
/// closure). Equalities at isolated times are therefore excluded.
pub fn pattern_on_interval(
    net: &TypedNetwork,
    traj: &Trajectory,
    sigma: f64,
    tau: f64,
    tol: f64,
) -> Result<PatternReport, AnalyzeError> {
    check_layout(net, traj)?;
    check_interval(traj, sigma, tau)?;
    let times = sample_times(traj, sigma, tau);
    let mut stats = PairStats::new(net.num_cells());
    let mut x = alloc::vec![0.0; traj.dim()];
    for &t in &times {
        traj.dense_eval_into(t, &mut x)?;
        stats.add(net.layout(), &x);
    }
    report_from_stats(net, &stats, sigma, tau, &times, tol)
}

/// Maximal run of stored samples sharing one synchrony pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternWindow {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    pub pattern: Coloring,
    /// The pattern is finer than or equal to the patterns at the samples
    /// just outside the window, as lower semicontinuity of `t ↦ ⋈_t`
    /// requires.
    pub semicontinuous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowDecomposition {
    /// Runs of at least two samples, or every run when there is none.
    pub windows: Vec<PatternWindow>,
    /// Single samples whose pattern differs from both neighbors.
    pub isolated: Vec<(f64, Coloring)>,
    /// Every window is semicontinuous.
    pub semicontinuity_ok: bool,
}

/// Splits the stored samples into maximal runs of constant `⋈_t`.
pub fn constant_pattern_window(
    net: &TypedNetwork,
    traj: &Trajectory,
    tol: f64,
) -> Result<WindowDecomposition, AnalyzeError> {
    check_layout(net, traj)?;
    let mut patterns = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        patterns.push(pattern_at(net, traj.state(i), tol)?.pattern);
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=patterns.len() {
        if i == patterns.len() || patterns[i] != patterns[start] {
            runs.push((start, i - 1));
            start = i;
        }
    }
    let any_long = runs.iter().any(|&(a, b)| b > a);
    let times = traj.times();
    let mut windows = Vec::new();
    let mut isolated = Vec::new();
    for &(a, b) in &runs {
        if any_long && a == b {
            isolated.push((times[a], patterns[a].clone()));
            continue;
        }
        let pattern = patterns[a].clone();
        let mut semicontinuous = true;
        for outside in [a.checked_sub(1), Some(b + 1).filter(|&j| j < patterns.len())].into_iter().flatten() {
            semicontinuous &= pattern.is_finer(&patterns[outside])?;
        }
        windows.push(PatternWindow { from: times[a], to: times[b], samples: b - a + 1, pattern, semicontinuous });
    }
    let semicontinuity_ok = windows.iter().all(|w| w.semicontinuous);
    Ok(WindowDecomposition { windows, isolated, semicontinuity_ok })
}

#[cfg(test)]
mod tests;
