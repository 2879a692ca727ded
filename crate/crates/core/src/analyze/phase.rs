use alloc::vec::Vec;

use super::period::{estimate_period, CellPeriod, PeriodOptions};
use super::{check_layout, report_from_stats, sample_times, AnalyzeError, PairStats, PatternReport};
use crate::coloring::{color_preserving_isomorphism, Coloring};
use crate::network::{doubled_network, CellId, DoubledNetwork, TypedNetwork};
use crate::sim::Trajectory;

/// Phase-shift synchrony read off the doubled trajectory
/// `X(t) = (x(t), x(t + θ))`.
#[derive(Clone, Debug)]
pub struct PhaseShiftReport {
    pub theta: f64,
    pub doubled: DoubledNetwork,
    /// Interval pattern of `X` on `[t0, t1 − θ]`, on the doubled network.
    pub doubled_pattern: PatternReport,
    /// Pattern of the first copy: the ordinary pattern of `x` on the window.
    pub base_pattern: Coloring,
    /// `(c, c2)` with `c ≠ c2` and `x_c(t) = x_c2(t + θ)` on the window.
    pub relations: Vec<(CellId, CellId)>,
    /// Cells with `x_c(t) = x_c(t + θ)` on the window.
    pub self_related: Vec<CellId>,
    /// Relations (including `(c, c)` for self-related cells) whose shifted
    /// inputs admit no aligning input isomorphism.
    pub rigid_phase_violations: Vec<(CellId, CellId)>,
    /// Per-cell period estimates, when the span allows them.
    pub periods: Option<Vec<CellPeriod>>,
}

impl PhaseShiftReport {
    /// Unordered cell pairs related by the shift in either direction.
    pub fn pairs(&self) -> Vec<(CellId, CellId)> {
        let mut out: Vec<(CellId, CellId)> = self.relations.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn doubled_balanced(&self) -> bool {
        self.doubled_pattern.is_balanced()
    }

    /// Some shift relation violates the input condition that holds for
    /// generic fields.
    pub fn non_generic(&self) -> bool {
        !self.rigid_phase_violations.is_empty()
    }
}

/// Detects relations `x_c(t) = x_c2(t + θ)` on `[t0, t1 − θ]` through the
/// interval pattern of the doubled trajectory. A relation between
/// cells `c` and `c2` is checked for the generic necessary condition: `c`
/// and `c2` are input isomorphic through some `β` that carries the inputs
/// of `c` at time `t` to equally colored inputs of `c2` at time `t + θ`.
pub fn detect_phase_shift(
    net: &TypedNetwork,
    traj: &Trajectory,
    theta: f64,
    tol: f64,
) -> Result<PhaseShiftReport, AnalyzeError> {
    check_layout(net, traj)?;
    let span = traj.t1() - traj.t0();
    if !(theta >= 0.0 && theta < span) {
        return Err(AnalyzeError::InvalidShift { theta, span });
    }
    let doubled = doubled_network(net);
    let (sigma, tau) = (traj.t0(), traj.t1() - theta);
    let times = sample_times(traj, sigma, tau);
    let mut stats = PairStats::new(doubled.network.num_cells());
    let mut x = alloc::vec![0.0; traj.dim()];
    let mut y = alloc::vec![0.0; traj.dim()];
    for &t in &times {
        traj.dense_eval_into(t, &mut x)?;
        traj.dense_eval_into((t + theta).min(traj.t1()), &mut y)?;
        stats.add(doubled.network.layout(), &doubled.join_states(&x, &y));
    }
    let doubled_pattern = report_from_stats(&doubled.network, &stats, sigma, tau, &times, tol)?;
    let pattern = &doubled_pattern.pattern;
    let base_pattern = Coloring::from_labels(&pattern.colors()[..net.num_cells()]);

    let mut relations = Vec::new();
    let mut self_related = Vec::new();
    let mut rigid_phase_violations = Vec::new();
    for c in net.cells() {
        for c2 in net.cells() {
            let (a, b) = (doubled.first[c.index()], doubled.second[c2.index()]);
            if !pattern.same_color(a, b) {
                continue;
            }
            if c == c2 {
                self_related.push(c);
            } else {
                relations.push((c, c2));
            }
            let aligned =
                net.input_isomorphic(c, c2) && color_preserving_isomorphism(&doubled.network, pattern, a, b).is_some();
            if !aligned {
                rigid_phase_violations.push((c, c2));
            }
        }
    }

    let opts = PeriodOptions::default();
    let layout = net.layout();
    let periods = net
        .cells()
        .map(|c| estimate_period(traj, &layout.range(c).collect::<Vec<_>>(), &opts))
        .collect::<Result<Vec<_>, _>>()
        .ok();

    Ok(PhaseShiftReport {
        theta,
        doubled,
        doubled_pattern,
        base_pattern,
        relations,
        self_related,
        rigid_phase_violations,
        periods,
    })
}
