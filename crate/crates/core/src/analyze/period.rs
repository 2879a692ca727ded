use alloc::vec::Vec;

use super::{check_layout, AnalyzeError};
use crate::math;
use crate::network::{CellId, TypedNetwork};
use crate::sim::Trajectory;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodOptions {
    /// Relative tolerance when matching a period against multiples of
    /// another.
    pub rel_tol: f64,
    /// Largest multiple `k` tried in `θ·{1, …, k}`.
    pub max_multiple: usize,
    /// Minimum autocorrelation of an accepted peak.
    pub peak_threshold: f64,
    /// A signal whose range stays within `constant_tol · max(1, |x|)` is
    /// constant.
    pub constant_tol: f64,
    /// Number of uniform resampling points for the autocorrelation.
    pub resample: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-3, max_multiple: 8, peak_threshold: 0.99, constant_tol: 1e-9, resample: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellPeriod {
    /// The signal does not move: it has every period.
    Constant,
    Periodic {
        period: f64,
        /// Autocorrelation at the detected peak.
        correlation: f64,
    },
    /// No autocorrelation peak between the floor and a third of the span.
    Aperiodic,
}

impl CellPeriod {
    pub fn period(&self) -> Option<f64> {
        match self {
            Self::Periodic { period, .. } => Some(*period),
            _ => None,
        }
    }
}

/// Whether an input cell's period fits the period of a cell it feeds.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationCheck {
    pub cell: CellId,
    pub period: f64,
    /// Direct or indirect input of `cell`.
    pub input: CellId,
    pub input_period: CellPeriod,
    /// Smallest `k ≤ max_multiple` such that the input is `k·period`
    /// periodic.
    pub multiple: Option<usize>,
}

impl PropagationCheck {
    pub fn holds(&self) -> bool {
        matches!(self.input_period, CellPeriod::Constant) || self.multiple.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicityReport {
    pub cells: Vec<CellPeriod>,
    pub checks: Vec<PropagationCheck>,
    /// Period of the whole state, computed for transitive networks.
    pub whole_state: Option<CellPeriod>,
    /// For transitive networks: the whole-state period is a multiple of
    /// every cell period.
    pub whole_state_consistent: Option<bool>,
}

impl PeriodicityReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(PropagationCheck::holds) && self.whole_state_consistent != Some(false)
    }
}

/// Smallest `k ≤ max_k` such that `k·theta` is, within `rel_tol`, an
/// integer multiple of `p`.
fn multiple_of(theta: f64, p: f64, max_k: usize, rel_tol: f64) -> Option<usize> {
    (1..=max_k).find(|&k| {
        let kt = k as f64 * theta;
        let m = math::round(kt / p).max(1.0);
        math::abs(kt - m * p) <= rel_tol * kt
    })
}

fn median_step(times: &[f64]) -> f64 {
    let mut steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if steps.is_empty() {
        return 0.0;
    }
    steps.sort_unstable_by(f64::total_cmp);
    steps[steps.len() / 2]
}

/// Pearson correlation between the series and itself shifted by `k`
/// samples, pooled over components.
fn autocorrelation(series: &[Vec<f64>], k: usize) -> f64 {
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for y in series {
        let m = y.len() - k;
        let (a, b) = (&y[..m], &y[k..]);
        let ma = a.iter().sum::<f64>() / m as f64;
        let mb = b.iter().sum::<f64>() / m as f64;
        for (u, v) in a.iter().zip(b) {
            sab += (u - ma) * (v - mb);
            saa += (u - ma) * (u - ma);
            sbb += (v - mb) * (v - mb);
        }
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / math::sqrt(saa * sbb)
}

/// Mean squared mismatch `|y(s + lag) − y(s)|²` over a uniform grid of `s`.
fn mismatch(traj: &Trajectory, comps: &[usize], lag: f64, points: usize) -> Result<f64, AnalyzeError> {
    let (t0, t1) = (traj.t0(), traj.t1());
    let end = t1 - lag;
    let mut a = alloc::vec![0.0; traj.dim()];
    let mut b = alloc::vec![0.0; traj.dim()];
    let mut acc = 0.0;
    for i in 0..points {
        let s = t0 + (end - t0) * i as f64 / (points - 1) as f64;
        traj.dense_eval_into(s, &mut a)?;
        traj.dense_eval_into((s + lag).min(t1), &mut b)?;
        acc += comps.iter().map(|&j| (b[j] - a[j]) * (b[j] - a[j])).sum::<f64>();
    }
    Ok(acc / points as f64)
}

/// Period of the state components `comps`: first autocorrelation peak
/// above the threshold, between `10·h` (median grid step) and a third of
/// the span, refined by a parabola through the peak and then by a
/// golden-section search on the mean squared mismatch `|y(s+L) − y(s)|²`.
pub fn estimate_period(traj: &Trajectory, comps: &[usize], opts: &PeriodOptions) -> Result<CellPeriod, AnalyzeError> {
    let span = traj.t1() - traj.t0();
    let floor = 10.0 * median_step(traj.times());
    if traj.len() < 2 || span / 3.0 <= floor {
        return Err(AnalyzeError::InsufficientSpan { span, needed: 3.0 * floor });
    }
    let n = opts.resample.max(16);
    let hs = span / (n - 1) as f64;
    let mut series: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(n); comps.len()];
    let mut x = alloc::vec![0.0; traj.dim()];
    for i in 0..n {
        traj.dense_eval_into((traj.t0() + hs * i as f64).min(traj.t1()), &mut x)?;
        for (s, &j) in series.iter_mut().zip(comps) {
            s.push(x[j]);
        }
    }
    let (mut lo, mut hi, mut big) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for v in series.iter().flatten() {
        lo = lo.min(*v);
        hi = hi.max(*v);
        big = big.max(math::abs(*v));
    }
    if series.iter().all(|s| {
        let (a, b) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        b - a <= opts.constant_tol * big.max(1.0)
    }) {
        return Ok(CellPeriod::Constant);
    }
    let kmin = (math::ceil(floor / hs) as usize).max(2);
    let kmax = (math::floor(span / 3.0 / hs) as usize).min(n - 2);
    if kmin + 1 > kmax {
        return Err(AnalyzeError::InsufficientSpan { span, needed: 3.0 * floor });
    }
    let r: Vec<f64> = (kmin - 1..=kmax + 1).map(|k| autocorrelation(&series, k)).collect();
    let peak = (1..r.len() - 1).find(|&i| r[i] >= opts.peak_threshold && r[i] >= r[i - 1] && r[i] >= r[i + 1]);
    let Some(i) = peak else {
        return Ok(CellPeriod::Aperiodic);
    };
    let k = (kmin - 1 + i) as f64;
    let denom = r[i - 1] - 2.0 * r[i] + r[i + 1];
    let shift = if denom < 0.0 { (0.5 * (r[i - 1] - r[i + 1]) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let guess = (k + shift) * hs;
    let period = golden_section(|l| mismatch(traj, comps, l, 1000), guess - hs, guess + hs)?;
    Ok(CellPeriod::Periodic { period, correlation: r[i] })
}

fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64, AnalyzeError>,
    mut a: f64,
    mut b: f64,
) -> Result<f64, AnalyzeError> {
    let g = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
        if b - a <= 1e-12 * b.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Per-cell periods and the propagation test: when cell `c` is
/// `θ`-periodic, every direct or indirect input of `c` must be
/// `kθ`-periodic for some `k ≤ max_multiple` (a constant input qualifies).
/// For transitive networks the whole state must also be `kθ`-periodic.
pub fn periodicity_report(
    net: &TypedNetwork,
    traj: &Trajectory,
    opts: &PeriodOptions,
) -> Result<PeriodicityReport, AnalyzeError> {
    check_layout(net, traj)?;
    let layout = net.layout();
    let mut cells = Vec::with_capacity(net.num_cells());
    for c in net.cells() {
        let comps: Vec<usize> = layout.range(c).collect();
        cells.push(estimate_period(traj, &comps, opts)?);
    }
    let mut checks = Vec::new();
    for c in net.cells() {
        let Some(theta) = cells[c.index()].period() else { continue };
        for input in net.upstream(c).into_iter().filter(|&u| u != c) {
            let input_period = cells[input.index()].clone();
            let multiple = input_period.period().and_then(|p| multiple_of(theta, p, opts.max_multiple, opts.rel_tol));
            checks.push(PropagationCheck { cell: c, period: theta, input, input_period, multiple });
        }
    }
    let (mut whole_state, mut whole_state_consistent) = (None, None);
    if net.is_transitive() {
        let all: Vec<usize> = (0..traj.dim()).collect();
        let whole = estimate_period(traj, &all, opts)?;
        let consistent = cells.iter().filter_map(CellPeriod::period).all(|theta| match &whole {
            CellPeriod::Periodic { period, .. } => (1..=opts.max_multiple)
                .any(|k| math::abs(*period - k as f64 * theta) <= opts.rel_tol * *period),
            CellPeriod::Constant => false,
            CellPeriod::Aperiodic => false,
        });
        whole_state = Some(whole);
        whole_state_consistent = Some(consistent);
    }
    Ok(PeriodicityReport { cells, checks, whole_state, whole_state_consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiples() {
        assert_eq!(multiple_of(2.0, 1.0, 8, 1e-3), Some(1));
        assert_eq!(multiple_of(1.0, 2.0, 8, 1e-3), Some(2));
        assert_eq!(multiple_of(2.0, 1.3, 8, 1e-3), None);
        assert_eq!(multiple_of(1.0, 3.0005, 8, 1e-3), Some(3));
    }

    #[test]
    fn golden_section_finds_minimum() {
        let x = golden_section(|l| Ok((l - 0.3) * (l - 0.3)), 0.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }
}
