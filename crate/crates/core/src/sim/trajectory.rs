use alloc::vec::Vec;

use super::SimError;
use crate::network::CellId;
use crate::state::{DimensionMismatch, StateLayout};

/// Where stored derivatives came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeSource {
    /// Field evaluations at the stored states.
    Field,
    /// Finite differences of the stored states (imported data).
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub method: &'static str,
    /// Fixed step, for fixed-step methods.
    pub step: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub field_evaluations: usize,
    pub derivatives: DerivativeSource,
}

impl TrajectoryMeta {
    pub(crate) fn rk4(h: f64) -> Self {
        Self {
            method: "rk4",
            step: Some(h),
            rtol: None,
            atol: None,
            steps_accepted: 0,
            steps_rejected: 0,
            field_evaluations: 0,
            derivatives: DerivativeSource::Field,
        }
    }

    pub(crate) fn dopri(rtol: f64, atol: f64) -> Self {
        Self { method: "dopri5", step: None, rtol: Some(rtol), atol: Some(atol), ..Self::rk4(0.0) }
    }

    fn imported(derivatives: DerivativeSource) -> Self {
        Self { method: "samples", step: None, derivatives, ..Self::rk4(0.0) }
    }
}

/// States `x(t_i)` and rates `f(x(t_i))` on a strictly increasing grid,
/// stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    layout: StateLayout,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub(crate) fn empty(layout: StateLayout, meta: TrajectoryMeta) -> Self {
        Self { layout, times: Vec::new(), states: Vec::new(), derivs: Vec::new(), meta }
    }

    pub(crate) fn push(&mut self, t: f64, x: &[f64], f: &[f64]) {
        self.times.push(t);
        self.states.extend_from_slice(x);
        self.derivs.extend_from_slice(f);
    }

    /// Builds a trajectory from sampled data. Without derivatives, rates
    /// are estimated by finite differences and flagged as such in `meta`.
    pub fn from_samples(
        layout: StateLayout,
        times: Vec<f64>,
        states: Vec<f64>,
        derivs: Option<Vec<f64>>,
    ) -> Result<Self, SimError> {
        let d = layout.total_dim();
        if times.is_empty() {
            return Err(SimError::InvalidSpan(f64::NAN, f64::NAN));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(SimError::NonMonotoneGrid(i + 1));
        }
        if states.len() != times.len() * d {
            return Err(DimensionMismatch { expected: times.len() * d, found: states.len() }.into());
        }
        let (derivs, source) = match derivs {
            Some(f) if f.len() == states.len() => (f, DerivativeSource::Field),
            Some(f) => return Err(DimensionMismatch { expected: states.len(), found: f.len() }.into()),
            None => (finite_differences(&times, &states, d), DerivativeSource::FiniteDifference),
        };
        Ok(Self { layout, times, states, derivs, meta: TrajectoryMeta::imported(source) })
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.states[i * d..(i + 1) * d]
    }

    /// Stored rate `f(x(t_i))`.
    pub fn derivative(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.derivs[i * d..(i + 1) * d]
    }

    pub fn cell_state(&self, i: usize, c: CellId) -> &[f64] {
        self.layout.cell(self.state(i), c)
    }

    pub fn cell_derivative(&self, i: usize, c: CellId) -> &[f64] {
        self.layout.cell(self.derivative(i), c)
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.derivs
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Cubic Hermite interpolation from stored states and rates. Grid
    /// points return the stored state exactly.
    pub fn dense_eval(&self, t: f64) -> Result<Vec<f64>, SimError> {
        let mut out = alloc::vec![0.0; self.dim()];
        self.dense_eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn dense_eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), SimError> {
        let (t0, t1) = (self.t0(), self.t1());
        if !(t0..=t1).contains(&t) {
            return Err(SimError::OutOfSpan { t, t0, t1 });
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k > 0 && self.times[k - 1] == t {
            out.copy_from_slice(self.state(k - 1));
            return Ok(());
        }
        let (a, b) = (k - 1, k);
        let h = self.times[b] - self.times[a];
        let s = (t - self.times[a]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (ya, yb, fa, fb) = (self.state(a), self.state(b), self.derivative(a), self.derivative(b));
        for j in 0..out.len() {
            out[j] = h00 * ya[j] + h10 * h * fa[j] + h01 * yb[j] + h11 * h * fb[j];
        }
        Ok(())
    }

    /// Restriction to the stored samples within `[from, to]`, keeping
    /// metadata.
    pub fn window(&self, from: f64, to: f64) -> Option<Self> {
        let a = self.times.partition_point(|&s| s < from);
        let b = self.times.partition_point(|&s| s <= to);
        if a >= b {
            return None;
        }
        let d = self.dim();
        Some(Self {
            layout: self.layout.clone(),
            times: self.times[a..b].to_vec(),
            states: self.states[a * d..b * d].to_vec(),
            derivs: self.derivs[a * d..b * d].to_vec(),
            meta: self.meta.clone(),
        })
    }
}

/// Second-order differences: central inside, one-sided at the ends.
fn finite_differences(times: &[f64], states: &[f64], d: usize) -> Vec<f64> {
    let n = times.len();
    let mut out = alloc::vec![0.0; states.len()];
    if n < 2 {
        return out;
    }
    let x = |i: usize, j: usize| states[i * d + j];
    for i in 0..n {
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        for j in 0..d {
            out[i * d + j] = (x(b, j) - x(a, j)) / (times[b] - times[a]);
        }
    }
    out
}
