//! Integration of `dx/dt = f(x)` and trajectory storage.

mod dopri;
mod trajectory;

use alloc::vec::Vec;

pub use trajectory::{DerivativeSource, Trajectory, TrajectoryMeta};

use crate::coloring::{quotient_network, Coloring, ColoringError, Quotient};
use crate::field::{eval_field_into, CellField, FieldError, MappedField};
use crate::math;
use crate::network::TypedNetwork;
use crate::state::{sup_distance, sup_norm, DimensionMismatch};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("state norm {norm} exceeds the blow-up bound at t = {t}")]
    BlowUp { t: f64, norm: f64 },
    #[error("more than {0} steps")]
    TooManySteps(usize),
    #[error("field evaluation failed at t = {t}: {source}")]
    Field { t: f64, source: FieldError },
    #[error("time {t} outside the trajectory span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
    #[error("invalid time span [{0}, {1}]")]
    InvalidSpan(f64, f64),
    #[error("invalid integrator settings: {0}")]
    InvalidOptions(&'static str),
    #[error("time grid is not strictly increasing at index {0}")]
    NonMonotoneGrid(usize),
    #[error("initial state is not on the synchrony space (deviation {0})")]
    NotOnSynchronySpace(f64),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4 { h: f64 },
    /// Dormand–Prince 5(4) with adaptive steps.
    Dopri5 { rtol: f64, atol: f64 },
}

impl Method {
    pub const DEFAULT_RTOL: f64 = 1e-9;
    pub const DEFAULT_ATOL: f64 = 1e-12;

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Dopri5 { .. } => "dopri5",
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Dopri5 { rtol: Self::DEFAULT_RTOL, atol: Self::DEFAULT_ATOL }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub method: Method,
    /// Abort when the supremum norm of the state exceeds this.
    pub blowup_bound: f64,
    /// Adaptive steps land exactly on these times, and only these times
    /// (plus the endpoints) are stored. Ignored by fixed-step methods.
    pub output_times: Option<Vec<f64>>,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { method: Method::default(), blowup_bound: 1e8, output_times: None, max_steps: 5_000_000 }
    }
}

impl IntegrateOptions {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }

    pub fn rk4(h: f64) -> Self {
        Self::with_method(Method::Rk4 { h })
    }

    pub fn dopri(rtol: f64, atol: f64) -> Self {
        Self::with_method(Method::Dopri5 { rtol, atol })
    }
}

/// Right-hand side evaluation with time-stamped errors.
pub(crate) struct Rhs<'a> {
    pub net: &'a TypedNetwork,
    pub field: &'a dyn CellField,
    pub evals: usize,
}

impl Rhs<'_> {
    pub fn eval(&mut self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), SimError> {
        self.evals += 1;
        eval_field_into(self.net, self.field, x, out).map_err(|e| match e {
            FieldError::NonFinite { .. } => SimError::NonFinite { t },
            source => SimError::Field { t, source },
        })
    }
}

fn check_state(t: f64, x: &[f64], bound: f64) -> Result<(), SimError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { t });
    }
    let norm = sup_norm(x);
    if norm > bound {
        return Err(SimError::BlowUp { t, norm });
    }
    Ok(())
}

/// Integrates `dx/dt = f(x)` over `[t0, t1]` from `x0`.
pub fn integrate(
    net: &TypedNetwork,
    field: &dyn CellField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, SimError> {
    net.layout().check(x0)?;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(SimError::InvalidSpan(t0, t1));
    }
    check_state(t0, x0, opts.blowup_bound)?;
    let mut rhs = Rhs { net, field, evals: 0 };
    match opts.method {
        Method::Rk4 { h } => rk4(&mut rhs, x0, t0, t1, h, opts),
        Method::Dopri5 { rtol, atol } => dopri::integrate(&mut rhs, x0, t0, t1, rtol, atol, opts),
    }
}

fn rk4(rhs: &mut Rhs<'_>, x0: &[f64], t0: f64, t1: f64, h: f64, opts: &IntegrateOptions) -> Result<Trajectory, SimError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(SimError::InvalidOptions("rk4 needs a positive step"));
    }
    let span = t1 - t0;
    let ratio = span / h;
    let n = if math::abs(ratio - math::round(ratio)) <= 1e-9 * ratio.max(1.0) {
        math::round(ratio) as usize
    } else {
        math::ceil(ratio) as usize
    }
    .max(1);
    if n > opts.max_steps {
        return Err(SimError::TooManySteps(opts.max_steps));
    }
    let h = span / n as f64;
    let d = x0.len();
    let mut traj = Trajectory::empty(rhs.net.layout().clone(), TrajectoryMeta::rk4(h));
    let mut x = x0.to_vec();
    let mut f = alloc::vec![0.0; d];
    rhs.eval(t0, &x, &mut f)?;
    traj.push(t0, &x, &f);
    let (mut k2, mut k3, mut k4, mut tmp) = (alloc::vec![0.0; d], alloc::vec![0.0; d], alloc::vec![0.0; d], alloc::vec![0.0; d]);
    for i in 0..n {
        let t = t0 + i as f64 * h;
        for j in 0..d {
            tmp[j] = x[j] + 0.5 * h * f[j];
        }
        rhs.eval(t + 0.5 * h, &tmp, &mut k2)?;
        for j in 0..d {
            tmp[j] = x[j] + 0.5 * h * k2[j];
        }
        rhs.eval(t + 0.5 * h, &tmp, &mut k3)?;
        for j in 0..d {
            tmp[j] = x[j] + h * k3[j];
        }
        rhs.eval(t + h, &tmp, &mut k4)?;
        for j in 0..d {
            x[j] += h / 6.0 * (f[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = if i + 1 == n { t1 } else { t0 + (i + 1) as f64 * h };
        check_state(t_next, &x, opts.blowup_bound)?;
        rhs.eval(t_next, &x, &mut f)?;
        traj.push(t_next, &x, &f);
    }
    traj.meta.steps_accepted = n;
    traj.meta.field_evaluations = rhs.evals;
    Ok(traj)
}

/// Result of [`quotient_consistency`].
#[derive(Clone, Debug)]
pub struct QuotientConsistency {
    /// Supremum over the shared time grid of `‖x_c(t) − y_{[c]}(t)‖`, over
    /// all cells `c`.
    pub max_deviation: f64,
    pub quotient: Quotient,
    pub full: Trajectory,
    pub reduced: Trajectory,
}

/// Number of shared output times used by [`quotient_consistency`].
pub const CONSISTENCY_SAMPLES: usize = 100;

/// Integrates the full system from `x0 ∈ Δ_col` and the quotient system from
/// the projected state on a shared output grid, and measures how far the
/// full trajectory strays from the lifted quotient trajectory.
pub fn quotient_consistency(
    net: &TypedNetwork,
    col: &Coloring,
    field: &dyn CellField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrateOptions,
) -> Result<QuotientConsistency, SimError> {
    let quotient = quotient_network(net, col)?;
    net.layout().check(x0)?;
    let off = same_color_deviation(net, col, x0);
    if off > 0.0 {
        return Err(SimError::NotOnSynchronySpace(off));
    }
    let mut opts = opts.clone();
    if opts.output_times.is_none() {
        let n = CONSISTENCY_SAMPLES;
        opts.output_times = Some((1..n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect());
    }
    let full = integrate(net, field, x0, t0, t1, &opts)?;
    let mapped = MappedField { inner: field, map: quotient.representatives.clone() };
    let y0 = quotient.project_state(net, x0);
    let reduced = integrate(&quotient.network, &mapped, &y0, t0, t1, &opts)?;
    let mut max_deviation: f64 = 0.0;
    let (la, lq) = (net.layout(), quotient.network.layout());
    let paired = full.len().min(reduced.len());
    for i in 0..paired {
        if full.times()[i] != reduced.times()[i] {
            return Err(SimError::InvalidOptions("full and quotient grids differ"));
        }
        let (x, y) = (full.state(i), reduced.state(i));
        for c in net.cells() {
            let q = quotient.projection[c.index()];
            max_deviation = max_deviation.max(sup_distance(la.cell(x, c), lq.cell(y, q)));
        }
    }
    Ok(QuotientConsistency { max_deviation, quotient, full, reduced })
}

/// Largest distance between same-colored cells in `x`.
pub fn same_color_deviation(net: &TypedNetwork, col: &Coloring, x: &[f64]) -> f64 {
    let layout = net.layout();
    let mut worst: f64 = 0.0;
    for class in col.nontrivial_classes() {
        for (i, &a) in class.iter().enumerate() {
            for &b in &class[i + 1..] {
                worst = worst.max(layout.cell_distance(x, a, b).unwrap_or(f64::INFINITY));
            }
        }
    }
    worst
}
