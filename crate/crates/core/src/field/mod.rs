//! Admissible vector fields.
//!
//! A field is evaluated cell by cell: component `f_c` receives the states of
//! its input tuple in the canonical order of `I(c)`, own state first. Fields
//! built from the DSL or by [`symmetrize`] satisfy the input-isomorphism
//! symmetry by construction; [`check_admissibility`] verifies it on random
//! states.

mod bump;
pub mod dsl;
mod symmetrize;

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

pub use bump::{BumpBasis, BumpError, BumpFunction, CurveSegment};
pub use dsl::{parse_field, parse_field_with, parse_unsymmetrized, DslError, DslErrorKind, FieldSpec, UnsymmetrizedField};
pub use symmetrize::{symmetrize, RawFunction, SymmetrizedField};

use crate::network::{input_isomorphisms, pullback, CellId, TypedNetwork};
use crate::rng::uniform;
use crate::state::DimensionMismatch;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("cell {cell}: {operation} outside its domain")]
    Domain { cell: CellId, operation: &'static str },
    #[error("cell {cell}: non-finite value")]
    NonFinite { cell: CellId },
    #[error("cell {cell}: expected {expected} inputs, got {found}")]
    Arity { cell: CellId, expected: usize, found: usize },
    #[error("cell {cell} is outside the field's network")]
    UnknownCell { cell: CellId },
    #[error("raw function for cell {cell} reads cells outside its input set")]
    OutsideInputs { cell: CellId },
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
}

/// Right-hand side of a network ODE, one cell at a time.
pub trait CellField: Send + Sync {
    /// Writes `f_c` into `out` given the input tuple of `cell` (own state
    /// first, then the tails of `I(cell)` in canonical order).
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError>;
}

impl<F: CellField + ?Sized> CellField for &F {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        (**self).eval_cell(cell, inputs, out)
    }
}

impl<F: CellField + ?Sized> CellField for Box<F> {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        (**self).eval_cell(cell, inputs, out)
    }
}

impl<F: CellField + ?Sized> CellField for Arc<F> {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        (**self).eval_cell(cell, inputs, out)
    }
}

/// Shared, type-erased field.
pub type SharedField = Arc<dyn CellField>;

/// Evaluates `f(x)` into `out`.
pub fn eval_field_into(net: &TypedNetwork, field: &dyn CellField, x: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
    let layout = net.layout();
    layout.check(x)?;
    layout.check(out)?;
    let mut inputs: Vec<&[f64]> = Vec::new();
    for c in net.cells() {
        inputs.clear();
        inputs.extend(net.input_arrows(c).iter().map(|&a| layout.cell(x, net.tail(a))));
        let range = layout.range(c);
        field.eval_cell(c, &inputs, &mut out[range.clone()])?;
        if out[range].iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { cell: c });
        }
    }
    Ok(())
}

/// Evaluates `f(x)`.
pub fn eval_field(net: &TypedNetwork, field: &dyn CellField, x: &[f64]) -> Result<Vec<f64>, FieldError> {
    let mut out = alloc::vec![0.0; x.len()];
    eval_field_into(net, field, x, &mut out)?;
    Ok(out)
}

/// The zero field.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroField;

impl CellField for ZeroField {
    fn eval_cell(&self, _: CellId, _: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        Ok(())
    }
}

/// Pointwise sum of fields.
pub struct SumField {
    pub parts: Vec<SharedField>,
}

impl CellField for SumField {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        let mut buf = alloc::vec![0.0; out.len()];
        for part in &self.parts {
            part.eval_cell(cell, inputs, &mut buf)?;
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += b;
            }
        }
        Ok(())
    }
}

/// `scale · f`.
pub struct ScaledField<F> {
    pub inner: F,
    pub scale: f64,
}

impl<F: CellField> CellField for ScaledField<F> {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        self.inner.eval_cell(cell, inputs, out)?;
        out.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }
}

/// Evaluates cell `c` as cell `map[c]` of `inner`. Used for quotient and
/// doubled networks, whose cells keep the input order of the cell they
/// stand for.
pub struct MappedField<F> {
    pub inner: F,
    pub map: Vec<CellId>,
}

impl<F: CellField> CellField for MappedField<F> {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        let target = *self.map.get(cell.index()).ok_or(FieldError::UnknownCell { cell })?;
        self.inner.eval_cell(target, inputs, out)
    }
}

/// Field given by a closure. Admissibility is the caller's responsibility.
pub struct FnField<F>(pub F);

impl<F> CellField for FnField<F>
where
    F: Fn(CellId, &[&[f64]], &mut [f64]) -> Result<(), FieldError> + Send + Sync,
{
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        (self.0)(cell, inputs, out)
    }
}

/// Outcome of [`check_admissibility`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub samples: usize,
    /// Number of `(x, β)` comparisons made.
    pub comparisons: usize,
    pub max_violation: f64,
    /// Source and target cell of the worst comparison.
    pub worst: Option<(CellId, CellId)>,
    pub tol: f64,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tol
    }
}

/// Draws `samples` states uniformly in `[-2, 2]^d` and, for every ordered
/// pair of input-isomorphic cells `(c, c2)` and every `β ∈ B(c, c2)`,
/// compares `f_{c2}(x)` with `f_c` evaluated on the pulled-back tuple `β*x`.
pub fn check_admissibility<R: Rng + ?Sized>(
    net: &TypedNetwork,
    field: &dyn CellField,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<AdmissibilityReport, FieldError> {
    let layout = net.layout();
    let mut isos = Vec::new();
    for c in net.cells() {
        for c2 in net.cells() {
            for beta in input_isomorphisms(net, c, c2).expect("cells of the network") {
                isos.push(beta);
            }
        }
    }
    let mut report =
        AdmissibilityReport { samples, comparisons: 0, max_violation: 0.0, worst: None, tol };
    let mut x = alloc::vec![0.0; layout.total_dim()];
    for _ in 0..samples {
        x.iter_mut().for_each(|v| *v = uniform(rng, -2.0, 2.0));
        let fx = eval_field(net, field, &x)?;
        for beta in &isos {
            let tuple = pullback(net, beta, &x).expect("isomorphism of this network");
            let mut out = alloc::vec![0.0; net.dim(beta.source)];
            field.eval_cell(beta.source, &tuple, &mut out)?;
            let own = layout.cell(&fx, beta.target);
            let dev = crate::state::sup_distance(&out, own);
            report.comparisons += 1;
            if dev > report.max_violation || dev.is_nan() {
                report.max_violation = if dev.is_nan() { f64::INFINITY } else { dev };
                report.worst = Some((beta.source, beta.target));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
