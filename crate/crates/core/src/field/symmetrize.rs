use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{CellField, FieldError};
use crate::network::{input_isomorphisms, CellId, InputIsomorphism, TypedNetwork};
use crate::state::DimensionMismatch;

/// Scalar function `φ(x_c, x_T)` of one cell's input tuple, with no
/// symmetry requirement.
pub trait RawFunction: Send + Sync {
    fn eval(&self, inputs: &[&[f64]]) -> Result<f64, FieldError>;
}

impl<F> RawFunction for F
where
    F: Fn(&[&[f64]]) -> f64 + Send + Sync,
{
    fn eval(&self, inputs: &[&[f64]]) -> Result<f64, FieldError> {
        Ok(self(inputs))
    }
}

struct Term {
    representative: CellId,
    raw: Box<dyn RawFunction>,
    direction: Vec<f64>,
    /// `B(c, c)` for the representative, as position maps.
    symmetries: Vec<Vec<usize>>,
}

/// `g_c(x) = Σ_{γ ∈ B(c,c)} φ(γ* x) · y` on a representative `c` of each
/// input-isomorphism class, carried to the other cells `c2` of the class by
/// one chosen `β ∈ B(c, c2)`; cells outside these classes get zero.
pub struct SymmetrizedField {
    terms: Vec<Term>,
    /// For each cell: the term it belongs to and the position map of the
    /// propagating isomorphism `β` (representative position → own position).
    routes: Vec<Vec<(usize, Vec<usize>)>>,
}

/// Builds a [`SymmetrizedField`] from `(representative, φ, y)` triples. The
/// propagating isomorphism for each cell is the first of `B(c, c2)` in
/// canonical order; see [`SymmetrizedField::with_propagator`].
pub fn symmetrize(
    net: &TypedNetwork,
    terms: Vec<(CellId, Box<dyn RawFunction>, Vec<f64>)>,
) -> Result<SymmetrizedField, FieldError> {
    let mut routes: Vec<Vec<(usize, Vec<usize>)>> = alloc::vec![Vec::new(); net.num_cells()];
    let mut built = Vec::with_capacity(terms.len());
    for (k, (rep, raw, direction)) in terms.into_iter().enumerate() {
        if rep.index() >= net.num_cells() {
            return Err(FieldError::UnknownCell { cell: rep });
        }
        if direction.len() != net.dim(rep) {
            return Err(FieldError::Dimension(DimensionMismatch { expected: net.dim(rep), found: direction.len() }));
        }
        let symmetries = input_isomorphisms(net, rep, rep)
            .expect("cell checked")
            .iter()
            .map(|g| g.position_map(net))
            .collect();
        for c2 in net.cells() {
            if let Some(beta) = input_isomorphisms(net, rep, c2).expect("cell checked").first() {
                routes[c2.index()].push((k, beta.position_map(net)));
            }
        }
        built.push(Term { representative: rep, raw, direction, symmetries });
    }
    Ok(SymmetrizedField { terms: built, routes })
}

impl SymmetrizedField {
    /// Replaces the propagating isomorphism used for `beta.target`.
    pub fn with_propagator(mut self, net: &TypedNetwork, beta: &InputIsomorphism) -> Self {
        let map = beta.position_map(net);
        for (k, route) in self.routes[beta.target.index()].iter_mut() {
            if self.terms[*k].representative == beta.source {
                *route = map.clone();
            }
        }
        self
    }

    pub fn representatives(&self) -> impl Iterator<Item = CellId> + '_ {
        self.terms.iter().map(|t| t.representative)
    }

    /// `|B(c, c)|` for the representative of term `k`.
    pub fn symmetry_count(&self, k: usize) -> usize {
        self.terms[k].symmetries.len()
    }
}

impl CellField for SymmetrizedField {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        let routes = self.routes.get(cell.index()).ok_or(FieldError::UnknownCell { cell })?;
        let mut tuple: Vec<&[f64]> = Vec::new();
        for (k, beta) in routes {
            let term = &self.terms[*k];
            if inputs.len() != beta.len() {
                return Err(FieldError::Arity { cell, expected: beta.len(), found: inputs.len() });
            }
            let mut total = 0.0;
            for gamma in &term.symmetries {
                tuple.clear();
                tuple.extend(gamma.iter().map(|&i| inputs[beta[i]]));
                total += term.raw.eval(&tuple).map_err(|e| relabel(e, cell))?;
            }
            for (o, y) in out.iter_mut().zip(&term.direction) {
                *o += total * y;
            }
        }
        Ok(())
    }
}

fn relabel(e: FieldError, cell: CellId) -> FieldError {
    match e {
        FieldError::Domain { operation, .. } => FieldError::Domain { cell, operation },
        FieldError::NonFinite { .. } => FieldError::NonFinite { cell },
        other => other,
    }
}
