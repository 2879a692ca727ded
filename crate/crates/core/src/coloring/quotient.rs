use alloc::vec::Vec;

use super::balance::balanced_fast;
use super::{Coloring, ColoringError};
use crate::network::{ArrowSpec, CellId, CellSpec, TypedNetwork};

/// Quotient of a network by a balanced coloring. Quotient cell `k` stands
/// for color `k`; its input arrows are the representative's, in the same
/// order, so input positions agree between a cell and its image.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub network: TypedNetwork,
    /// Representative (lowest cell id) of each color.
    pub representatives: Vec<CellId>,
    /// Quotient cell of each original cell.
    pub projection: Vec<CellId>,
}

impl Quotient {
    /// Restricts a state of the original network to the representatives.
    pub fn project_state(&self, net: &TypedNetwork, x: &[f64]) -> Vec<f64> {
        let layout = net.layout();
        self.representatives.iter().flat_map(|&r| layout.cell(x, r).iter().copied()).collect()
    }

    /// Copies each quotient cell's state to every cell of its color.
    pub fn lift_state(&self, net: &TypedNetwork, y: &[f64]) -> Vec<f64> {
        let ql = self.network.layout();
        net.cells().flat_map(|c| ql.cell(y, self.projection[c.index()]).iter().copied()).collect()
    }
}

/// Builds the quotient network of a balanced coloring.
pub fn quotient_network(net: &TypedNetwork, col: &Coloring) -> Result<Quotient, ColoringError> {
    if col.num_cells() != net.num_cells() {
        return Err(ColoringError::SizeMismatch { expected: net.num_cells(), found: col.num_cells() });
    }
    if !balanced_fast(net, col) {
        let pair = super::is_balanced(net, col)?;
        let (a, b) = match pair {
            super::BalancednessCertificate::Unbalanced { cells, .. } => cells,
            super::BalancednessCertificate::Balanced { .. } => unreachable!("fast and certified checks agree"),
        };
        return Err(ColoringError::Unbalanced(net.cell_name(a).into(), net.cell_name(b).into()));
    }
    let representatives: Vec<CellId> = col.classes().iter().map(|class| class[0]).collect();
    let projection: Vec<CellId> = net.cells().map(|c| CellId::new(col.color(c))).collect();
    let original = net.to_spec();
    let mut spec = original.clone();
    spec.cells = representatives
        .iter()
        .map(|&r| CellSpec { id: net.cell_name(r).into(), cell_type: original.cells[r.index()].cell_type.clone() })
        .collect();
    spec.arrows = Vec::new();
    for &r in &representatives {
        for &a in net.input_arrows(r) {
            if net.is_internal(a) {
                continue;
            }
            let tail = representatives[col.color(net.tail(a))];
            spec.arrows.push(ArrowSpec {
                id: net.arrow_name(a).into(),
                arrow_type: net.arrow_type_name(net.arrow_type(a)).into(),
                tail: net.cell_name(tail).into(),
                head: net.cell_name(r).into(),
            });
        }
    }
    let network = spec.build().expect("quotient of a valid network is valid");
    Ok(Quotient { network, representatives, projection })
}
