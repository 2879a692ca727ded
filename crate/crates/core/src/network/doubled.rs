use alloc::format;
use alloc::vec::Vec;

use super::{ArrowSpec, CellId, CellSpec, NetworkSpec, TypedNetwork};

/// Two disconnected copies of a network with identical cell and arrow types.
#[derive(Clone, Debug)]
pub struct DoubledNetwork {
    pub network: TypedNetwork,
    /// `first[c]` is the copy of original cell `c` in the first copy.
    pub first: Vec<CellId>,
    /// `second[c]` is the copy of original cell `c` in the second copy.
    pub second: Vec<CellId>,
}

impl DoubledNetwork {
    /// Original cell of a doubled-network cell, and which copy (1 or 2) it is in.
    pub fn original(&self, c: CellId) -> (CellId, u8) {
        let n = self.first.len();
        if c.index() < n {
            (CellId::new(c.index()), 1)
        } else {
            (CellId::new(c.index() - n), 2)
        }
    }

    /// Doubled state `(x, y)` from states of the first and second copy.
    pub fn join_states(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(x.len() + y.len());
        z.extend_from_slice(x);
        z.extend_from_slice(y);
        z
    }
}

/// Builds the doubled network. Cells and arrows of copy `k` are renamed
/// `<id>.k`; cell `c` of the original becomes `c` (copy 1) and `c + n`
/// (copy 2).
pub fn doubled_network(net: &TypedNetwork) -> DoubledNetwork {
    let spec = net.to_spec();
    let mut doubled = NetworkSpec {
        cell_types: spec.cell_types.clone(),
        arrow_types: spec.arrow_types.clone(),
        cells: Vec::new(),
        arrows: Vec::new(),
    };
    for k in 1..=2 {
        doubled.cells.extend(spec.cells.iter().map(|c| CellSpec {
            id: format!("{}.{k}", c.id),
            cell_type: c.cell_type.clone(),
        }));
    }
    for k in 1..=2 {
        doubled.arrows.extend(spec.arrows.iter().map(|a| ArrowSpec {
            id: format!("{}.{k}", a.id),
            arrow_type: a.arrow_type.clone(),
            tail: format!("{}.{k}", a.tail),
            head: format!("{}.{k}", a.head),
        }));
    }
    let n = net.num_cells();
    let network = TypedNetwork::new(&doubled).expect("copies of a valid network are valid");
    DoubledNetwork {
        network,
        first: (0..n).map(CellId::new).collect(),
        second: (n..2 * n).map(CellId::new).collect(),
    }
}
