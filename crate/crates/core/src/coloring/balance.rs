use alloc::vec::Vec;

use super::{Coloring, ColoringError};
use crate::network::{input_isomorphisms, ArrowTypeId, CellId, InputIsomorphism, TypedNetwork};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnbalanceReason {
    /// The two cells have different cell types.
    CellTypeMismatch,
    /// No input isomorphism maps tails to tails of the same color.
    NoColorPreservingIsomorphism,
}

/// Evidence for or against balancedness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BalancednessCertificate {
    /// One color-preserving isomorphism per ordered pair of distinct
    /// same-colored cells.
    Balanced { witnesses: Vec<InputIsomorphism> },
    Unbalanced { cells: (CellId, CellId), reason: UnbalanceReason },
}

impl BalancednessCertificate {
    pub fn is_balanced(&self) -> bool {
        matches!(self, BalancednessCertificate::Balanced { .. })
    }

    /// Re-checks the certificate against the definition.
    pub fn verify(&self, net: &TypedNetwork, col: &Coloring) -> bool {
        match self {
            BalancednessCertificate::Balanced { witnesses } => {
                let mut expected = 0;
                for class in col.classes() {
                    expected += class.len() * (class.len() - 1);
                }
                witnesses.len() == expected
                    && witnesses.iter().all(|b| {
                        b.is_valid(net)
                            && col.same_color(b.source, b.target)
                            && net
                                .input_arrows(b.source)
                                .iter()
                                .zip(&b.images)
                                .all(|(&a, &ba)| col.same_color(net.tail(a), net.tail(ba)))
                    })
            }
            BalancednessCertificate::Unbalanced { cells: (c, c2), reason } => {
                col.same_color(*c, *c2)
                    && match reason {
                        UnbalanceReason::CellTypeMismatch => net.cell_type(*c) != net.cell_type(*c2),
                        UnbalanceReason::NoColorPreservingIsomorphism => input_isomorphisms(net, *c, *c2)
                            .map(|isos| {
                                !isos.iter().any(|b| {
                                    net.input_arrows(*c)
                                        .iter()
                                        .zip(&b.images)
                                        .all(|(&a, &ba)| col.same_color(net.tail(a), net.tail(ba)))
                                })
                            })
                            .unwrap_or(false),
                    }
            }
        }
    }
}

/// A color-preserving input isomorphism `I(c) → I(c2)`, if one exists.
///
/// Tails only need to agree in color and arrows in type, so a greedy match
/// per `(type, color)` class always succeeds when the class counts agree.
pub fn color_preserving_isomorphism(
    net: &TypedNetwork,
    col: &Coloring,
    c: CellId,
    c2: CellId,
) -> Option<InputIsomorphism> {
    if net.cell_type(c) != net.cell_type(c2) {
        return None;
    }
    let src = net.input_arrows(c);
    let dst = net.input_arrows(c2);
    if src.len() != dst.len() {
        return None;
    }
    let mut used = alloc::vec![false; dst.len()];
    let mut images = Vec::with_capacity(src.len());
    for &a in src {
        let (ty, color) = (net.arrow_type(a), col.color(net.tail(a)));
        let j = dst
            .iter()
            .enumerate()
            .position(|(j, &b)| !used[j] && net.arrow_type(b) == ty && col.color(net.tail(b)) == color)?;
        used[j] = true;
        images.push(dst[j]);
    }
    Some(InputIsomorphism { source: c, target: c2, images })
}

/// Decides balancedness and returns a certificate either way. A coloring
/// that puts cells of different types together is reported unbalanced with
/// a [`UnbalanceReason::CellTypeMismatch`] witness.
pub fn is_balanced(net: &TypedNetwork, col: &Coloring) -> Result<BalancednessCertificate, ColoringError> {
    if col.num_cells() != net.num_cells() {
        return Err(ColoringError::SizeMismatch { expected: net.num_cells(), found: col.num_cells() });
    }
    if let Some(pair) = col.type_conflict(net) {
        return Ok(BalancednessCertificate::Unbalanced { cells: pair, reason: UnbalanceReason::CellTypeMismatch });
    }
    let mut witnesses = Vec::new();
    for class in col.classes() {
        for &c in &class {
            for &c2 in &class {
                if c == c2 {
                    continue;
                }
                match color_preserving_isomorphism(net, col, c, c2) {
                    Some(b) => witnesses.push(b),
                    None => {
                        return Ok(BalancednessCertificate::Unbalanced {
                            cells: (c, c2),
                            reason: UnbalanceReason::NoColorPreservingIsomorphism,
                        })
                    }
                }
            }
        }
    }
    Ok(BalancednessCertificate::Balanced { witnesses })
}

/// Cheap balancedness test without building witnesses.
pub(crate) fn balanced_fast(net: &TypedNetwork, col: &Coloring) -> bool {
    let sigs = signatures(net, col);
    let mut first: Vec<Option<usize>> = alloc::vec![None; col.num_colors()];
    for c in net.cells() {
        let k = col.color(c);
        match first[k] {
            None => first[k] = Some(c.index()),
            Some(r) => {
                if net.cell_type(CellId::new(r)) != net.cell_type(c) || sigs[r] != sigs[c.index()] {
                    return false;
                }
            }
        }
    }
    true
}

/// Per cell, the sorted multiset of `(input arrow type, tail color)`.
fn signatures(net: &TypedNetwork, col: &Coloring) -> Vec<Vec<(ArrowTypeId, usize)>> {
    net.cells()
        .map(|c| {
            let mut s: Vec<(ArrowTypeId, usize)> =
                net.input_arrows(c).iter().map(|&a| (net.arrow_type(a), col.color(net.tail(a)))).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Coarsest balanced coloring finer than both `col` and the cell-type
/// partition, by iterated signature refinement.
pub fn refine_to_balanced(net: &TypedNetwork, col: &Coloring) -> Result<Coloring, ColoringError> {
    let mut current = col.meet(&Coloring::by_cell_type(net))?;
    loop {
        let sigs = signatures(net, &current);
        let labels: Vec<(usize, &Vec<(ArrowTypeId, usize)>)> =
            net.cells().map(|c| (current.color(c), &sigs[c.index()])).collect();
        let next = Coloring::from_labels(&labels);
        if next.num_colors() == current.num_colors() {
            return Ok(current);
        }
        current = next;
    }
}
