use alloc::vec::Vec;

use super::{Coloring, ColoringError};
use crate::network::{CellId, TypedNetwork};

/// Distances in `(tol, AMBIGUITY_FACTOR · tol]` are neither equal nor
/// unequal.
pub const AMBIGUITY_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SynchronyCheck {
    /// `x ∈ Δ_col`: same-colored cells within `tol`, others beyond
    /// `AMBIGUITY_FACTOR · tol`.
    pub member: bool,
    /// Pairs whose distance fell in the gray band.
    pub ambiguous: Vec<(CellId, CellId)>,
    /// Largest distance between same-colored cells.
    pub max_same_color_deviation: f64,
    /// Smallest distance between differently colored cells of equal
    /// dimension (`+∞` when there is no such pair).
    pub min_separation: f64,
}

/// Tests membership of `x` in the synchrony space of `col`. Cells of
/// different dimension always count as unequal.
pub fn in_synchrony_space(
    net: &TypedNetwork,
    col: &Coloring,
    x: &[f64],
    tol: f64,
) -> Result<SynchronyCheck, ColoringError> {
    if col.num_cells() != net.num_cells() {
        return Err(ColoringError::SizeMismatch { expected: net.num_cells(), found: col.num_cells() });
    }
    let layout = net.layout();
    layout.check(x)?;
    let wide = AMBIGUITY_FACTOR * tol;
    let mut check = SynchronyCheck {
        member: true,
        ambiguous: Vec::new(),
        max_same_color_deviation: 0.0,
        min_separation: f64::INFINITY,
    };
    for a in net.cells() {
        for b in net.cells().skip(a.index() + 1) {
            let d = layout.cell_distance(x, a, b);
            if col.same_color(a, b) {
                let d = d.unwrap_or(f64::INFINITY);
                check.max_same_color_deviation = check.max_same_color_deviation.max(d);
                if d > tol {
                    check.member = false;
                    if d <= wide {
                        check.ambiguous.push((a, b));
                    }
                }
            } else if let Some(d) = d {
                check.min_separation = check.min_separation.min(d);
                if d <= wide {
                    check.member = false;
                    if d > tol {
                        check.ambiguous.push((a, b));
                    }
                }
            }
        }
    }
    Ok(check)
}
