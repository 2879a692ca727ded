//! Layout of network states as flat `f64` vectors.

use alloc::vec::Vec;

use crate::math;
use crate::network::CellId;

/// Block structure of the state space: cell `c` owns `dims[c]` consecutive
/// scalars starting at `offsets[c]`, in cell declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateLayout {
    offsets: Vec<usize>,
    dims: Vec<usize>,
    total: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("state has {found} scalar entries, layout expects {expected}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub found: usize,
}

impl StateLayout {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut total = 0;
        for &d in &dims {
            offsets.push(total);
            total += d;
        }
        Self { offsets, dims, total }
    }

    pub fn num_cells(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension of the state space.
    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn dim(&self, c: CellId) -> usize {
        self.dims[c.index()]
    }

    pub fn offset(&self, c: CellId) -> usize {
        self.offsets[c.index()]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn range(&self, c: CellId) -> core::ops::Range<usize> {
        let o = self.offsets[c.index()];
        o..o + self.dims[c.index()]
    }

    pub fn cell<'a>(&self, x: &'a [f64], c: CellId) -> &'a [f64] {
        &x[self.range(c)]
    }

    pub fn cell_mut<'a>(&self, x: &'a mut [f64], c: CellId) -> &'a mut [f64] {
        let r = self.range(c);
        &mut x[r]
    }

    pub fn check(&self, x: &[f64]) -> Result<(), DimensionMismatch> {
        if x.len() == self.total {
            Ok(())
        } else {
            Err(DimensionMismatch { expected: self.total, found: x.len() })
        }
    }

    /// Sup-norm distance between the states of two cells, or `None` when the
    /// cells live in spaces of different dimension and cannot be compared.
    pub fn cell_distance(&self, x: &[f64], a: CellId, b: CellId) -> Option<f64> {
        if self.dim(a) != self.dim(b) {
            return None;
        }
        Some(sup_distance(self.cell(x, a), self.cell(x, b)))
    }
}

/// `max_i |v_i|`, the norm used throughout the crate.
pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| {
        let a = math::abs(x);
        if a > m || a.is_nan() { a } else { m }
    })
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (&x, &y)| {
        let d = math::abs(x - y);
        if d > m || d.is_nan() { d } else { m }
    })
}
