//! Colorings (partitions of the cell set), the finer/coarser order,
//! balancedness, enumeration of balanced colorings, synchrony spaces and
//! quotient networks.

mod balance;
mod enumerate;
mod quotient;
mod synchrony;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub use balance::{
    color_preserving_isomorphism, is_balanced, refine_to_balanced, BalancednessCertificate, UnbalanceReason,
};
pub use enumerate::{brute_force_balanced, enumerate_balanced, enumerate_balanced_with, BRUTE_FORCE_CAP, DEFAULT_ENUMERATION_CAP};
pub use quotient::{quotient_network, Quotient};
pub use synchrony::{in_synchrony_space, SynchronyCheck, AMBIGUITY_FACTOR};

use crate::network::{CellId, TypedNetwork};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ColoringError {
    #[error("coloring covers {found} cells, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("cell index {0} listed twice or out of range")]
    BadCell(usize),
    #[error("{cells} cells exceed the enumeration cap of {cap}")]
    TooManyCells { cells: usize, cap: usize },
    #[error("coloring is not balanced: {0} and {1} admit no color-preserving input isomorphism")]
    Unbalanced(String, String),
    #[error(transparent)]
    Dimension(#[from] crate::state::DimensionMismatch),
}

/// A partition of the cell set in canonical form: colors are numbered by
/// first occurrence in cell order, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coloring {
    colors: Vec<usize>,
}

impl Coloring {
    /// Every cell its own color.
    pub fn trivial(n: usize) -> Self {
        Self { colors: (0..n).collect() }
    }

    /// All cells one color.
    pub fn uniform(n: usize) -> Self {
        Self { colors: alloc::vec![0; n] }
    }

    /// Canonicalizes arbitrary labels: cells with equal labels share a color.
    pub fn from_labels<T: Ord>(labels: &[T]) -> Self {
        let mut seen: BTreeMap<&T, usize> = BTreeMap::new();
        let colors = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Self { colors }
    }

    /// Coloring whose non-singleton classes are `classes`; unlisted cells are
    /// singletons.
    pub fn from_classes(n: usize, classes: &[Vec<CellId>]) -> Result<Self, ColoringError> {
        let mut labels: Vec<usize> = (0..n).map(|i| n + i).collect();
        let mut used = alloc::vec![false; n];
        for (k, class) in classes.iter().enumerate() {
            for c in class {
                let i = c.index();
                if i >= n || used[i] {
                    return Err(ColoringError::BadCell(i));
                }
                used[i] = true;
                labels[i] = k;
            }
        }
        Ok(Self::from_labels(&labels))
    }

    /// Same as [`from_classes`](Self::from_classes) with cells given by name.
    pub fn from_named_classes(net: &TypedNetwork, classes: &[&[&str]]) -> Result<Self, crate::network::NetworkError> {
        let ids: Vec<Vec<CellId>> = classes
            .iter()
            .map(|cl| cl.iter().map(|n| net.require_cell(n)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        Ok(Self::from_classes(net.num_cells(), &ids).expect("names are unique cells"))
    }

    /// Partition of the cells by cell type.
    pub fn by_cell_type(net: &TypedNetwork) -> Self {
        let labels: Vec<usize> = net.cells().map(|c| net.cell_type(c).index()).collect();
        Self::from_labels(&labels)
    }

    pub fn num_cells(&self) -> usize {
        self.colors.len()
    }

    pub fn num_colors(&self) -> usize {
        self.colors.iter().max().map_or(0, |m| m + 1)
    }

    pub fn color(&self, c: CellId) -> usize {
        self.colors[c.index()]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn same_color(&self, a: CellId, b: CellId) -> bool {
        self.colors[a.index()] == self.colors[b.index()]
    }

    pub fn is_trivial(&self) -> bool {
        self.num_colors() == self.colors.len()
    }

    /// Color classes in color order; cells within a class in cell order.
    pub fn classes(&self) -> Vec<Vec<CellId>> {
        let mut out: Vec<Vec<CellId>> = alloc::vec![Vec::new(); self.num_colors()];
        for (i, &k) in self.colors.iter().enumerate() {
            out[k].push(CellId::new(i));
        }
        out
    }

    /// Classes with at least two cells.
    pub fn nontrivial_classes(&self) -> Vec<Vec<CellId>> {
        self.classes().into_iter().filter(|c| c.len() > 1).collect()
    }

    fn check_size(&self, other: &Coloring) -> Result<(), ColoringError> {
        if self.colors.len() == other.colors.len() {
            Ok(())
        } else {
            Err(ColoringError::SizeMismatch { expected: self.colors.len(), found: other.colors.len() })
        }
    }

    /// `self` is finer than `other`: every class of `self` lies inside a
    /// class of `other`.
    pub fn is_finer(&self, other: &Coloring) -> Result<bool, ColoringError> {
        self.check_size(other)?;
        let mut image: Vec<Option<usize>> = alloc::vec![None; self.num_colors()];
        for (&a, &b) in self.colors.iter().zip(&other.colors) {
            match image[a] {
                None => image[a] = Some(b),
                Some(x) if x != b => return Ok(false),
                Some(_) => {}
            }
        }
        Ok(true)
    }

    pub fn is_strictly_finer(&self, other: &Coloring) -> Result<bool, ColoringError> {
        Ok(self.is_finer(other)? && !other.is_finer(self)?)
    }

    /// Coarsest common refinement: two cells share a color iff they share
    /// one in both colorings.
    pub fn meet(&self, other: &Coloring) -> Result<Coloring, ColoringError> {
        self.check_size(other)?;
        let pairs: Vec<(usize, usize)> = self.colors.iter().copied().zip(other.colors.iter().copied()).collect();
        Ok(Self::from_labels(&pairs))
    }

    /// First pair of same-colored cells with different cell types, if any.
    pub fn type_conflict(&self, net: &TypedNetwork) -> Option<(CellId, CellId)> {
        let mut first: Vec<Option<CellId>> = alloc::vec![None; self.num_colors()];
        for c in net.cells() {
            let k = self.color(c);
            match first[k] {
                None => first[k] = Some(c),
                Some(r) if net.cell_type(r) != net.cell_type(c) => return Some((r, c)),
                Some(_) => {}
            }
        }
        None
    }

    /// Same-colored cells all share a cell type.
    pub fn is_admissible(&self, net: &TypedNetwork) -> bool {
        self.type_conflict(net).is_none()
    }

    /// Human-readable form listing the non-trivial classes, e.g. `{1⋈3, 2⋈4}`.
    pub fn describe(&self, net: &TypedNetwork) -> String {
        let classes = self.nontrivial_classes();
        if classes.is_empty() {
            return String::from("{}");
        }
        let mut s = String::from("{");
        for (i, class) in classes.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&net.join_names(class));
        }
        s.push('}');
        s
    }
}

/// Sorts colorings finest first, then by label vector.
pub fn canonical_sort(colorings: &mut [Coloring]) {
    colorings.sort_by(|a, b| b.num_colors().cmp(&a.num_colors()).then_with(|| a.colors.cmp(&b.colors)));
}

/// `(finer, coarser)` index pairs of the Hasse diagram of the finer-than
/// order restricted to `colorings`.
pub fn hasse_edges(colorings: &[Coloring]) -> Vec<(usize, usize)> {
    let n = colorings.len();
    let finer = |i: usize, j: usize| i != j && colorings[i].is_strictly_finer(&colorings[j]).unwrap_or(false);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if finer(i, j) && !(0..n).any(|k| finer(i, k) && finer(k, j)) {
                edges.push((i, j));
            }
        }
    }
    edges
}
