//! Typed networks: cells, arrows, their types, input sets and input
//! isomorphisms.
//!
//! Networks are described by an untrusted [`NetworkSpec`] (names only) and
//! turned into an immutable [`TypedNetwork`] by validation. Validation also
//! inserts one internal self-arrow per cell. Its arrow type is reserved and
//! unique per cell type, so the dependence of a cell on its own state is
//! carried by the same machinery as every other input: the internal arrow is
//! always the first entry of the input set.

mod doubled;
mod iso;
mod validate;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use doubled::{doubled_network, DoubledNetwork};
pub use iso::{input_isomorphisms, pullback, InputIsomorphism};
pub use validate::{validate_network, Endpoint, ValidationReport, Violation};

use crate::state::StateLayout;

/// Prefix reserved for generated internal arrows and arrow types.
pub const INTERNAL_PREFIX: &str = "@self:";

macro_rules! index_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(usize);

        impl $name {
            pub const fn new(index: usize) -> Self {
                Self(index)
            }

            pub const fn index(self) -> usize {
                self.0
            }
        }
    };
}

index_type!(
    /// Index of a cell in declaration order.
    CellId
);
index_type!(
    /// Index of an arrow. Explicit arrows come first in declaration order,
    /// internal self-arrows follow in cell order.
    ArrowId
);
index_type!(CellTypeId);
index_type!(
    /// Index of an arrow type. Declared types come first, the reserved
    /// internal types follow in cell-type order.
    ArrowTypeId
);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellTypeSpec {
    pub id: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSpec {
    pub id: String,
    pub cell_type: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowSpec {
    pub id: String,
    pub arrow_type: String,
    pub tail: String,
    pub head: String,
}

/// Untrusted, name-based description of a network.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetworkSpec {
    pub cell_types: Vec<CellTypeSpec>,
    pub arrow_types: Vec<String>,
    pub cells: Vec<CellSpec>,
    pub arrows: Vec<ArrowSpec>,
}

impl NetworkSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cell_type(mut self, id: &str, dim: usize) -> Self {
        self.cell_types.push(CellTypeSpec { id: id.into(), dim });
        self
    }

    pub fn arrow_type(mut self, id: &str) -> Self {
        self.arrow_types.push(id.into());
        self
    }

    pub fn cell(mut self, id: &str, cell_type: &str) -> Self {
        self.cells.push(CellSpec { id: id.into(), cell_type: cell_type.into() });
        self
    }

    pub fn arrow(mut self, id: &str, arrow_type: &str, tail: &str, head: &str) -> Self {
        self.arrows.push(ArrowSpec {
            id: id.into(),
            arrow_type: arrow_type.into(),
            tail: tail.into(),
            head: head.into(),
        });
        self
    }

    /// Validates and builds the network.
    pub fn build(&self) -> Result<TypedNetwork, NetworkError> {
        TypedNetwork::new(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellType {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowType {
    pub name: String,
    /// `Some(t)` for the reserved self-arrow type of cell type `t`.
    pub internal: Option<CellTypeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
    pub cell_type: CellTypeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub arrow_type: ArrowTypeId,
    pub tail: CellId,
    pub head: CellId,
    pub internal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("unknown cell {0:?}")]
    UnknownCell(String),
    #[error("cell index {0} out of range")]
    CellOutOfRange(usize),
    #[error(transparent)]
    Dimension(#[from] crate::state::DimensionMismatch),
    #[error("input isomorphism from {source_cell} to {target_cell} does not belong to this network")]
    ForeignIsomorphism { source_cell: String, target_cell: String },
    #[error("cannot compose isomorphisms: first ends at {first_target}, second starts at {second_source}")]
    NotComposable { first_target: String, second_source: String },
    #[error("cell set is not closed under inputs: {cell} feeds {head}")]
    NotInputClosed { cell: String, head: String },
}

/// All arrows pointing at `cell`, internal self-arrow first, then explicit
/// arrows in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSet {
    pub cell: CellId,
    pub arrows: Vec<ArrowId>,
}

impl InputSet {
    /// Arrows without the internal self-arrow.
    pub fn explicit<'a>(&'a self, net: &'a TypedNetwork) -> impl Iterator<Item = ArrowId> + 'a {
        self.arrows.iter().copied().filter(move |&a| !net.is_internal(a))
    }

    /// Tails of the explicit arrows, in input order (with repetitions).
    pub fn input_cells(&self, net: &TypedNetwork) -> Vec<CellId> {
        self.explicit(net).map(|a| net.tail(a)).collect()
    }
}

/// A validated network with types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedNetwork {
    cell_types: Vec<CellType>,
    arrow_types: Vec<ArrowType>,
    cells: Vec<Cell>,
    arrows: Vec<Arrow>,
    explicit_arrows: usize,
    declared_arrow_types: usize,
    inputs: Vec<Vec<ArrowId>>,
    layout: StateLayout,
    cell_index: BTreeMap<String, CellId>,
}

impl TypedNetwork {
    pub fn new(spec: &NetworkSpec) -> Result<Self, NetworkError> {
        let report = validate_network(spec);
        if !report.is_valid() {
            return Err(NetworkError::Invalid(report));
        }
        Ok(Self::assemble(spec))
    }

    fn assemble(spec: &NetworkSpec) -> Self {
        let cell_types: Vec<CellType> = spec
            .cell_types
            .iter()
            .map(|t| CellType { name: t.id.clone(), dim: t.dim })
            .collect();
        let ct_index: BTreeMap<&str, usize> =
            spec.cell_types.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        let mut arrow_types: Vec<ArrowType> = spec
            .arrow_types
            .iter()
            .map(|name| ArrowType { name: name.clone(), internal: None })
            .collect();
        let at_index: BTreeMap<&str, usize> =
            spec.arrow_types.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let declared_arrow_types = arrow_types.len();
        for (i, t) in cell_types.iter().enumerate() {
            arrow_types.push(ArrowType {
                name: format!("{INTERNAL_PREFIX}{}", t.name),
                internal: Some(CellTypeId(i)),
            });
        }

        let cells: Vec<Cell> = spec
            .cells
            .iter()
            .map(|c| Cell { name: c.id.clone(), cell_type: CellTypeId(ct_index[c.cell_type.as_str()]) })
            .collect();
        let cell_index: BTreeMap<String, CellId> =
            cells.iter().enumerate().map(|(i, c)| (c.name.clone(), CellId(i))).collect();

        let mut arrows: Vec<Arrow> = spec
            .arrows
            .iter()
            .map(|a| Arrow {
                name: a.id.clone(),
                arrow_type: ArrowTypeId(at_index[a.arrow_type.as_str()]),
                tail: cell_index[&a.tail],
                head: cell_index[&a.head],
                internal: false,
            })
            .collect();
        let explicit_arrows = arrows.len();
        for (i, c) in cells.iter().enumerate() {
            arrows.push(Arrow {
                name: format!("{INTERNAL_PREFIX}{}", c.name),
                arrow_type: ArrowTypeId(declared_arrow_types + c.cell_type.0),
                tail: CellId(i),
                head: CellId(i),
                internal: true,
            });
        }

        let mut inputs: Vec<Vec<ArrowId>> =
            (0..cells.len()).map(|i| alloc::vec![ArrowId(explicit_arrows + i)]).collect();
        for (i, a) in arrows[..explicit_arrows].iter().enumerate() {
            inputs[a.head.0].push(ArrowId(i));
        }

        let layout = StateLayout::new(cells.iter().map(|c| cell_types[c.cell_type.0].dim).collect());
        Self {
            cell_types,
            arrow_types,
            cells,
            arrows,
            explicit_arrows,
            declared_arrow_types,
            inputs,
            layout,
            cell_index,
        }
    }

    /// Name-based description of the network without internal arrows.
    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            cell_types: self
                .cell_types
                .iter()
                .map(|t| CellTypeSpec { id: t.name.clone(), dim: t.dim })
                .collect(),
            arrow_types: self.arrow_types[..self.declared_arrow_types].iter().map(|t| t.name.clone()).collect(),
            cells: self
                .cells
                .iter()
                .map(|c| CellSpec { id: c.name.clone(), cell_type: self.cell_types[c.cell_type.0].name.clone() })
                .collect(),
            arrows: self.arrows[..self.explicit_arrows]
                .iter()
                .map(|a| ArrowSpec {
                    id: a.name.clone(),
                    arrow_type: self.arrow_types[a.arrow_type.0].name.clone(),
                    tail: self.cells[a.tail.0].name.clone(),
                    head: self.cells[a.head.0].name.clone(),
                })
                .collect(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = CellId> + Clone {
        (0..self.cells.len()).map(CellId)
    }

    pub fn cell(&self, c: CellId) -> &Cell {
        &self.cells[c.0]
    }

    pub fn cell_name(&self, c: CellId) -> &str {
        &self.cells[c.0].name
    }

    pub fn cell_id(&self, name: &str) -> Option<CellId> {
        self.cell_index.get(name).copied()
    }

    /// Like [`cell_id`](Self::cell_id) but reports unknown names as errors.
    pub fn require_cell(&self, name: &str) -> Result<CellId, NetworkError> {
        self.cell_id(name).ok_or_else(|| NetworkError::UnknownCell(name.into()))
    }

    pub(crate) fn check_cell(&self, c: CellId) -> Result<(), NetworkError> {
        if c.0 < self.cells.len() {
            Ok(())
        } else {
            Err(NetworkError::CellOutOfRange(c.0))
        }
    }

    pub fn cell_type(&self, c: CellId) -> CellTypeId {
        self.cells[c.0].cell_type
    }

    pub fn cell_types(&self) -> &[CellType] {
        &self.cell_types
    }

    pub fn cell_type_name(&self, t: CellTypeId) -> &str {
        &self.cell_types[t.0].name
    }

    /// State dimension of cell `c`.
    pub fn dim(&self, c: CellId) -> usize {
        self.layout.dim(c)
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    /// Number of explicit (user declared) arrows.
    pub fn num_explicit_arrows(&self) -> usize {
        self.explicit_arrows
    }

    /// Number of arrows including internal self-arrows.
    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a.0]
    }

    pub fn explicit_arrows(&self) -> impl ExactSizeIterator<Item = ArrowId> {
        (0..self.explicit_arrows).map(ArrowId)
    }

    /// All arrows; internal ones are listed only when `include_internal`.
    pub fn arrows(&self, include_internal: bool) -> impl Iterator<Item = ArrowId> {
        let n = if include_internal { self.arrows.len() } else { self.explicit_arrows };
        (0..n).map(ArrowId)
    }

    pub fn arrow_id(&self, name: &str) -> Option<ArrowId> {
        self.arrows.iter().position(|a| a.name == name).map(ArrowId)
    }

    pub fn arrow_name(&self, a: ArrowId) -> &str {
        &self.arrows[a.0].name
    }

    pub fn arrow_type(&self, a: ArrowId) -> ArrowTypeId {
        self.arrows[a.0].arrow_type
    }

    pub fn tail(&self, a: ArrowId) -> CellId {
        self.arrows[a.0].tail
    }

    pub fn head(&self, a: ArrowId) -> CellId {
        self.arrows[a.0].head
    }

    pub fn is_internal(&self, a: ArrowId) -> bool {
        self.arrows[a.0].internal
    }

    /// The internal self-arrow of `c`.
    pub fn internal_arrow(&self, c: CellId) -> ArrowId {
        ArrowId(self.explicit_arrows + c.0)
    }

    pub fn num_arrow_types(&self) -> usize {
        self.arrow_types.len()
    }

    pub fn num_declared_arrow_types(&self) -> usize {
        self.declared_arrow_types
    }

    pub fn arrow_types(&self) -> &[ArrowType] {
        &self.arrow_types
    }

    pub fn arrow_type_name(&self, t: ArrowTypeId) -> &str {
        &self.arrow_types[t.0].name
    }

    pub fn arrow_type_id(&self, name: &str) -> Option<ArrowTypeId> {
        self.arrow_types.iter().position(|t| t.name == name).map(ArrowTypeId)
    }

    /// Input set `I(c)`, including the internal self-arrow at position 0.
    pub fn inputs(&self, c: CellId) -> Result<InputSet, NetworkError> {
        self.check_cell(c)?;
        Ok(InputSet { cell: c, arrows: self.inputs[c.0].clone() })
    }

    /// Borrowed input arrows of `c` in canonical order (internal first).
    pub fn input_arrows(&self, c: CellId) -> &[ArrowId] {
        &self.inputs[c.0]
    }

    /// Number of arrows in `I(c)`, internal arrow included.
    pub fn arity(&self, c: CellId) -> usize {
        self.inputs[c.0].len()
    }

    /// Sorted multiset of input arrow types. Two cells are input isomorphic
    /// exactly when their signatures agree.
    pub fn input_signature(&self, c: CellId) -> Vec<ArrowTypeId> {
        let mut sig: Vec<ArrowTypeId> = self.inputs[c.0].iter().map(|&a| self.arrow_type(a)).collect();
        sig.sort_unstable();
        sig
    }

    pub fn input_isomorphic(&self, a: CellId, b: CellId) -> bool {
        self.input_signature(a) == self.input_signature(b)
    }

    /// Class index of every cell under input isomorphism, numbered by first
    /// occurrence in cell order.
    pub fn input_classes(&self) -> Vec<usize> {
        let mut reps: Vec<Vec<ArrowTypeId>> = Vec::new();
        self.cells()
            .map(|c| {
                let sig = self.input_signature(c);
                match reps.iter().position(|s| *s == sig) {
                    Some(i) => i,
                    None => {
                        reps.push(sig);
                        reps.len() - 1
                    }
                }
            })
            .collect()
    }

    /// Cells that are direct or indirect inputs of `c` (excluding `c` unless
    /// it lies on a cycle through itself via explicit arrows).
    pub fn upstream(&self, c: CellId) -> Vec<CellId> {
        let mut seen = alloc::vec![false; self.cells.len()];
        let mut stack: Vec<CellId> = alloc::vec![c];
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            for &a in &self.inputs[v.0] {
                if self.is_internal(a) {
                    continue;
                }
                let t = self.tail(a);
                if !seen[t.0] {
                    seen[t.0] = true;
                    out.push(t);
                    stack.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// True when every cell is an indirect input of every cell.
    pub fn is_transitive(&self) -> bool {
        let n = self.cells.len();
        self.cells().all(|c| self.upstream(c).len() == n)
    }

    /// Subnetwork induced by `keep`, which must contain every input cell of
    /// its members. Returns the subnetwork and the original id of each of its
    /// cells.
    pub fn input_closed_subnetwork(&self, keep: &[CellId]) -> Result<(TypedNetwork, Vec<CellId>), NetworkError> {
        let mut inside = alloc::vec![false; self.cells.len()];
        for &c in keep {
            self.check_cell(c)?;
            inside[c.0] = true;
        }
        for a in self.explicit_arrows() {
            let (t, h) = (self.tail(a), self.head(a));
            if inside[h.0] && !inside[t.0] {
                return Err(NetworkError::NotInputClosed {
                    cell: self.cell_name(t).into(),
                    head: self.cell_name(h).into(),
                });
            }
        }
        let full = self.to_spec();
        let kept: Vec<CellId> = self.cells().filter(|c| inside[c.0]).collect();
        let spec = NetworkSpec {
            cell_types: full.cell_types,
            arrow_types: full.arrow_types,
            cells: kept.iter().map(|c| full.cells[c.0].clone()).collect(),
            arrows: full
                .arrows
                .into_iter()
                .enumerate()
                .filter(|(i, _)| inside[self.head(ArrowId(*i)).0])
                .map(|(_, a)| a)
                .collect(),
        };
        Ok((TypedNetwork::new(&spec)?, kept))
    }

    /// Formats a list of cells as `a⋈b⋈c`.
    pub fn join_names(&self, cells: &[CellId]) -> String {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                s.push('⋈');
            }
            s.push_str(self.cell_name(*c));
        }
        s
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
