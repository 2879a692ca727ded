use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{NetworkSpec, INTERNAL_PREFIX};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Tail,
    Head,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::Tail => "tail",
            Endpoint::Head => "head",
        })
    }
}

/// One broken network axiom, with the offending ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyId { kind: &'static str, position: usize },
    ReservedId { kind: &'static str, id: String },
    DuplicateId { kind: &'static str, id: String },
    ZeroDimension { cell_type: String },
    UnknownCellType { cell: String, cell_type: String },
    UnknownArrowType { arrow: String, arrow_type: String },
    UnknownEndpoint { arrow: String, endpoint: Endpoint, cell: String },
    /// Two arrows of the same type connect cells of different types.
    IncompatibleEndpoints {
        arrow: String,
        arrow_type: String,
        endpoint: Endpoint,
        reference_arrow: String,
        expected: String,
        found: String,
    },
}

impl Violation {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptyId { .. } => "empty-id",
            Violation::ReservedId { .. } => "reserved-id",
            Violation::DuplicateId { .. } => "duplicate-id",
            Violation::ZeroDimension { .. } => "zero-dimension",
            Violation::UnknownCellType { .. } => "unknown-cell-type",
            Violation::UnknownArrowType { .. } => "unknown-arrow-type",
            Violation::UnknownEndpoint { .. } => "unknown-endpoint",
            Violation::IncompatibleEndpoints { .. } => "type-compatibility",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId { kind, position } => write!(f, "{kind} #{position} has an empty id"),
            Violation::ReservedId { kind, id } => {
                write!(f, "{kind} id {id:?} uses the reserved prefix {INTERNAL_PREFIX:?}")
            }
            Violation::DuplicateId { kind, id } => write!(f, "duplicate {kind} id {id:?}"),
            Violation::ZeroDimension { cell_type } => {
                write!(f, "cell type {cell_type:?} has state dimension 0")
            }
            Violation::UnknownCellType { cell, cell_type } => {
                write!(f, "cell {cell:?} has unknown type {cell_type:?}")
            }
            Violation::UnknownArrowType { arrow, arrow_type } => {
                write!(f, "arrow {arrow:?} has unknown type {arrow_type:?}")
            }
            Violation::UnknownEndpoint { arrow, endpoint, cell } => {
                write!(f, "arrow {arrow:?} has unknown {endpoint} cell {cell:?}")
            }
            Violation::IncompatibleEndpoints { arrow, arrow_type, endpoint, reference_arrow, expected, found } => write!(
                f,
                "arrow {arrow:?} of type {arrow_type:?} has a {endpoint} of cell type {found:?}, \
                 but arrow {reference_arrow:?} of the same type has {expected:?}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_ids<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
    out: &mut Vec<Violation>,
) -> BTreeMap<&'a str, usize> {
    let mut seen = BTreeMap::new();
    for (i, id) in ids.enumerate() {
        if id.is_empty() {
            out.push(Violation::EmptyId { kind, position: i });
            continue;
        }
        if id.starts_with(INTERNAL_PREFIX) {
            out.push(Violation::ReservedId { kind, id: id.into() });
        }
        if seen.insert(id, i).is_some() {
            out.push(Violation::DuplicateId { kind, id: id.into() });
        }
    }
    seen
}

/// Checks every network axiom and lists all violations. Never fails: an
/// empty report means the spec describes a valid network.
pub fn validate_network(spec: &NetworkSpec) -> ValidationReport {
    let mut v = Vec::new();
    let cell_types = check_ids("cell type", spec.cell_types.iter().map(|t| t.id.as_str()), &mut v);
    for t in &spec.cell_types {
        if t.dim == 0 {
            v.push(Violation::ZeroDimension { cell_type: t.id.clone() });
        }
    }
    let arrow_types = check_ids("arrow type", spec.arrow_types.iter().map(String::as_str), &mut v);
    let cells = check_ids("cell", spec.cells.iter().map(|c| c.id.as_str()), &mut v);
    check_ids("arrow", spec.arrows.iter().map(|a| a.id.as_str()), &mut v);

    let mut cell_type_of: BTreeMap<&str, &str> = BTreeMap::new();
    for c in &spec.cells {
        if !cell_types.contains_key(c.cell_type.as_str()) {
            v.push(Violation::UnknownCellType { cell: c.id.clone(), cell_type: c.cell_type.clone() });
        } else {
            cell_type_of.entry(c.id.as_str()).or_insert(c.cell_type.as_str());
        }
    }

    // first arrow seen per arrow type: (arrow id, tail type, head type)
    let mut reference: BTreeMap<&str, (&str, Option<&str>, Option<&str>)> = BTreeMap::new();
    for a in &spec.arrows {
        let type_known = arrow_types.contains_key(a.arrow_type.as_str());
        if !type_known {
            v.push(Violation::UnknownArrowType { arrow: a.id.clone(), arrow_type: a.arrow_type.clone() });
        }
        let mut ends = [None, None];
        for (slot, (endpoint, cell)) in [(Endpoint::Tail, &a.tail), (Endpoint::Head, &a.head)].into_iter().enumerate() {
            if !cells.contains_key(cell.as_str()) {
                v.push(Violation::UnknownEndpoint { arrow: a.id.clone(), endpoint, cell: cell.clone() });
            } else {
                ends[slot] = cell_type_of.get(cell.as_str()).copied();
            }
        }
        if !type_known {
            continue;
        }
        match reference.get(a.arrow_type.as_str()) {
            None => {
                reference.insert(a.arrow_type.as_str(), (a.id.as_str(), ends[0], ends[1]));
            }
            Some(&(ref_id, ref_tail, ref_head)) => {
                for (endpoint, expected, found) in
                    [(Endpoint::Tail, ref_tail, ends[0]), (Endpoint::Head, ref_head, ends[1])]
                {
                    if let (Some(e), Some(f)) = (expected, found) {
                        if e != f {
                            v.push(Violation::IncompatibleEndpoints {
                                arrow: a.id.clone(),
                                arrow_type: a.arrow_type.clone(),
                                endpoint,
                                reference_arrow: ref_id.into(),
                                expected: e.into(),
                                found: f.into(),
                            });
                        }
                    }
                }
            }
        }
    }
    ValidationReport { violations: v }
}
