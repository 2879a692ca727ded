//! Named reference networks used by tests, examples and the CLI.
//!
//! `fig3` is a reconstruction of a ten-cell network known only through
//! partial constraints: the inputs of c1, c2, c5, c6 and c8, the type clash
//! between a3 and a15, a few required balanced colorings, and totals of 3
//! cell types, 5 arrow types and 17 arrows.
//! Cell type `B` has a two-dimensional state to exercise vector states.

use alloc::vec::Vec;

use crate::network::{NetworkSpec, TypedNetwork};

/// Four cells, two cell types (`L` = {1, 3}, `R` = {2, 4}) and two arrow
/// types: `blue` from left to right and `magenta` from right to left.
///
/// Input order is chosen so that cell 1 reads `(x1, x2, x4)` and cell 2 reads
/// `(x2, x1, x3)`.
pub fn fig1_spec() -> NetworkSpec {
    NetworkSpec::new()
        .cell_type("L", 1)
        .cell_type("R", 1)
        .arrow_type("blue")
        .arrow_type("magenta")
        .cell("1", "L")
        .cell("2", "R")
        .cell("3", "L")
        .cell("4", "R")
        .arrow("b12", "blue", "1", "2")
        .arrow("b32", "blue", "3", "2")
        .arrow("b14", "blue", "1", "4")
        .arrow("b34", "blue", "3", "4")
        .arrow("m21", "magenta", "2", "1")
        .arrow("m41", "magenta", "4", "1")
        .arrow("m23", "magenta", "2", "3")
        .arrow("m43", "magenta", "4", "3")
}

pub fn fig1() -> TypedNetwork {
    fig1_spec().build().expect("fig1 fixture is valid")
}

/// `fig1` with blue arrow `b32` redirected into left cell 1.
pub fn fig1_mutated_spec() -> NetworkSpec {
    let mut spec = fig1_spec();
    let a = spec.arrows.iter_mut().find(|a| a.id == "b32").expect("b32 exists");
    a.head = "1".into();
    spec
}

pub fn fig3_spec() -> NetworkSpec {
    NetworkSpec::new()
        .cell_type("A", 1)
        .cell_type("B", 2)
        .cell_type("C", 1)
        .arrow_type("alpha")
        .arrow_type("gamma")
        .arrow_type("delta")
        .arrow_type("zeta")
        .arrow_type("eta")
        .cell("c1", "A")
        .cell("c2", "A")
        .cell("c3", "B")
        .cell("c4", "B")
        .cell("c5", "C")
        .cell("c6", "C")
        .cell("c7", "B")
        .cell("c8", "A")
        .cell("c9", "A")
        .cell("c10", "A")
        .arrow("a1", "alpha", "c1", "c1")
        .arrow("a2", "alpha", "c1", "c2")
        .arrow("a3", "gamma", "c4", "c1")
        .arrow("a4", "gamma", "c4", "c2")
        .arrow("a5", "zeta", "c3", "c5")
        .arrow("a6", "eta", "c5", "c3")
        .arrow("a7", "zeta", "c3", "c6")
        .arrow("a8", "eta", "c6", "c4")
        .arrow("a9", "zeta", "c4", "c6")
        .arrow("a10", "zeta", "c7", "c5")
        .arrow("a11", "eta", "c5", "c7")
        .arrow("a12", "alpha", "c8", "c8")
        .arrow("a13", "alpha", "c8", "c8")
        .arrow("a14", "alpha", "c10", "c9")
        .arrow("a15", "delta", "c7", "c10")
        .arrow("a16", "gamma", "c7", "c9")
        .arrow("a17", "alpha", "c9", "c10")
}

pub fn fig3() -> TypedNetwork {
    fig3_spec().build().expect("fig3 fixture is valid")
}

/// Cell 1 (type `P`, dimension 2) feeds cell 2 (type `Q`, dimension 1).
pub fn chain_spec() -> NetworkSpec {
    NetworkSpec::new()
        .cell_type("P", 2)
        .cell_type("Q", 1)
        .arrow_type("link")
        .cell("1", "P")
        .cell("2", "Q")
        .arrow("a", "link", "1", "2")
}

pub fn chain() -> TypedNetwork {
    chain_spec().build().expect("chain fixture is valid")
}

pub fn single_cell() -> TypedNetwork {
    NetworkSpec::new().cell_type("T", 1).cell("c", "T").build().expect("valid")
}

/// Two isolated cells of one type.
pub fn pair_same_type() -> TypedNetwork {
    NetworkSpec::new().cell_type("T", 1).cell("c1", "T").cell("c2", "T").build().expect("valid")
}

/// Two isolated cells of different types.
pub fn pair_distinct_types() -> TypedNetwork {
    NetworkSpec::new()
        .cell_type("S", 1)
        .cell_type("T", 1)
        .cell("c1", "S")
        .cell("c2", "T")
        .build()
        .expect("valid")
}

/// Directed 3-cycle of identical cells.
pub fn ring3() -> TypedNetwork {
    NetworkSpec::new()
        .cell_type("T", 1)
        .arrow_type("e")
        .cell("r1", "T")
        .cell("r2", "T")
        .cell("r3", "T")
        .arrow("e12", "e", "r1", "r2")
        .arrow("e23", "e", "r2", "r3")
        .arrow("e31", "e", "r3", "r1")
        .build()
        .expect("valid")
}

/// Hub cell reading four leaves that each read the hub.
pub fn star5() -> TypedNetwork {
    let mut spec = NetworkSpec::new()
        .cell_type("H", 1)
        .cell_type("Lf", 1)
        .arrow_type("in")
        .arrow_type("out")
        .cell("hub", "H");
    for i in 1..=4 {
        let leaf = alloc::format!("l{i}");
        spec = spec
            .cell(&leaf, "Lf")
            .arrow(&alloc::format!("in{i}"), "in", &leaf, "hub")
            .arrow(&alloc::format!("out{i}"), "out", "hub", &leaf);
    }
    spec.build().expect("valid")
}

/// Every valid fixture with its name.
pub fn all() -> Vec<(&'static str, TypedNetwork)> {
    alloc::vec![
        ("fig1", fig1()),
        ("fig3", fig3()),
        ("chain", chain()),
        ("single", single_cell()),
        ("pair-same", pair_same_type()),
        ("pair-distinct", pair_distinct_types()),
        ("ring3", ring3()),
        ("star5", star5()),
    ]
}

pub fn by_name(name: &str) -> Option<TypedNetwork> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, net)| net)
}
