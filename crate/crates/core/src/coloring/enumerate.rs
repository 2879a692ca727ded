use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::balance::{balanced_fast, refine_to_balanced};
use super::{canonical_sort, Coloring, ColoringError};
use crate::network::{input_isomorphisms, CellId, TypedNetwork};

/// Default cell-count cap for [`enumerate_balanced`].
pub const DEFAULT_ENUMERATION_CAP: usize = 20;
/// Hard cell-count cap for [`brute_force_balanced`].
pub const BRUTE_FORCE_CAP: usize = 10;

/// All balanced colorings in canonical order, with the default cap.
pub fn enumerate_balanced(net: &TypedNetwork) -> Result<Vec<Coloring>, ColoringError> {
    enumerate_balanced_with(net, DEFAULT_ENUMERATION_CAP)
}

/// All balanced colorings in canonical order.
///
/// Starts from the coarsest balanced coloring (the refinement of the
/// cell-type partition) and searches downward: each step splits one color
/// class in two and refines back to a balanced coloring. Every balanced
/// coloring strictly finer than a visited one is reachable this way, since
/// refinement returns the coarsest balanced coloring below its argument.
pub fn enumerate_balanced_with(net: &TypedNetwork, cap: usize) -> Result<Vec<Coloring>, ColoringError> {
    let n = net.num_cells();
    if n > cap {
        return Err(ColoringError::TooManyCells { cells: n, cap });
    }
    let top = refine_to_balanced(net, &Coloring::uniform(n))?;
    let mut seen: BTreeSet<Coloring> = BTreeSet::new();
    let mut stack = alloc::vec![top.clone()];
    seen.insert(top);
    while let Some(col) = stack.pop() {
        for class in col.classes() {
            if class.len() < 2 {
                continue;
            }
            // Bipartitions {S, class \ S} with class[0] ∈ S, S proper.
            let rest = class.len() - 1;
            for mask in 0..(1u64 << rest) - 1 {
                let mut labels: Vec<usize> = col.colors().to_vec();
                let fresh = col.num_colors();
                for (bit, &c) in class[1..].iter().enumerate() {
                    if mask & (1 << bit) == 0 {
                        labels[c.index()] = fresh;
                    }
                }
                let split = Coloring::from_labels(&labels);
                let child = refine_to_balanced(net, &split)?;
                debug_assert!(balanced_fast(net, &child));
                if seen.insert(child.clone()) {
                    stack.push(child);
                }
            }
        }
    }
    let mut out: Vec<Coloring> = seen.into_iter().collect();
    canonical_sort(&mut out);
    Ok(out)
}

/// Reference oracle: scans every set partition whose blocks respect cell
/// types and keeps those for which every same-colored pair admits an input
/// isomorphism preserving tail colors.
pub fn brute_force_balanced(net: &TypedNetwork) -> Result<Vec<Coloring>, ColoringError> {
    let n = net.num_cells();
    if n > BRUTE_FORCE_CAP {
        return Err(ColoringError::TooManyCells { cells: n, cap: BRUTE_FORCE_CAP });
    }
    let mut blocks: Vec<Vec<usize>> = alloc::vec![Vec::new(); net.cell_types().len()];
    for c in net.cells() {
        blocks[net.cell_type(c).index()].push(c.index());
    }
    blocks.retain(|b| !b.is_empty());
    let mut out = Vec::new();
    let mut labels: Vec<(usize, usize)> = alloc::vec![(0, 0); n];
    partitions(net, &blocks, 0, 0, 0, &mut labels, &mut out);
    canonical_sort(&mut out);
    Ok(out)
}

/// Restricted-growth enumeration inside block `b`, position `i`, with `used`
/// labels so far in this block.
fn partitions(
    net: &TypedNetwork,
    blocks: &[Vec<usize>],
    b: usize,
    i: usize,
    used: usize,
    labels: &mut Vec<(usize, usize)>,
    out: &mut Vec<Coloring>,
) {
    if b == blocks.len() {
        let col = Coloring::from_labels(labels);
        if balanced_by_definition(net, &col) {
            out.push(col);
        }
        return;
    }
    if i == blocks[b].len() {
        partitions(net, blocks, b + 1, 0, 0, labels, out);
        return;
    }
    for k in 0..=used {
        labels[blocks[b][i]] = (b, k);
        partitions(net, blocks, b, i + 1, used.max(k + 1), labels, out);
    }
}

fn balanced_by_definition(net: &TypedNetwork, col: &Coloring) -> bool {
    net.cells().all(|c| {
        net.cells().filter(|&c2| c2 != c && col.same_color(c, c2)).all(|c2| {
            input_isomorphisms(net, c, c2)
                .is_ok_and(|isos| isos.iter().any(|b| preserves_colors(net, col, c, &b.images)))
        })
    })
}

fn preserves_colors(net: &TypedNetwork, col: &Coloring, c: CellId, images: &[crate::network::ArrowId]) -> bool {
    net.input_arrows(c).iter().zip(images).all(|(&a, &ba)| col.same_color(net.tail(a), net.tail(ba)))
}
