use alloc::vec::Vec;

use super::{ArrowId, CellId, NetworkError, TypedNetwork};

/// A type-preserving bijection `β : I(source) → I(target)`.
///
/// `images[i]` is the image of the `i`-th arrow of `I(source)` in canonical
/// input order. Position 0 always maps internal arrow to internal arrow.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InputIsomorphism {
    pub source: CellId,
    pub target: CellId,
    pub images: Vec<ArrowId>,
}

impl InputIsomorphism {
    pub fn identity(net: &TypedNetwork, c: CellId) -> Self {
        Self { source: c, target: c, images: net.input_arrows(c).to_vec() }
    }

    /// Image of arrow `a`, or `None` when `a` is not an input of `source`.
    pub fn apply(&self, net: &TypedNetwork, a: ArrowId) -> Option<ArrowId> {
        net.input_arrows(self.source).iter().position(|&x| x == a).map(|i| self.images[i])
    }

    pub fn is_identity(&self, net: &TypedNetwork) -> bool {
        self.source == self.target && self.images == net.input_arrows(self.source)
    }

    /// For each position `i` of `I(source)`, the position of `β(a_i)` in the
    /// canonical order of `I(target)`.
    pub fn position_map(&self, net: &TypedNetwork) -> Vec<usize> {
        let target = net.input_arrows(self.target);
        self.images
            .iter()
            .map(|b| target.iter().position(|x| x == b).expect("image outside target input set"))
            .collect()
    }

    /// `other ∘ self`, an isomorphism from `self.source` to `other.target`.
    pub fn then(&self, net: &TypedNetwork, other: &InputIsomorphism) -> Result<InputIsomorphism, NetworkError> {
        if self.target != other.source {
            return Err(NetworkError::NotComposable {
                first_target: net.cell_name(self.target).into(),
                second_source: net.cell_name(other.source).into(),
            });
        }
        let pos = self.position_map(net);
        Ok(InputIsomorphism {
            source: self.source,
            target: other.target,
            images: pos.iter().map(|&p| other.images[p]).collect(),
        })
    }

    pub fn inverse(&self, net: &TypedNetwork) -> InputIsomorphism {
        let src = net.input_arrows(self.source);
        let pos = self.position_map(net);
        let mut images = alloc::vec![ArrowId(0); src.len()];
        for (i, &p) in pos.iter().enumerate() {
            images[p] = src[i];
        }
        InputIsomorphism { source: self.target, target: self.source, images }
    }

    /// Checks bijectivity and type preservation against `net`.
    pub fn is_valid(&self, net: &TypedNetwork) -> bool {
        if self.source.0 >= net.num_cells() || self.target.0 >= net.num_cells() {
            return false;
        }
        let src = net.input_arrows(self.source);
        let dst = net.input_arrows(self.target);
        if src.len() != self.images.len() || dst.len() != self.images.len() {
            return false;
        }
        let mut used = alloc::vec![false; dst.len()];
        for (a, b) in src.iter().zip(&self.images) {
            let Some(p) = dst.iter().position(|x| x == b) else { return false };
            if used[p] || net.arrow_type(*a) != net.arrow_type(*b) {
                return false;
            }
            used[p] = true;
        }
        true
    }

    /// `(a, β(a))` for explicit arrows only, the user-facing form.
    pub fn explicit_pairs(&self, net: &TypedNetwork) -> Vec<(ArrowId, ArrowId)> {
        net.input_arrows(self.source)
            .iter()
            .zip(&self.images)
            .filter(|(a, _)| !net.is_internal(**a))
            .map(|(&a, &b)| (a, b))
            .collect()
    }
}

/// All input isomorphisms `B(c, c2)`, lexicographic in the image sequence
/// (images compared by their position in `I(c2)`).
pub fn input_isomorphisms(net: &TypedNetwork, c: CellId, c2: CellId) -> Result<Vec<InputIsomorphism>, NetworkError> {
    net.check_cell(c)?;
    net.check_cell(c2)?;
    let mut out = Vec::new();
    if net.input_signature(c) != net.input_signature(c2) {
        return Ok(out);
    }
    let src = net.input_arrows(c);
    let dst = net.input_arrows(c2);
    let mut used = alloc::vec![false; dst.len()];
    let mut images = Vec::with_capacity(src.len());
    extend(net, src, dst, &mut used, &mut images, &mut |images| {
        out.push(InputIsomorphism { source: c, target: c2, images: images.to_vec() })
    });
    Ok(out)
}

fn extend(
    net: &TypedNetwork,
    src: &[ArrowId],
    dst: &[ArrowId],
    used: &mut [bool],
    images: &mut Vec<ArrowId>,
    emit: &mut dyn FnMut(&[ArrowId]),
) {
    let i = images.len();
    if i == src.len() {
        emit(images);
        return;
    }
    let ty = net.arrow_type(src[i]);
    for (j, &b) in dst.iter().enumerate() {
        if used[j] || net.arrow_type(b) != ty {
            continue;
        }
        used[j] = true;
        images.push(b);
        extend(net, src, dst, used, images, emit);
        images.pop();
        used[j] = false;
    }
}

/// `β*`: the states `(x_{T(β(a_1))}, …, x_{T(β(a_p))})` ordered by the
/// canonical order of `I(source)`. Entry 0 is the state of `β.target` itself.
pub fn pullback<'x>(
    net: &TypedNetwork,
    beta: &InputIsomorphism,
    x: &'x [f64],
) -> Result<Vec<&'x [f64]>, NetworkError> {
    net.layout().check(x)?;
    if !beta.is_valid(net) {
        return Err(NetworkError::ForeignIsomorphism {
            source_cell: alloc::format!("{}", beta.source),
            target_cell: alloc::format!("{}", beta.target),
        });
    }
    Ok(beta.images.iter().map(|&b| net.layout().cell(x, net.tail(b))).collect())
}
