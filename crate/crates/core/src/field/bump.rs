use alloc::vec::Vec;

use super::{FieldError, RawFunction};
use crate::math;
use crate::state::sup_distance;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BumpError {
    #[error("at least one bump is required")]
    NoBumps,
    #[error("segment needs at least two samples with increasing parameters")]
    BadSegment,
    #[error("parameter {0} lies outside the segment")]
    OutsideSegment(f64),
    #[error("centers {0} and {1} are not separated at floating precision")]
    Unseparated(usize, usize),
}

/// A curve sampled at increasing parameter values and interpolated
/// linearly in between.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSegment {
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl CurveSegment {
    pub fn new(params: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self, BumpError> {
        let ok = params.len() >= 2
            && params.len() == points.len()
            && params.windows(2).all(|w| w[0] < w[1])
            && points.iter().all(|p| p.len() == points[0].len() && !p.is_empty());
        if ok {
            Ok(Self { params, points })
        } else {
            Err(BumpError::BadSegment)
        }
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn start(&self) -> f64 {
        self.params[0]
    }

    pub fn end(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    pub fn point_at(&self, t: f64) -> Result<Vec<f64>, BumpError> {
        if !(self.start()..=self.end()).contains(&t) {
            return Err(BumpError::OutsideSegment(t));
        }
        let k = self.params.partition_point(|&p| p <= t).clamp(1, self.params.len() - 1);
        let (t0, t1) = (self.params[k - 1], self.params[k]);
        let s = (t - t0) / (t1 - t0);
        Ok(self.points[k - 1].iter().zip(&self.points[k]).map(|(a, b)| a + s * (b - a)).collect())
    }
}

/// Bumps `φ_n(p) = ψ((p − ζ_n)/ε_n) / C_n` with `ψ(v) = (1 − |v|₂²)²` on the
/// unit Euclidean ball, centred at `ζ_n = γ(t* + η·2^{-n})` on a curve `γ`.
///
/// `C_n = 1 + 8√m / (3√3 ε_n)` bounds the C¹ norm of the unscaled bump for
/// the supremum norm on `R^m`, so every `φ_n` has C¹ norm at most 1. Radii are
/// 0.45 times the distance from `ζ_n` to the nearest other center and to
/// `γ(t*)`, which makes the supports pairwise disjoint and keeps them away
/// from the accumulation point.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpBasis {
    pub center_params: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// `γ(t*)`, the point the centers accumulate towards.
    pub anchor: Vec<f64>,
    /// Radius of a supremum-norm ball around `anchor` containing every
    /// support.
    pub enclosing_radius: f64,
    scales: Vec<f64>,
}

const RADIUS_FRACTION: f64 = 0.45;

impl BumpBasis {
    pub fn build(segment: &CurveSegment, t_star: f64, eta: f64, n_bumps: usize) -> Result<Self, BumpError> {
        if n_bumps == 0 {
            return Err(BumpError::NoBumps);
        }
        let anchor = segment.point_at(t_star)?;
        let mut center_params = Vec::with_capacity(n_bumps);
        let mut centers = Vec::with_capacity(n_bumps);
        for n in 0..n_bumps {
            let t = t_star + eta * math::powi(0.5, n as i32);
            center_params.push(t);
            centers.push(segment.point_at(t)?);
        }
        let mut radii = Vec::with_capacity(n_bumps);
        for (n, c) in centers.iter().enumerate() {
            let mut nearest = sup_distance(c, &anchor);
            if nearest == 0.0 {
                return Err(BumpError::Unseparated(n, n_bumps));
            }
            for (m, other) in centers.iter().enumerate() {
                if m != n {
                    let d = sup_distance(c, other);
                    if d == 0.0 {
                        return Err(BumpError::Unseparated(n.min(m), n.max(m)));
                    }
                    nearest = nearest.min(d);
                }
            }
            let r = RADIUS_FRACTION * nearest;
            if !(r > f64::MIN_POSITIVE) {
                return Err(BumpError::Unseparated(n, n));
            }
            radii.push(r);
        }
        let m = segment.dim() as f64;
        let scales = radii.iter().map(|&r| 1.0 + 8.0 * math::sqrt(m) / (3.0 * math::sqrt(3.0) * r)).collect();
        let enclosing_radius =
            centers.iter().zip(&radii).map(|(c, r)| sup_distance(c, &anchor) + r).fold(0.0, f64::max);
        let basis = Self { center_params, centers, radii, anchor, enclosing_radius, scales };
        if let Some((a, b)) = basis.overlapping_pair() {
            return Err(BumpError::Unseparated(a, b));
        }
        Ok(basis)
    }

    /// Bumps along the whole segment: `t*` at its start, first center at its
    /// end.
    pub fn along(segment: &CurveSegment, n_bumps: usize) -> Result<Self, BumpError> {
        Self::build(segment, segment.start(), segment.end() - segment.start(), n_bumps)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// `‖φ_n‖_∞`, attained at the center.
    pub fn sup_norm(&self, n: usize) -> f64 {
        1.0 / self.scales[n]
    }

    /// Certified upper bound on `‖φ_n‖_{C¹}`.
    pub fn c1_bound(&self, _n: usize) -> f64 {
        1.0
    }

    /// A pair of bumps whose supports may meet, checked with outward
    /// rounding: the summed radii are rounded up and the distance down.
    pub fn overlapping_pair(&self) -> Option<(usize, usize)> {
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                let reach = (self.radii[a] + self.radii[b]) * (1.0 + 4.0 * f64::EPSILON);
                let gap = sup_distance(&self.centers[a], &self.centers[b]) * (1.0 - 4.0 * f64::EPSILON);
                if !(gap > reach) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// `φ_n(p)`.
    pub fn eval(&self, n: usize, p: &[f64]) -> f64 {
        self.eval_parts(n, p.iter().copied())
    }

    fn eval_parts(&self, n: usize, p: impl Iterator<Item = f64>) -> f64 {
        let r = self.radii[n];
        let mut s = 0.0;
        for (x, c) in p.zip(&self.centers[n]) {
            let v = (x - c) / r;
            s += v * v;
            if s >= 1.0 {
                return 0.0;
            }
        }
        let w = 1.0 - s;
        w * w / self.scales[n]
    }

    /// Index of the bump whose support contains `p`, if any.
    pub fn active(&self, p: &[f64]) -> Option<usize> {
        (0..self.len()).find(|&n| self.eval(n, p) > 0.0)
    }
}

/// `Σ z_n φ_n` evaluated on the flattened input tuple of a cell.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpFunction {
    pub basis: BumpBasis,
    pub coefficients: Vec<f64>,
}

impl BumpFunction {
    /// `‖Σ z_n φ_n‖_∞ = max_n |z_n| · ‖φ_n‖_∞`, by disjointness of supports.
    pub fn sup_norm(&self) -> f64 {
        self.coefficients.iter().enumerate().map(|(n, z)| math::abs(*z) * self.basis.sup_norm(n)).fold(0.0, f64::max)
    }

    /// Certified bound on the C¹ norm: `max_n |z_n|`.
    pub fn c1_bound(&self) -> f64 {
        self.coefficients.iter().map(|z| math::abs(*z)).fold(0.0, f64::max)
    }

    pub fn eval_point(&self, p: &[f64]) -> f64 {
        self.coefficients.iter().enumerate().map(|(n, z)| z * self.basis.eval(n, p)).sum()
    }
}

impl RawFunction for BumpFunction {
    fn eval(&self, inputs: &[&[f64]]) -> Result<f64, FieldError> {
        let total: usize = inputs.iter().map(|s| s.len()).sum();
        if total != self.basis.dim() {
            return Err(FieldError::Dimension(crate::state::DimensionMismatch {
                expected: self.basis.dim(),
                found: total,
            }));
        }
        let mut sum = 0.0;
        for (n, z) in self.coefficients.iter().enumerate() {
            if *z != 0.0 {
                sum += z * self.basis.eval_parts(n, inputs.iter().flat_map(|s| s.iter().copied()));
            }
        }
        Ok(sum)
    }
}
