//! Damped Newton iterations for equilibria and periodic orbits, with
//! finite-difference Jacobians.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::field::{eval_field, CellField, FieldError};
use crate::network::TypedNetwork;
use crate::sim::{integrate, IntegrateOptions, SimError};
use crate::state::sup_norm;

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Halvings of the step tried before giving up on an iteration.
    pub max_halvings: usize,
    /// Convergence threshold on the supremum norm of the residual.
    pub tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 50, max_halvings: 30, tol: 1e-12, fd_step: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NewtonError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian at iteration {0}")]
    Singular(usize),
    #[error("no decreasing step at iteration {iteration} (residual {residual:e})")]
    Stalled { iteration: usize, residual: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Solves `F(z) = 0` by Newton steps with central-difference Jacobians and
/// backtracking by halving.
fn solve(
    mut residual: impl FnMut(&[f64]) -> Result<Vec<f64>, NewtonError>,
    z0: &[f64],
    opts: &NewtonOptions,
) -> Result<Vec<f64>, NewtonError> {
    let mut z = z0.to_vec();
    let mut r = residual(&z)?;
    let m = r.len();
    let n = z.len();
    for it in 0..opts.max_iterations {
        let norm = sup_norm(&r);
        if norm <= opts.tol {
            return Ok(z);
        }
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = opts.fd_step * z[j].abs().max(1.0);
            let mut zp = z.clone();
            zp[j] += h;
            let rp = residual(&zp)?;
            zp[j] = z[j] - h;
            let rm = residual(&zp)?;
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(m, r.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or(NewtonError::Singular(it))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(rt) = residual(&trial) {
                if sup_norm(&rt) < norm {
                    z = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(NewtonError::Stalled { iteration: it, residual: norm });
        }
    }
    let residual = sup_norm(&r);
    if residual <= opts.tol {
        Ok(z)
    } else {
        Err(NewtonError::NoConvergence { iterations: opts.max_iterations, residual })
    }
}

/// An equilibrium `f(x) = 0` near `guess`.
pub fn find_equilibrium(
    net: &TypedNetwork,
    field: &dyn CellField,
    guess: &[f64],
    opts: &NewtonOptions,
) -> Result<Vec<f64>, NewtonError> {
    solve(|x| Ok(eval_field(net, field, x)?), guess, opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    /// A point on the orbit, on the section through the initial guess.
    pub point: Vec<f64>,
    pub period: f64,
}

/// A periodic orbit near `(guess, period)` by single shooting: solves
/// `φ_T(x) = x` together with the phase condition
/// `(x − guess) · f(guess) = 0`.
pub fn find_periodic_orbit(
    net: &TypedNetwork,
    field: &dyn CellField,
    guess: &[f64],
    period: f64,
    integrator: &IntegrateOptions,
    opts: &NewtonOptions,
) -> Result<PeriodicOrbit, NewtonError> {
    let normal = eval_field(net, field, guess)?;
    let d = guess.len();
    let residual = |z: &[f64]| -> Result<Vec<f64>, NewtonError> {
        let (x, t) = (&z[..d], z[d]);
        if !(t > 0.0) {
            return Err(SimError::InvalidSpan(0.0, t).into());
        }
        let traj = integrate(net, field, x, 0.0, t, integrator)?;
        let mut r: Vec<f64> = traj.final_state().iter().zip(x).map(|(a, b)| a - b).collect();
        r.push(x.iter().zip(guess).zip(&normal).map(|((a, g), n)| (a - g) * n).sum());
        Ok(r)
    };
    let mut z0 = guess.to_vec();
    z0.push(period);
    let z = solve(residual, &z0, opts)?;
    Ok(PeriodicOrbit { point: z[..d].to_vec(), period: z[d] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    #[test]
    fn solves_a_scalar_root() {
        let z = solve(|z| Ok(alloc::vec![z[0] * z[0] - 2.0]), &[1.0], &NewtonOptions::default()).unwrap();
        assert!((z[0] - math::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn reports_failure() {
        let err = solve(|z| Ok(alloc::vec![z[0] * z[0] + 1.0]), &[1.0], &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, NewtonError::Stalled { .. } | NewtonError::Singular(_) | NewtonError::NoConvergence { .. }));
    }
}
