use alloc::vec::Vec;

use super::{check_interval, check_layout, AnalyzeError};
use crate::network::{CellId, TypedNetwork};
use crate::sim::{DerivativeSource, Trajectory};
use crate::state::sup_norm;

/// Stationary cells on an interval and whether stationarity propagated to
/// their input cells.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryReport {
    pub sigma: f64,
    pub tau: f64,
    pub samples: usize,
    /// Largest `|dx_c/dt|` over the samples, per cell.
    pub max_rates: Vec<f64>,
    pub stationary: Vec<CellId>,
    /// `(c, c2)`: `c` is stationary but its input cell `c2` moves. A
    /// generic field admits no such pair.
    pub violations: Vec<(CellId, CellId)>,
    pub derivatives: DerivativeSource,
}

impl StationaryReport {
    pub fn propagation_satisfied(&self) -> bool {
        self.violations.is_empty()
    }

    /// A stationary cell with moving inputs: the field is not generic.
    pub fn non_generic(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Cells whose rate stays within `tol_rate` at every stored sample of
/// `[sigma, tau]`. Rates are the stored derivatives, which are field
/// evaluations for integrated trajectories.
pub fn stationary_cells(
    net: &TypedNetwork,
    traj: &Trajectory,
    sigma: f64,
    tau: f64,
    tol_rate: f64,
) -> Result<StationaryReport, AnalyzeError> {
    check_layout(net, traj)?;
    check_interval(traj, sigma, tau)?;
    let idx: Vec<usize> = (0..traj.len()).filter(|&i| (sigma..=tau).contains(&traj.times()[i])).collect();
    if idx.is_empty() {
        return Err(AnalyzeError::NoSamples { sigma, tau });
    }
    let max_rates: Vec<f64> =
        net.cells().map(|c| idx.iter().map(|&i| sup_norm(traj.cell_derivative(i, c))).fold(0.0, f64::max)).collect();
    let is_stationary = |c: CellId| max_rates[c.index()] <= tol_rate;
    let stationary: Vec<CellId> = net.cells().filter(|&c| is_stationary(c)).collect();
    let mut violations = Vec::new();
    for &c in &stationary {
        let mut inputs: Vec<CellId> = net.input_arrows(c).iter().map(|&a| net.tail(a)).collect();
        inputs.sort_unstable();
        inputs.dedup();
        violations.extend(inputs.into_iter().filter(|&c2| !is_stationary(c2)).map(|c2| (c, c2)));
    }
    Ok(StationaryReport {
        sigma,
        tau,
        samples: idx.len(),
        max_rates,
        stationary,
        violations,
        derivatives: traj.meta.derivatives,
    })
}
