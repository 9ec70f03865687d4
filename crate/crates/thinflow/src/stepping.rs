//! Time-step configuration and run plumbing shared by the two solvers.

use crate::error::{Result, SimError};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepConfig {
    /// Courant number applied to the explicit transport update, in (0, 1).
    pub cfl_number: f64,
    /// Upper bound on the time step.
    pub dt_max: f64,
    /// Relative residual target of the conjugate-gradient solves.
    pub cg_tol: f64,
    /// Iteration cap; defaults to `10 * nx * nz` when absent.
    pub cg_max_iter: Option<usize>,
}

impl Default for TimeStepConfig {
    fn default() -> Self {
        Self {
            cfl_number: 0.45,
            dt_max: 1.0e-2,
            cg_tol: 1.0e-10,
            cg_max_iter: None,
        }
    }
}

impl TimeStepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.cfl_number.is_finite() || self.cfl_number <= 0.0 || self.cfl_number >= 1.0 {
            return Err(SimError::Validation(format!(
                "cfl must lie in (0, 1), got {}",
                self.cfl_number
            )));
        }
        if !self.dt_max.is_finite() || self.dt_max <= 0.0 {
            return Err(SimError::Validation(format!(
                "dt_max must be strictly positive, got {}",
                self.dt_max
            )));
        }
        if !self.cg_tol.is_finite() || self.cg_tol <= 0.0 {
            return Err(SimError::Validation(format!(
                "cg_tol must be strictly positive, got {}",
                self.cg_tol
            )));
        }
        if let Some(0) = self.cg_max_iter {
            return Err(SimError::Validation("cg_max_iter must be at least 1".to_string()));
        }
        Ok(())
    }

    pub fn cg_iter_cap(&self, grid: GridSpec) -> usize {
        self.cg_max_iter.unwrap_or(10 * grid.n_cells())
    }
}

/// Counters of one completed run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub steps: usize,
    pub pressure_solves: usize,
    pub regularization_solves: usize,
    pub cg_iterations: usize,
}

/// Stability limit of the explicit transport update:
/// `cfl * min(dx / max|U|, dz / max|Q|) / L_f`.
pub(crate) fn cfl_dt(cfl: f64, dx: f64, dz: f64, max_u: f64, max_q: f64, lipschitz: f64) -> f64 {
    let lip = lipschitz.max(f64::MIN_POSITIVE);
    let tx = if max_u > 0.0 { dx / max_u } else { f64::INFINITY };
    let tz = if max_q > 0.0 { dz / max_q } else { f64::INFINITY };
    cfl * tx.min(tz) / lip
}

/// Sorted, deduplicated snapshot schedule ending exactly at `t_end`.
pub(crate) fn schedule_stops(snapshot_times: &[f64], t_end: f64) -> Result<Vec<f64>> {
    let mut stops: Vec<f64> = Vec::with_capacity(snapshot_times.len() + 1);
    for &t in snapshot_times {
        if !t.is_finite() || t < 0.0 || t > t_end {
            return Err(SimError::Validation(format!(
                "snapshot_times must lie within [0, {t_end}], got {t}"
            )));
        }
        stops.push(t);
    }
    stops.push(t_end);
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    stops.dedup();
    Ok(stops)
}
