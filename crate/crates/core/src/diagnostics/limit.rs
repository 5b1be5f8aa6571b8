use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_spectral, heat_spectral, ModelParams};
use crate::field::{integrate, GridField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub tau: f64,
    pub c0: f64,
    /// `h^N Σ |v - w|` between the causal and the heat solution at `T`.
    pub error: f64,
    pub causal_mass: f64,
    pub heat_mass: f64,
}

/// Compares the causal solution with `c0 = sqrt(2 N D0 / τ)` to the heat
/// solution with diffusivity `D0` at the checkpoint `T`, for each `τ`.
/// Both are computed with the periodic spectral backend on the grid of
/// `u`.
pub fn classical_limit_error(u: &GridField, t_end: f64, d0: f64, taus: &[f64]) -> Result<Vec<LimitPoint>> {
    if !(t_end > 0.0) {
        return Err(Error::domain(format!("T must be positive, got {t_end}")));
    }
    let heat = heat_spectral(u, t_end, d0)?;
    let heat_mass = integrate(&heat);
    let cell = u.spacing().powi(u.dim().get() as i32);
    taus.iter()
        .map(|&tau| {
            if !(tau > 0.0) {
                return Err(Error::InvalidConfig(format!("tau must be positive, got {tau}")));
            }
            let q = t_end / tau;
            if (q - q.round()).abs() > 1e-9 * q.max(1.0) || q.round() < 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "tau = {tau} does not divide T = {t_end}"
                )));
            }
            let p = ModelParams::for_diffusivity(d0, tau, u.dim())?;
            let v = evolve_spectral(u, t_end, &p)?;
            let error = cell
                * v.samples()
                    .iter()
                    .zip(heat.samples())
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
            Ok(LimitPoint {
                tau,
                c0: p.c0,
                error,
                causal_mass: integrate(&v),
                heat_mass,
            })
        })
        .collect()
}
