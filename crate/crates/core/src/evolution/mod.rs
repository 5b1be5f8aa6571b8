//! The causal diffusion engine: time decomposition, grid evolution, the
//! Green function, superposition over speeds, flux and residuals.

mod green;
pub(crate) mod monte_carlo;
mod spectral;
mod speeds;
mod state;
mod stencil;

use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};

pub use green::{green, green_with, semigroup_check, semigroup_check_with};
pub use monte_carlo::{ks_distance, sample_green_monte_carlo};
pub use spectral::{evolve_spectral, heat_spectral};
pub use speeds::{infer_speed_distribution, superpose, SpeedDistribution};
pub use state::{continuity_residual, ddt_jump, epd_residual, flux, EvolutionState, FdSteps, JumpEstimate};
pub use stencil::{apply_green, evolve, evolve_checkpoints, evolve_with, Boundary, EvolveOptions};

/// Speed `c0` and period `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub c0: f64,
    pub tau: f64,
}

impl ModelParams {
    pub fn new(c0: f64, tau: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::domain(format!("speed c0 must be positive, got {c0}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("period tau must be positive, got {tau}")));
        }
        Ok(ModelParams { c0, tau })
    }

    /// Wavelength `λ = c0 τ`.
    pub fn lambda(&self) -> f64 {
        self.c0 * self.tau
    }

    /// Wave number `2π / λ`.
    pub fn wave_number(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda()
    }

    /// Checkpoint time `τ_m = m τ`.
    pub fn checkpoint(&self, m: usize) -> f64 {
        m as f64 * self.tau
    }

    /// Parameters reproducing a heat equation with diffusivity `d0` in the
    /// limit `τ → 0`: `c0 = sqrt(2 N d0 / τ)`.
    pub fn for_diffusivity(d0: f64, tau: f64, dim: Dim) -> Result<Self> {
        if !(d0 > 0.0) {
            return Err(Error::domain(format!("diffusivity must be positive, got {d0}")));
        }
        ModelParams::new((2.0 * dim.as_f64() * d0 / tau).sqrt(), tau)
    }
}

/// `t = n τ + R / c0` with `t ∈ (n τ, (n+1) τ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDecomposition {
    pub t: f64,
    pub n: usize,
    pub radius: f64,
}

impl TimeDecomposition {
    /// Time elapsed since the last checkpoint.
    pub fn offset(&self, p: &ModelParams) -> f64 {
        self.radius / p.c0
    }
}

/// Relative distance below which a time is treated as a checkpoint.
const CHECKPOINT_SNAP: f64 = 1e-12;

/// Splits `t` into the index of the last checkpoint and the current
/// sphere radius. At `t = kτ` the result is `(k-1, c0 τ)`; `t = 0` gives
/// `(0, 0)`.
pub fn time_decompose(t: f64, p: &ModelParams) -> Result<TimeDecomposition> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(TimeDecomposition { t, n: 0, radius: 0.0 });
    }
    let q = t / p.tau;
    let k = q.round();
    if k >= 1.0 && (q - k).abs() <= CHECKPOINT_SNAP * q.max(1.0) {
        return Ok(TimeDecomposition {
            t,
            n: k as usize - 1,
            radius: p.lambda(),
        });
    }
    let n = q.ceil() as usize - 1;
    let radius = (p.c0 * (t - n as f64 * p.tau)).clamp(0.0, p.lambda());
    Ok(TimeDecomposition { t, n, radius })
}

/// `Some(m)` when `t` is the checkpoint `τ_m`.
pub fn checkpoint_index(t: f64, p: &ModelParams) -> Option<usize> {
    let q = t / p.tau;
    let k = q.round();
    ((q - k).abs() <= CHECKPOINT_SNAP * q.max(1.0)).then_some(k as usize)
}

/// Fick diffusivity `D(t) = c0 R(t) / N`.
pub fn fick_d(t: f64, p: &ModelParams, dim: Dim) -> Result<f64> {
    Ok(p.c0 * time_decompose(t, p)?.radius / dim.as_f64())
}

/// Period average of `D(t)`: `D0 = c0² τ / (2N)`.
pub fn fick_d0(p: &ModelParams, dim: Dim) -> f64 {
    p.c0 * p.c0 * p.tau / (2.0 * dim.as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParams {
        ModelParams::new(2.0, 0.5).unwrap()
    }

    #[test]
    fn derived_lengths() {
        let p = p();
        assert_eq!(p.lambda(), 1.0);
        assert!((p.wave_number() * p.lambda() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn decomposition_conventions() {
        let p = p();
        let d = time_decompose(0.25, &p).unwrap();
        assert_eq!((d.n, d.radius), (0, 0.5));
        let d = time_decompose(1.0, &p).unwrap();
        assert_eq!((d.n, d.radius), (1, 1.0));
        let d = time_decompose(1.125, &p).unwrap();
        assert_eq!(d.n, 2);
        assert!((d.radius - 0.25).abs() < 1e-15);
        let d = time_decompose(0.0, &p).unwrap();
        assert_eq!((d.n, d.radius), (0, 0.0));
        assert!(time_decompose(-1e-3, &p).is_err());
        // 0.7 / 0.1 is not exactly 7 in floating point
        let q = ModelParams::new(1.0, 0.1).unwrap();
        let d = time_decompose(0.7, &q).unwrap();
        assert_eq!(d.n, 6);
        assert!((d.radius - 0.1).abs() < 1e-15);
    }

    #[test]
    fn fick_coefficients() {
        let p = p();
        for dim in Dim::ALL {
            let d0 = fick_d0(&p, dim);
            assert!((fick_d(p.tau / 2.0, &p, dim).unwrap() - d0).abs() < 1e-15);
            assert!((fick_d(p.tau, &p, dim).unwrap() - p.c0 * p.c0 * p.tau / dim.as_f64()).abs() < 1e-15);
            assert!(fick_d(p.tau * (1.0 + 1e-9), &p, dim).unwrap() < 1e-8);
        }
    }

    #[test]
    fn diffusivity_parametrization() {
        let p = ModelParams::for_diffusivity(0.3, 0.01, Dim::Three).unwrap();
        assert!((fick_d0(&p, Dim::Three) - 0.3).abs() < 1e-14);
    }
}
