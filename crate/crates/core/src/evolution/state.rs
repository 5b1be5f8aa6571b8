//! Checkpointed solution `v(x, t)` and the local operators built on it:
//! flux, continuity and wave-type residuals, one-sided time derivatives.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::field::{gradient_mean, spherical_mean, GridField, ScalarField, SphereQuadrature, SphericalMeanField};

use super::stencil::{evolve_checkpoints, EvolveOptions};
use super::{checkpoint_index, time_decompose, ModelParams};

/// `v(·, τ_m)` for `m = 0..=horizon` together with the sphere rule used to
/// evaluate `v` between checkpoints.
pub struct EvolutionState {
    params: ModelParams,
    quad: Arc<SphereQuadrature>,
    checkpoints: Vec<Arc<dyn ScalarField>>,
}

impl EvolutionState {
    /// Grid checkpoints computed by the stencil engine.
    pub fn from_grid(params: ModelParams, u: GridField, horizon: usize, opts: &EvolveOptions) -> Result<Self> {
        let checkpoints = evolve_checkpoints(&u, horizon, &params, opts)?
            .into_iter()
            .map(|g| Arc::new(g) as Arc<dyn ScalarField>)
            .collect();
        Ok(EvolutionState {
            params,
            quad: Arc::new(opts.quadrature.clone()),
            checkpoints,
        })
    }

    /// Checkpoints as nested sphere means of a closed-form `u`. Evaluation
    /// after `m` periods costs `(nodes)^(m+1)` calls of `u`.
    pub fn from_field(
        params: ModelParams,
        u: Arc<dyn ScalarField>,
        quad: SphereQuadrature,
        horizon: usize,
    ) -> Result<Self> {
        if u.dim() != quad.dim() {
            return Err(Error::DimensionMismatch {
                left: u.dim().get(),
                right: quad.dim().get(),
            });
        }
        let quad = Arc::new(quad);
        let mut checkpoints = vec![u];
        for m in 0..horizon {
            let next = SphericalMeanField::new(checkpoints[m].clone(), params.lambda(), quad.clone())?;
            checkpoints.push(Arc::new(next));
        }
        Ok(EvolutionState {
            params,
            quad,
            checkpoints,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dim(&self) -> Dim {
        self.quad.dim()
    }

    pub fn quadrature(&self) -> &SphereQuadrature {
        &self.quad
    }

    /// Index of the last stored checkpoint.
    pub fn horizon(&self) -> usize {
        self.checkpoints.len() - 1
    }

    pub fn checkpoint(&self, m: usize) -> Result<&Arc<dyn ScalarField>> {
        self.checkpoints.get(m).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "checkpoint {m} requested but the state stops at {}",
                self.horizon()
            ))
        })
    }

    /// `v(x, t)`.
    pub fn value(&self, x: &[f64; 3], t: f64) -> Result<f64> {
        let td = time_decompose(t, &self.params)?;
        self.value_in(td.n, x, td.radius / self.params.c0)
    }

    /// `v(x, τ_n + s)` evaluated with the rule of interval `n`, for
    /// `s ∈ [0, τ]`.
    pub fn value_in(&self, n: usize, x: &[f64; 3], s: f64) -> Result<f64> {
        self.check_offset(s)?;
        spherical_mean(&**self.checkpoint(n)?, &self.quad, x, self.params.c0 * s)
    }

    /// Flux `-c0 Σ w v(x + R y, τ_n) y` on interval `n` at offset `s`.
    pub fn flux_in(&self, n: usize, x: &[f64; 3], s: f64) -> Result<[f64; 3]> {
        self.check_offset(s)?;
        let g = gradient_mean(&**self.checkpoint(n)?, &self.quad, x, self.params.c0 * s)?;
        Ok(g.map(|v| -self.params.c0 * v))
    }

    fn check_offset(&self, s: f64) -> Result<()> {
        let tau = self.params.tau;
        if !(s >= 0.0 && s <= tau * (1.0 + 1e-12)) {
            return Err(Error::domain(format!("offset {s} outside [0, {tau}]")));
        }
        Ok(())
    }
}

/// Flux density `j(x, t)`; undefined at checkpoints.
pub fn flux(state: &EvolutionState, x: &[f64; 3], t: f64) -> Result<[f64; 3]> {
    if checkpoint_index(t, state.params()).is_some() {
        return Err(Error::domain(format!(
            "the flux is undefined at the checkpoint t = {t}"
        )));
    }
    let td = time_decompose(t, state.params())?;
    state.flux_in(td.n, x, td.radius / state.params().c0)
}

/// Finite-difference steps in time and space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub dt: f64,
    pub dx: f64,
}

/// Locates `t` in its interval and checks that `[t - dt, t + dt]` stays
/// inside it. Returns `(n, s)`.
fn interior_offset(state: &EvolutionState, t: f64, dt: f64) -> Result<(usize, f64)> {
    let p = state.params();
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let td = time_decompose(t, p)?;
    let s = td.radius / p.c0;
    if s - dt <= 0.0 || s + dt > p.tau * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "stencil [t - {dt}, t + {dt}] around t = {t} straddles a checkpoint of interval ({}, {}]",
            p.checkpoint(td.n),
            p.checkpoint(td.n + 1)
        )));
    }
    Ok((td.n, s))
}

fn axis_shift(x: &[f64; 3], a: usize, d: f64) -> [f64; 3] {
    let mut y = *x;
    y[a] += d;
    y
}

/// `∂v/∂t + ∇·j` by central differences.
pub fn continuity_residual(state: &EvolutionState, x: &[f64; 3], t: f64, steps: FdSteps) -> Result<f64> {
    let FdSteps { dt, dx } = steps;
    if !(dx > 0.0) {
        return Err(Error::domain(format!("space step must be positive, got {dx}")));
    }
    let (n, s) = interior_offset(state, t, dt)?;
    let vt = (state.value_in(n, x, s + dt)? - state.value_in(n, x, s - dt)?) / (2.0 * dt);
    let mut div = 0.0;
    for a in 0..state.dim().get() {
        let jp = state.flux_in(n, &axis_shift(x, a, dx), s)?;
        let jm = state.flux_in(n, &axis_shift(x, a, -dx), s)?;
        div += (jp[a] - jm[a]) / (2.0 * dx);
    }
    Ok(vt + div)
}

/// `(1/c0²) v_tt + (N-1)/(c0 R) v_t - ∇²v` by central differences.
pub fn epd_residual(state: &EvolutionState, x: &[f64; 3], t: f64, steps: FdSteps) -> Result<f64> {
    let FdSteps { dt, dx } = steps;
    if !(dx > 0.0) {
        return Err(Error::domain(format!("space step must be positive, got {dx}")));
    }
    let (n, s) = interior_offset(state, t, dt)?;
    let c0 = state.params().c0;
    let dim = state.dim();
    let v0 = state.value_in(n, x, s)?;
    let vp = state.value_in(n, x, s + dt)?;
    let vm = state.value_in(n, x, s - dt)?;
    let vtt = (vp - 2.0 * v0 + vm) / (dt * dt);
    let vt = (vp - vm) / (2.0 * dt);
    let mut lap = 0.0;
    for a in 0..dim.get() {
        let up = state.value_in(n, &axis_shift(x, a, dx), s)?;
        let dn = state.value_in(n, &axis_shift(x, a, -dx), s)?;
        lap += (up - 2.0 * v0 + dn) / (dx * dx);
    }
    let r = c0 * s;
    Ok(vtt / (c0 * c0) + (dim.as_f64() - 1.0) / (c0 * r) * vt - lap)
}

/// One-sided time derivatives of `v(x, ·)` at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEstimate {
    /// Left derivative `∂v/∂t(τ_m-)`.
    pub left: f64,
    /// Right derivative `∂v/∂t(τ_m+)`.
    pub right: f64,
    /// Finest step used.
    pub step: f64,
}

impl JumpEstimate {
    /// `right - left`.
    pub fn jump(&self) -> f64 {
        self.right - self.left
    }
}

/// Second-order one-sided differences with steps `τ/64, τ/128, τ/256`,
/// extrapolated from the two finest.
pub fn ddt_jump(state: &EvolutionState, m: usize, x: &[f64; 3]) -> Result<JumpEstimate> {
    if m == 0 {
        return Err(Error::domain("jumps are defined at checkpoints m >= 1"));
    }
    let tau = state.params().tau;
    let left_at = |e: f64| -> Result<f64> {
        let f0 = state.value_in(m - 1, x, tau)?;
        let f1 = state.value_in(m - 1, x, tau - e)?;
        let f2 = state.value_in(m - 1, x, tau - 2.0 * e)?;
        Ok((3.0 * f0 - 4.0 * f1 + f2) / (2.0 * e))
    };
    let right_at = |e: f64| -> Result<f64> {
        let f0 = state.value_in(m, x, 0.0)?;
        let f1 = state.value_in(m, x, e)?;
        let f2 = state.value_in(m, x, 2.0 * e)?;
        Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * e))
    };
    let e = tau / 64.0;
    let richardson = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let _coarse = f(e)?;
        let mid = f(e / 2.0)?;
        let fine = f(e / 4.0)?;
        Ok((4.0 * fine - mid) / 3.0)
    };
    Ok(JumpEstimate {
        left: richardson(&left_at)?,
        right: richardson(&right_at)?,
        step: e / 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;

    fn quadratic(dim: Dim) -> Arc<dyn ScalarField> {
        Arc::new(FnField::new(dim, |p: &[f64; 3]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2]))
    }

    fn affine(dim: Dim) -> Arc<dyn ScalarField> {
        Arc::new(FnField::new(dim, |p: &[f64; 3]| 1.0 + 0.5 * p[0] - 2.0 * p[1] + 0.25 * p[2]))
    }

    fn params() -> ModelParams {
        ModelParams::new(1.5, 0.4).unwrap()
    }

    #[test]
    fn quadratic_field_between_checkpoints() {
        for dim in Dim::ALL {
            let st = EvolutionState::from_field(params(), quadratic(dim), SphereQuadrature::new(dim), 2).unwrap();
            let x = crate::field::point(dim, &[0.3, -0.1, 0.2][..dim.get()]).unwrap();
            let x2: f64 = x.iter().map(|v| v * v).sum();
            let v = st.value(&x, 0.1).unwrap();
            assert!((v - (x2 + 0.15f64.powi(2))).abs() < 1e-12);
            // after one full period the mean adds (c0 τ)² once more
            let v = st.value(&x, 0.5).unwrap();
            assert!((v - (x2 + 0.36 + 0.15f64.powi(2))).abs() < 1e-12);
        }
    }

    #[test]
    fn flux_of_linear_field_is_fick() {
        for dim in Dim::ALL {
            let st = EvolutionState::from_field(params(), affine(dim), SphereQuadrature::dense(dim), 1).unwrap();
            let t = 0.3;
            let j = flux(&st, &[0.1, 0.2, 0.3], t).unwrap();
            let d = super::super::fick_d(t, &params(), dim).unwrap();
            let b = [0.5, -2.0, 0.25];
            for a in 0..dim.get() {
                assert!((j[a] + d * b[a]).abs() < 1e-12, "dim {dim} axis {a}");
            }
            assert!(flux(&st, &[0.0; 3], 0.4).is_err());
        }
    }

    #[test]
    fn residuals_vanish_for_polynomials() {
        for dim in Dim::ALL {
            let q = EvolutionState::from_field(params(), quadratic(dim), SphereQuadrature::new(dim), 1).unwrap();
            let steps = FdSteps { dt: 0.01, dx: 0.01 };
            let x = [0.2, 0.1, -0.3];
            assert!(epd_residual(&q, &x, 0.25, steps).unwrap().abs() < 1e-8);
            assert!(continuity_residual(&q, &x, 0.25, steps).unwrap().abs() < 1e-8);
            let a = EvolutionState::from_field(params(), affine(dim), SphereQuadrature::new(dim), 1).unwrap();
            assert!(continuity_residual(&a, &x, 0.25, steps).unwrap().abs() < 1e-12);
            assert!(epd_residual(&a, &x, 0.25, steps).unwrap().abs() < 1e-8);
            assert!(epd_residual(&a, &x, 0.395, steps).is_err());
        }
    }

    #[test]
    fn quadratic_jump() {
        let p = params();
        let st = EvolutionState::from_field(p, quadratic(Dim::Two), SphereQuadrature::new(Dim::Two), 1).unwrap();
        let j = ddt_jump(&st, 1, &[0.3, 0.4, 0.0]).unwrap();
        let want = 2.0 * p.c0 * p.c0 * p.tau;
        assert!((j.left - want).abs() < 1e-9 * want, "{j:?}");
        assert!(j.right.abs() < 1e-9 * want);
    }
}
