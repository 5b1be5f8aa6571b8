use std::f64::consts::PI;

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Heat kernel `(4π D0 t)^(-N/2) exp(-|x|² / (4 D0 t))`.
pub fn gaussian_green(x: &[f64], t: f64, d0: f64, dim: Dim) -> Result<f64> {
    if x.len() != dim.get() {
        return Err(Error::DimensionMismatch {
            left: dim.get(),
            right: x.len(),
        });
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("the heat kernel needs t > 0, got {t}")));
    }
    if !(d0 > 0.0) {
        return Err(Error::domain(format!("diffusivity must be positive, got {d0}")));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let s = 4.0 * d0 * t;
    Ok((PI * s).powf(-0.5 * dim.as_f64()) * (-r2 / s).exp())
}

/// `erfc(a)` for `a >= 0` as `(2/√π) e^{-a²} ∫_0^∞ e^{-2as - s²} ds`.
fn erfc_nonneg(a: f64) -> f64 {
    let rule = GaussLegendre::new(16);
    // beyond `upper` the integrand is below e^-36
    let upper = if a > 0.0 { (36.0 / (2.0 * a)).min(6.0) } else { 6.0 };
    let panels = 8;
    let w = upper / panels as f64;
    let tail: f64 = (0..panels)
        .map(|i| {
            let lo = i as f64 * w;
            rule.integrate(lo, lo + w, |s| (-2.0 * a * s - s * s).exp())
        })
        .sum();
    2.0 / PI.sqrt() * (-a * a).exp() * tail
}

/// Heat-kernel mass outside the ball of radius `r` at time `t`.
pub fn gaussian_mass_outside(r: f64, t: f64, d0: f64, dim: Dim) -> Result<f64> {
    if !(t > 0.0 && d0 > 0.0) || !(r >= 0.0) {
        return Err(Error::domain("needs t > 0, D0 > 0 and r >= 0"));
    }
    let a = r / (4.0 * d0 * t).sqrt();
    Ok(match dim {
        Dim::One => erfc_nonneg(a),
        Dim::Two => (-a * a).exp(),
        Dim::Three => erfc_nonneg(a) + 2.0 * a / PI.sqrt() * (-a * a).exp(),
    })
}
