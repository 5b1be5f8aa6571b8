use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::radial::{convolve_radial_with, ConvolveOptions, RadialMeasure};

use super::{time_decompose, ModelParams};

fn chain_options(p: &ModelParams, opts: &ConvolveOptions) -> ConvolveOptions {
    ConvolveOptions {
        merge_tol: Some(opts.merge_tol.unwrap_or(1e-9 * p.lambda())),
        ..*opts
    }
}

/// Green function `G(·, t)` with default resolution.
pub fn green(t: f64, p: &ModelParams, dim: Dim) -> Result<RadialMeasure> {
    green_with(t, p, dim, &ConvolveOptions::default())
}

/// `G(·, t) = G(·, τ_n) * atom(R(t))` with `G(·, τ_{n+1}) = G(·, τ_n) * atom(c0 τ)`.
pub fn green_with(t: f64, p: &ModelParams, dim: Dim, opts: &ConvolveOptions) -> Result<RadialMeasure> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("the Green function needs t > 0, got {t}")));
    }
    let td = time_decompose(t, p)?;
    let opts = chain_options(p, opts);
    let step = RadialMeasure::atom(dim, p.lambda(), 1.0)?;
    let mut g = RadialMeasure::delta(dim);
    for _ in 0..td.n {
        g = convolve_radial_with(&g, &step, &opts)?;
    }
    convolve_radial_with(&g, &RadialMeasure::atom(dim, td.radius, 1.0)?, &opts)
}

/// Defect of `G(τ_{k+m}) = G(τ_k) * G(τ_m)`: the `L¹` distance between the
/// two radial CDFs divided by `c0 τ`. Zero when `k` or `m` is zero.
pub fn semigroup_check(k: usize, m: usize, p: &ModelParams, dim: Dim) -> Result<f64> {
    semigroup_check_with(k, m, p, dim, &ConvolveOptions::default())
}

pub fn semigroup_check_with(
    k: usize,
    m: usize,
    p: &ModelParams,
    dim: Dim,
    opts: &ConvolveOptions,
) -> Result<f64> {
    if k == 0 || m == 0 {
        return Ok(0.0);
    }
    let direct = green_with(p.checkpoint(k + m), p, dim, opts)?;
    let gk = green_with(p.checkpoint(k), p, dim, opts)?;
    let gm = green_with(p.checkpoint(m), p, dim, opts)?;
    let product = convolve_radial_with(&gk, &gm, &chain_options(p, opts))?;
    Ok(direct.cdf_distance(&product)? / p.lambda())
}
