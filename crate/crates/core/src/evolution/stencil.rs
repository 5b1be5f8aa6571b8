//! Grid evolution by precomputed sphere stencils.
//!
//! For a grid point `x` the quadrature points `x + R y_i` sit at the same
//! offsets relative to `x` for every `x`, so the spherical mean with
//! multilinear interpolation is a fixed discrete convolution.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridField, SphereQuadrature};
use crate::radial::RadialMeasure;

use super::{time_decompose, ModelParams};

/// Treatment of sphere points outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The field must vanish (relative to `1e-12` of its peak) on a margin
    /// of width `c0 t`; anything else is an out-of-domain error. Values
    /// outside the grid are zero.
    #[default]
    Strict,
    /// Values outside the grid repeat the nearest edge sample. Intended for
    /// fields that are constant near the edges; mass is not conserved.
    Clamp,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub quadrature: SphereQuadrature,
    pub boundary: Boundary,
}

impl EvolveOptions {
    pub fn new(quadrature: SphereQuadrature) -> Self {
        EvolveOptions {
            quadrature,
            boundary: Boundary::Strict,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }
}

/// Relative threshold defining the support of a grid field.
pub(crate) const FIELD_SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    offsets: Vec<[i64; 3]>,
    weights: Vec<f64>,
}

#[derive(Default)]
pub(crate) struct StencilBuilder {
    acc: BTreeMap<[i64; 3], f64>,
}

impl StencilBuilder {
    /// Adds `scale` times the interpolated sphere mean of radius `r`.
    pub fn add_sphere(&mut self, quad: &SphereQuadrature, h: f64, r: f64, scale: f64) {
        let d = quad.dim().get();
        if r == 0.0 {
            *self.acc.entry([0; 3]).or_insert(0.0) += scale;
            return;
        }
        for (y, w) in quad.nodes().iter().zip(quad.weights()) {
            let mut base = [0i64; 3];
            let mut frac = [0.0; 3];
            for a in 0..d {
                let pos = r * y[a] / h;
                let f = pos.floor();
                base[a] = f as i64;
                frac[a] = pos - f;
            }
            for corner in 0..(1usize << d) {
                let mut cw = scale * w;
                let mut off = base;
                for a in 0..d {
                    if corner >> a & 1 == 1 {
                        cw *= frac[a];
                        off[a] += 1;
                    } else {
                        cw *= 1.0 - frac[a];
                    }
                }
                if cw != 0.0 {
                    *self.acc.entry(off).or_insert(0.0) += cw;
                }
            }
        }
    }

    pub fn build(self) -> Stencil {
        let (offsets, weights) = self.acc.into_iter().filter(|(_, w)| *w != 0.0).unzip();
        Stencil { offsets, weights }
    }
}

impl Stencil {
    pub fn sphere(quad: &SphereQuadrature, h: f64, r: f64) -> Self {
        let mut b = StencilBuilder::default();
        b.add_sphere(quad, h, r, 1.0);
        b.build()
    }

    pub fn is_identity(&self) -> bool {
        self.offsets.len() == 1 && self.offsets[0] == [0; 3] && self.weights[0] == 1.0
    }

    pub fn apply(&self, u: &GridField, boundary: Boundary) -> GridField {
        if self.is_identity() {
            return u.clone();
        }
        let ext = u.extents3();
        let strides = [(ext[1] * ext[2]) as i64, ext[2] as i64, 1i64];
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for o in &self.offsets {
            for a in 0..3 {
                lo[a] = lo[a].min(o[a]);
                hi[a] = hi[a].max(o[a]);
            }
        }
        let deltas: Vec<i64> = self
            .offsets
            .iter()
            .map(|o| o[0] * strides[0] + o[1] * strides[1] + o[2] * strides[2])
            .collect();
        let src = u.samples();
        let out: Vec<f64> = (0..src.len())
            .into_par_iter()
            .map(|p| {
                let idx = u.multi_index(p);
                let interior = (0..3).all(|a| {
                    idx[a] as i64 + lo[a] >= 0 && idx[a] as i64 + hi[a] < ext[a] as i64
                });
                let mut acc = 0.0;
                if interior {
                    for (d, w) in deltas.iter().zip(&self.weights) {
                        acc += w * src[(p as i64 + d) as usize];
                    }
                    return acc;
                }
                'offsets: for (o, w) in self.offsets.iter().zip(&self.weights) {
                    let mut q = 0i64;
                    for a in 0..3 {
                        let mut i = idx[a] as i64 + o[a];
                        if i < 0 || i >= ext[a] as i64 {
                            match boundary {
                                Boundary::Strict => continue 'offsets,
                                Boundary::Clamp => i = i.clamp(0, ext[a] as i64 - 1),
                            }
                        }
                        q += i * strides[a];
                    }
                    acc += w * src[q as usize];
                }
                acc
            })
            .collect();
        u.with_samples_unchecked(out)
    }
}

/// Checks that `u` vanishes on a margin of width `reach` inside the grid.
pub(crate) fn check_padding(u: &GridField, reach: f64) -> Result<()> {
    let Some(support) = u.support_box(FIELD_SUPPORT_EPS) else {
        return Ok(());
    };
    let bounds = u.bounds();
    let slack = 1e-9 * u.spacing();
    let required: Vec<[f64; 2]> = support.iter().map(|s| [s[0] - reach, s[1] + reach]).collect();
    let fits = required
        .iter()
        .zip(&bounds)
        .all(|(r, b)| r[0] >= b[0] - slack && r[1] <= b[1] + slack);
    if fits {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            detail: format!(
                "field support {support:?} needs a margin of {reach} but the grid is {bounds:?}"
            ),
            required,
        })
    }
}

fn check_quadrature(u: &GridField, quad: &SphereQuadrature) -> Result<()> {
    if u.dim() != quad.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim().get(),
            right: quad.dim().get(),
        });
    }
    Ok(())
}

/// `v(·, t)` with the default sphere rule and strict padding.
pub fn evolve(u: &GridField, t: f64, p: &ModelParams) -> Result<GridField> {
    evolve_with(u, t, p, &EvolveOptions::new(SphereQuadrature::new(u.dim())))
}

/// Full steps of radius `c0 τ` up to the last checkpoint, then one partial
/// step of radius `R(t)`.
pub fn evolve_with(u: &GridField, t: f64, p: &ModelParams, opts: &EvolveOptions) -> Result<GridField> {
    check_quadrature(u, &opts.quadrature)?;
    let td = time_decompose(t, p)?;
    if opts.boundary == Boundary::Strict {
        check_padding(u, p.c0 * t)?;
    }
    let h = u.spacing();
    let mut v = u.clone();
    if td.n > 0 {
        let full = Stencil::sphere(&opts.quadrature, h, p.lambda());
        for _ in 0..td.n {
            v = full.apply(&v, opts.boundary);
        }
    }
    Ok(Stencil::sphere(&opts.quadrature, h, td.radius).apply(&v, opts.boundary))
}

/// `[v(·, τ_0), …, v(·, τ_n)]` with `v(·, τ_0) = u`.
pub fn evolve_checkpoints(
    u: &GridField,
    n: usize,
    p: &ModelParams,
    opts: &EvolveOptions,
) -> Result<Vec<GridField>> {
    check_quadrature(u, &opts.quadrature)?;
    if opts.boundary == Boundary::Strict {
        check_padding(u, p.c0 * p.checkpoint(n))?;
    }
    let full = Stencil::sphere(&opts.quadrature, u.spacing(), p.lambda());
    let mut out = Vec::with_capacity(n + 1);
    out.push(u.clone());
    for m in 0..n {
        let next = full.apply(&out[m], opts.boundary);
        out.push(next);
    }
    Ok(out)
}

/// `G *_x u`: atoms contribute weighted sphere means, densities are
/// integrated with the trapezoid rule on their sample grid.
pub fn apply_green(g: &RadialMeasure, u: &GridField, opts: &EvolveOptions) -> Result<GridField> {
    check_quadrature(u, &opts.quadrature)?;
    if g.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: g.dim().get(),
            right: u.dim().get(),
        });
    }
    if opts.boundary == Boundary::Strict {
        check_padding(u, g.outer_radius())?;
    }
    let h = u.spacing();
    let mut b = StencilBuilder::default();
    for a in g.atoms() {
        b.add_sphere(&opts.quadrature, h, a.radius, a.mass);
    }
    for s in g.segments() {
        let n = s.samples.len();
        let dr = s.spacing();
        for (i, &rho) in s.samples.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 * dr } else { dr };
            if rho != 0.0 {
                b.add_sphere(&opts.quadrature, h, s.node(i), w * rho);
            }
        }
    }
    Ok(b.build().apply(u, opts.boundary))
}
