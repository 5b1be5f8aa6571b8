//! Grid-sampled concentrations and the spherical-mean operator.

mod grid;
mod io;
mod sphere;

pub use grid::GridField;
pub use io::{read_field, read_field_csv, write_field_binary, write_field_csv, FieldHeader};
pub use sphere::{gradient_mean, integrate, spherical_mean, SphereQuadrature};

use std::sync::Arc;

use crate::dim::Dim;
use crate::error::{Error, Result};

/// A real function on (a region of) `R^N`, evaluated at points padded to
/// three coordinates (unused coordinates are zero).
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> Dim;

    fn value(&self, x: &[f64; 3]) -> f64;

    /// Succeeds when the closed ball `B_radius(center)` lies inside the
    /// region where `value` is defined.
    fn check_ball(&self, center: &[f64; 3], radius: f64) -> Result<()>;
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn dim(&self) -> Dim {
        (**self).dim()
    }

    fn value(&self, x: &[f64; 3]) -> f64 {
        (**self).value(x)
    }

    fn check_ball(&self, center: &[f64; 3], radius: f64) -> Result<()> {
        (**self).check_ball(center, radius)
    }
}

/// Closed-form field defined on all of `R^N`.
pub struct FnField<F> {
    dim: Dim,
    f: F,
}

impl<F: Fn(&[f64; 3]) -> f64 + Send + Sync> FnField<F> {
    pub fn new(dim: Dim, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64; 3]) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn value(&self, x: &[f64; 3]) -> f64 {
        (self.f)(x)
    }

    fn check_ball(&self, _center: &[f64; 3], _radius: f64) -> Result<()> {
        Ok(())
    }
}

/// `x ↦ mean of inner over S_radius(x)`, evaluated lazily.
pub struct SphericalMeanField {
    inner: Arc<dyn ScalarField>,
    radius: f64,
    quad: Arc<SphereQuadrature>,
}

impl SphericalMeanField {
    pub fn new(inner: Arc<dyn ScalarField>, radius: f64, quad: Arc<SphereQuadrature>) -> Result<Self> {
        if inner.dim() != quad.dim() {
            return Err(Error::DimensionMismatch {
                left: inner.dim().get(),
                right: quad.dim().get(),
            });
        }
        if !(radius >= 0.0) {
            return Err(Error::domain(format!("negative radius {radius}")));
        }
        Ok(SphericalMeanField { inner, radius, quad })
    }
}

impl ScalarField for SphericalMeanField {
    fn dim(&self) -> Dim {
        self.inner.dim()
    }

    fn value(&self, x: &[f64; 3]) -> f64 {
        self.quad.mean_unchecked(&*self.inner, x, self.radius)
    }

    fn check_ball(&self, center: &[f64; 3], radius: f64) -> Result<()> {
        self.inner.check_ball(center, radius + self.radius)
    }
}

/// Box `[c - r, c + r]` on the active axes, used in out-of-domain errors.
pub(crate) fn ball_box(dim: Dim, center: &[f64; 3], radius: f64) -> Vec<[f64; 2]> {
    (0..dim.get())
        .map(|a| [center[a] - radius, center[a] + radius])
        .collect()
}

/// Pads a coordinate slice to three components.
pub fn point(dim: Dim, coords: &[f64]) -> Result<[f64; 3]> {
    if coords.len() != dim.get() {
        return Err(Error::DimensionMismatch {
            left: dim.get(),
            right: coords.len(),
        });
    }
    let mut p = [0.0; 3];
    p[..coords.len()].copy_from_slice(coords);
    Ok(p)
}
