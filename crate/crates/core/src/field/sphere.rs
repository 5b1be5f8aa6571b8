use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

use super::{GridField, ScalarField};

/// Weighted node set on the unit sphere `S_1(0)`. All rules built here are
/// antipodally symmetric, so odd moments vanish up to round-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    dim: Dim,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

pub const DEFAULT_CIRCLE_NODES: usize = 256;
pub const DEFAULT_SPHERE_NODES: usize = 512;

impl SphereQuadrature {
    /// Default rule: `{+1, -1}` in 1D, 256 uniform angles in 2D, 512
    /// symmetrized Fibonacci nodes in 3D.
    pub fn new(dim: Dim) -> Self {
        match dim {
            Dim::One => Self::two_point(),
            Dim::Two => Self::circle(DEFAULT_CIRCLE_NODES).unwrap(),
            Dim::Three => Self::fibonacci(DEFAULT_SPHERE_NODES).unwrap(),
        }
    }

    /// Rule with roughly `n` nodes of the default family.
    pub fn with_nodes(dim: Dim, n: usize) -> Result<Self> {
        match dim {
            Dim::One => Ok(Self::two_point()),
            Dim::Two => Self::circle(n),
            Dim::Three => Self::fibonacci(n),
        }
    }

    /// High-accuracy rule for smooth integrands: 1024 angles in 2D and a
    /// 32 x 64 Gauss product rule in 3D.
    pub fn dense(dim: Dim) -> Self {
        match dim {
            Dim::One => Self::two_point(),
            Dim::Two => Self::circle(1024).unwrap(),
            Dim::Three => Self::gauss_product(32, 64).unwrap(),
        }
    }

    fn two_point() -> Self {
        SphereQuadrature {
            dim: Dim::One,
            nodes: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
            weights: vec![0.5, 0.5],
        }
    }

    /// `n` equally spaced angles; `n` must be even.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "circle rule needs an even node count >= 2, got {n}"
            )));
        }
        let nodes = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                [th.cos(), th.sin(), 0.0]
            })
            .collect();
        Ok(SphereQuadrature {
            dim: Dim::Two,
            nodes,
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Fibonacci lattice on the upper hemisphere plus its antipodes.
    pub fn fibonacci(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "sphere rule needs an even node count >= 2, got {n}"
            )));
        }
        let half = n / 2;
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut nodes = Vec::with_capacity(n);
        for i in 0..half {
            let z = (i as f64 + 0.5) / half as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            nodes.push([rho * phi.cos(), rho * phi.sin(), z]);
        }
        for i in 0..half {
            let [x, y, z] = nodes[i];
            nodes.push([-x, -y, -z]);
        }
        Ok(SphereQuadrature {
            dim: Dim::Three,
            nodes,
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Gauss-Legendre in `cos θ` times uniform azimuths. Integrates
    /// spherical polynomials of degree `< min(2 n_polar, n_azimuth)` exactly.
    pub fn gauss_product(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 1 || n_azimuth < 2 || n_azimuth % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "product rule needs n_polar >= 1 and even n_azimuth, got {n_polar} x {n_azimuth}"
            )));
        }
        let gl = GaussLegendre::new(n_polar);
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..n_azimuth {
                let phi = 2.0 * PI * (k as f64 + 0.5) / n_azimuth as f64;
                nodes.push([rho * phi.cos(), rho * phi.sin(), *z]);
                weights.push(0.5 * wz / n_azimuth as f64);
            }
        }
        Ok(SphereQuadrature {
            dim: Dim::Three,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rescales all weights; used to build deliberately broken rules.
    pub fn scaled_weights(&self, factor: f64) -> Self {
        SphereQuadrature {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }

    /// `(Σ w, Σ w y, Σ w y yᵀ)`.
    pub fn moments(&self) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let mut m0 = 0.0;
        let mut m1 = [0.0; 3];
        let mut m2 = [[0.0; 3]; 3];
        for (y, w) in self.nodes.iter().zip(&self.weights) {
            m0 += w;
            for k in 0..3 {
                m1[k] += w * y[k];
                for l in 0..3 {
                    m2[k][l] += w * y[k] * y[l];
                }
            }
        }
        (m0, m1, m2)
    }

    pub(crate) fn mean_unchecked<F: ScalarField + ?Sized>(&self, f: &F, center: &[f64; 3], r: f64) -> f64 {
        if r == 0.0 {
            return f.value(center);
        }
        let mut acc = 0.0;
        for (y, w) in self.nodes.iter().zip(&self.weights) {
            let p = [center[0] + r * y[0], center[1] + r * y[1], center[2] + r * y[2]];
            acc += w * f.value(&p);
        }
        acc
    }
}

fn check_args<F: ScalarField + ?Sized>(f: &F, quad: &SphereQuadrature, center: &[f64; 3], r: f64) -> Result<()> {
    if f.dim() != quad.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim().get(),
            right: quad.dim().get(),
        });
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("sphere radius must be finite and >= 0, got {r}")));
    }
    f.check_ball(center, r)
}

/// `Σ w_i f(center + r y_i)`: the mean of `f` over `S_r(center)`.
pub fn spherical_mean<F: ScalarField + ?Sized>(
    f: &F,
    quad: &SphereQuadrature,
    center: &[f64; 3],
    r: f64,
) -> Result<f64> {
    check_args(f, quad, center, r)?;
    Ok(quad.mean_unchecked(f, center, r))
}

/// `Σ w_i f(center + r y_i) y_i`.
pub fn gradient_mean<F: ScalarField + ?Sized>(
    f: &F,
    quad: &SphereQuadrature,
    center: &[f64; 3],
    r: f64,
) -> Result<[f64; 3]> {
    check_args(f, quad, center, r)?;
    let mut acc = [0.0; 3];
    for (y, w) in quad.nodes.iter().zip(&quad.weights) {
        let p = [center[0] + r * y[0], center[1] + r * y[1], center[2] + r * y[2]];
        let v = w * f.value(&p);
        for k in 0..3 {
            acc[k] += v * y[k];
        }
    }
    Ok(acc)
}

/// Midpoint-rule integral `h^N Σ samples`.
pub fn integrate(f: &GridField) -> f64 {
    f.spacing().powi(f.dim().get() as i32) * f.samples().iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;

    fn all_rules() -> Vec<SphereQuadrature> {
        let mut v: Vec<_> = Dim::ALL.iter().map(|&d| SphereQuadrature::new(d)).collect();
        v.push(SphereQuadrature::dense(Dim::Three));
        v
    }

    #[test]
    fn moment_identities() {
        for q in all_rules() {
            let (m0, m1, m2) = q.moments();
            let n = q.dim().get();
            assert!((m0 - 1.0).abs() < 1e-12);
            assert!(m1.iter().all(|v| v.abs() < 1e-12), "{m1:?}");
            let tol = if q.len() == DEFAULT_SPHERE_NODES { 5e-3 } else { 1e-12 };
            for k in 0..n {
                for l in 0..n {
                    let want = if k == l { 1.0 / n as f64 } else { 0.0 };
                    assert!((m2[k][l] - want).abs() < tol, "dim {n} ({k},{l}) {}", m2[k][l]);
                }
            }
        }
    }

    #[test]
    fn one_dimensional_sphere_is_two_points() {
        let q = SphereQuadrature::new(Dim::One);
        assert_eq!(q.nodes(), &[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
        assert_eq!(q.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn quadratic_mean_matches_dense_rule() {
        let f = FnField::new(Dim::Three, |p: &[f64; 3]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        let x0 = [0.3, -0.2, 1.1];
        let coarse = spherical_mean(&f, &SphereQuadrature::new(Dim::Three), &x0, 0.7).unwrap();
        let dense = spherical_mean(&f, &SphereQuadrature::gauss_product(40, 80).unwrap(), &x0, 0.7).unwrap();
        let want = 0.09 + 0.04 + 1.21 + 0.49;
        assert!((coarse - want).abs() < 1e-12);
        assert!((dense - want).abs() < 1e-12);
    }

    #[test]
    fn gradient_mean_of_linear_field() {
        let b = [0.5, -2.0, 1.5];
        for dim in Dim::ALL {
            let f = FnField::new(dim, move |p: &[f64; 3]| 3.0 + b[0] * p[0] + b[1] * p[1] + b[2] * p[2]);
            let q = SphereQuadrature::dense(dim);
            let g = gradient_mean(&f, &q, &[0.2, 0.1, -0.4], 0.8).unwrap();
            for k in 0..dim.get() {
                let want = 0.8 / dim.as_f64() * b[k];
                assert!((g[k] - want).abs() < 1e-12, "dim {dim} axis {k}");
            }
        }
    }

    #[test]
    fn zero_radius_and_errors() {
        let g = GridField::centered(Dim::Two, 1.0, 21, |p| p[0] + 2.0 * p[1]).unwrap();
        let q = SphereQuadrature::new(Dim::Two);
        let c = [0.1, 0.2, 0.0];
        assert!((spherical_mean(&g, &q, &c, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(spherical_mean(&g, &q, &c, -1.0).is_err());
        assert!(matches!(
            spherical_mean(&g, &q, &c, 0.95),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            spherical_mean(&g, &SphereQuadrature::new(Dim::Three), &c, 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn integrate_normalized_gaussian() {
        let s = 0.15;
        let g = GridField::centered(Dim::Two, 1.0, 201, |p| {
            (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * s * s)).exp() / (2.0 * PI * s * s)
        })
        .unwrap();
        assert!((integrate(&g) - 1.0).abs() < 1e-6);
    }
}
