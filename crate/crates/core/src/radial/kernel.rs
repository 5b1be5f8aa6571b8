//! Law of `|X + Y|` for independent `X`, `Y` uniform on spheres of radii
//! `R1`, `R2` in `R^N`. This is one shell-shell convolution step of the
//! Green function.

use std::f64::consts::PI;

use crate::dim::Dim;
use crate::error::{Error, Result};

use super::Atom;

/// Elementary shell-pair kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellKernel {
    dim: Dim,
    r1: f64,
    r2: f64,
}

/// Value of the shell-pair law at a radius: a density in 2D/3D, a pair of
/// atoms in 1D.
#[derive(Debug, Clone, PartialEq)]
pub enum ShellPair {
    Density(f64),
    Atoms(Vec<Atom>),
}

impl ShellKernel {
    pub fn new(dim: Dim, r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1.is_finite() && r2 > 0.0 && r2.is_finite()) {
            return Err(Error::domain(format!(
                "shell radii must be positive and finite, got {r1} and {r2}"
            )));
        }
        Ok(ShellKernel { dim, r1, r2 })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn radii(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    /// `[|R1 - R2|, R1 + R2]`.
    pub fn support(&self) -> (f64, f64) {
        ((self.r1 - self.r2).abs(), self.r1 + self.r2)
    }

    /// Radial density `dμ/dr`; zero outside the support. In 1D the law is
    /// discrete and this returns 0 everywhere.
    pub fn density(&self, r: f64) -> f64 {
        pair_density(self.dim, self.r1, self.r2, r)
    }

    /// `P(|X + Y| <= r)`.
    pub fn cdf(&self, r: f64) -> f64 {
        pair_cdf(self.dim, self.r1, self.r2, r)
    }

    /// The two 1D atoms `(|R1-R2|, 1/2)` and `(R1+R2, 1/2)`.
    pub fn atoms_1d(&self) -> Vec<Atom> {
        vec![
            Atom::new((self.r1 - self.r2).abs(), 0.5),
            Atom::new(self.r1 + self.r2, 0.5),
        ]
    }
}

/// Shell-pair law evaluated at `r`.
pub fn shell_pair_density(dim: usize, r1: f64, r2: f64, r: f64) -> Result<ShellPair> {
    let dim = Dim::new(dim)?;
    let k = ShellKernel::new(dim, r1, r2)?;
    Ok(match dim {
        Dim::One => ShellPair::Atoms(k.atoms_1d()),
        _ => ShellPair::Density(k.density(r)),
    })
}

pub(crate) fn pair_density(dim: Dim, s: f64, q: f64, r: f64) -> f64 {
    let lo = (s - q).abs();
    let hi = s + q;
    if !(r > lo && r < hi) {
        return 0.0;
    }
    match dim {
        Dim::One => 0.0,
        Dim::Two => {
            let a = hi * hi - r * r;
            let b = r * r - lo * lo;
            2.0 * r / (PI * (a * b).sqrt())
        }
        Dim::Three => r / (2.0 * s * q),
    }
}

/// Conditional CDF `P(|sX' + qY'| <= r)` for independent unit-sphere
/// directions. Zero radii degenerate to a step at the other radius.
#[inline]
pub(crate) fn pair_cdf(dim: Dim, s: f64, q: f64, r: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    if s <= 0.0 || q <= 0.0 {
        return if r >= s + q { 1.0 } else { 0.0 };
    }
    match dim {
        Dim::One => {
            let mut c = 0.0;
            if r >= (s - q).abs() {
                c += 0.5;
            }
            if r >= s + q {
                c += 0.5;
            }
            c
        }
        Dim::Two => {
            let x = (r * r - s * s - q * q) / (2.0 * s * q);
            if x >= 1.0 {
                1.0
            } else if x <= -1.0 {
                0.0
            } else {
                1.0 - x.acos() / PI
            }
        }
        Dim::Three => {
            let d = s - q;
            ((r * r - d * d) / (4.0 * s * q)).clamp(0.0, 1.0)
        }
    }
}

/// CDF of the first Cartesian coordinate of a uniform direction on the
/// unit sphere of `R^N`.
#[inline]
pub(crate) fn coordinate_cdf(dim: Dim, y: f64) -> f64 {
    match dim {
        Dim::One => {
            if y < -1.0 {
                0.0
            } else if y < 1.0 {
                0.5
            } else {
                1.0
            }
        }
        Dim::Two => {
            if y <= -1.0 {
                0.0
            } else if y >= 1.0 {
                1.0
            } else {
                1.0 - y.acos() / PI
            }
        }
        Dim::Three => (0.5 * (1.0 + y)).clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss6, integrate_sqrt_ends};

    #[test]
    fn frozen_values() {
        // 3D, R1 = R2 = 1: density r / 2 on [0, 2].
        let k = ShellKernel::new(Dim::Three, 1.0, 1.0).unwrap();
        assert!((k.density(1.0) - 0.5).abs() < 1e-15);
        assert!((k.cdf(2.0) - 1.0).abs() < 1e-15);
        assert!((k.cdf(1.0) - 0.25).abs() < 1e-15);
        // 2D, R1 = R2 = 1, r = 1: 2 / (π √3)
        let k = ShellKernel::new(Dim::Two, 1.0, 1.0).unwrap();
        assert!((k.density(1.0) - 2.0 / (PI * 3f64.sqrt())).abs() < 1e-15);
        assert!((k.density(1.0) - 0.367_552_6).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_pair_is_two_atoms() {
        match shell_pair_density(1, 2.0, 1.0, 0.3).unwrap() {
            ShellPair::Atoms(a) => {
                assert_eq!(a, vec![Atom::new(1.0, 0.5), Atom::new(3.0, 0.5)]);
            }
            other => panic!("expected atoms, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            shell_pair_density(3, 0.0, 1.0, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            shell_pair_density(4, 1.0, 1.0, 0.5),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn density_integrates_to_one_and_matches_cdf() {
        for dim in [Dim::Two, Dim::Three] {
            for &(r1, r2) in &[(1.0, 1.0), (1.0, 0.5), (0.3, 2.0), (1.7, 1.69)] {
                let k = ShellKernel::new(dim, r1, r2).unwrap();
                let (lo, hi) = k.support();
                let n = 64;
                let rule = gauss6();
                let mut total = 0.0;
                for i in 0..n {
                    let a = lo + (hi - lo) * i as f64 / n as f64;
                    let b = lo + (hi - lo) * (i + 1) as f64 / n as f64;
                    let part = integrate_sqrt_ends(rule, a, b, i == 0, i == n - 1, |r| {
                        k.density(r)
                    });
                    total += part;
                    if i == n / 2 {
                        assert!((k.cdf(b) - total).abs() < 1e-8, "{dim:?} {r1} {r2}");
                    }
                }
                assert!((total - 1.0).abs() < 1e-8, "{dim:?} {r1} {r2} total={total}");
            }
        }
    }

    #[test]
    fn pair_cdf_is_symmetric_in_radii() {
        for dim in Dim::ALL {
            for &r in &[0.1, 0.5, 1.0, 1.4, 2.5] {
                assert_eq!(pair_cdf(dim, 0.7, 1.3, r), pair_cdf(dim, 1.3, 0.7, r));
            }
        }
    }
}
