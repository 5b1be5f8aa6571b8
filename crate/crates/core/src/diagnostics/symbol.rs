use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::special::{log_abs_cos, log_abs_j0, log_abs_sinc};

/// Symbol `â` of a convolution semigroup `exp(-â t)`, evaluated on the
/// complex line `w(z) = (z, 0, …, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymbolSpec {
    /// `â(k) = D0 |k|²`.
    Gaussian { d0: f64 },
    /// `b z^d` for even `d`, `i b z^d` for odd `d`.
    Monomial { b: f64, degree: u32 },
    /// `â ≡ b`.
    Constant { b: f64 },
    /// Samples of a real even symbol, fitted by an even polynomial of
    /// degree at most `max_degree` in least squares.
    Tabulated {
        k: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "default_fit_degree")]
        max_degree: u32,
    },
}

fn default_fit_degree() -> u32 {
    4
}

impl SymbolSpec {
    /// Coefficients `c_j` of `â(z) = Σ c_j z^j`.
    pub fn coefficients(&self) -> Result<Vec<Complex64>> {
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            SymbolSpec::Gaussian { d0 } => {
                if !(*d0 > 0.0) {
                    return Err(Error::domain(format!("D0 must be positive, got {d0}")));
                }
                Ok(vec![re(0.0), re(0.0), re(*d0)])
            }
            SymbolSpec::Monomial { b, degree } => {
                if *b == 0.0 || !b.is_finite() {
                    return Err(Error::domain("monomial coefficient must be nonzero"));
                }
                let mut c = vec![re(0.0); *degree as usize + 1];
                c[*degree as usize] = if degree % 2 == 0 {
                    re(*b)
                } else {
                    Complex64::new(0.0, *b)
                };
                Ok(c)
            }
            SymbolSpec::Constant { b } => Ok(vec![re(*b)]),
            SymbolSpec::Tabulated { k, values, max_degree } => {
                let even = fit_even_polynomial(k, values, *max_degree)?;
                let mut c = vec![re(0.0); 2 * even.len() - 1];
                for (j, v) in even.iter().enumerate() {
                    c[2 * j] = re(*v);
                }
                Ok(c)
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(horner(&self.coefficients()?, z))
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Least-squares coefficients of `Σ_j a_j k^{2j}`, `2j <= max_degree`.
fn fit_even_polynomial(k: &[f64], values: &[f64], max_degree: u32) -> Result<Vec<f64>> {
    if k.len() != values.len() {
        return Err(Error::InvalidConfig("tabulated symbol: k and values differ in length".into()));
    }
    let terms = max_degree as usize / 2 + 1;
    if k.len() < terms {
        return Err(Error::InvalidConfig(format!(
            "tabulated symbol needs at least {terms} samples"
        )));
    }
    let scale = k.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    // normal equations in the scaled variable x = (k / scale)²
    let mut a = vec![vec![0.0; terms + 1]; terms];
    for (&kk, &v) in k.iter().zip(values) {
        let x = (kk / scale).powi(2);
        let pw: Vec<f64> = (0..terms).map(|j| x.powi(j as i32)).collect();
        for i in 0..terms {
            for j in 0..terms {
                a[i][j] += pw[i] * pw[j];
            }
            a[i][terms] += pw[i] * v;
        }
    }
    for col in 0..terms {
        let piv = (col..terms)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::InvalidConfig("tabulated symbol: degenerate sample set".into()));
        }
        a.swap(col, piv);
        for row in 0..terms {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..=terms {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Ok((0..terms)
        .map(|j| a[j][terms] / a[j][j] / scale.powi(2 * j as i32))
        .collect())
}

/// An entire function of one complex variable, evaluated in log modulus.
pub trait EntireFunction: Sync {
    fn log_abs(&self, z: Complex64) -> f64;
}

/// `z ↦ exp(-â(w(z)) t)`, so `log |·| = -t Re â(w(z))`.
#[derive(Debug, Clone)]
pub struct SemigroupTransform {
    coefficients: Vec<Complex64>,
    t: f64,
}

impl SemigroupTransform {
    pub fn new(symbol: &SymbolSpec, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::domain(format!("t must be positive, got {t}")));
        }
        Ok(SemigroupTransform {
            coefficients: symbol.coefficients()?,
            t,
        })
    }
}

impl EntireFunction for SemigroupTransform {
    fn log_abs(&self, z: Complex64) -> f64 {
        -self.t * horner(&self.coefficients, z).re
    }
}

/// Fourier transform of the uniform measure on the sphere of radius `R`
/// along `w(z)`: `cos(Rz)`, `J0(Rz)`, `sin(Rz)/(Rz)` for `N = 1, 2, 3`.
/// Its exponential type is `R`.
#[derive(Debug, Clone, Copy)]
pub struct ShellTransform {
    pub dim: Dim,
    pub radius: f64,
}

impl EntireFunction for ShellTransform {
    fn log_abs(&self, z: Complex64) -> f64 {
        let w = z * self.radius;
        match self.dim {
            Dim::One => log_abs_cos(w),
            Dim::Two => log_abs_j0(w),
            Dim::Three => log_abs_sinc(w),
        }
    }
}
