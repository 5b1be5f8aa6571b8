use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::symbol::{EntireFunction, SemigroupTransform, SymbolSpec};

/// Angles sampled on each circle `|z| = r` (the imaginary axis is always
/// included).
pub const DEFAULT_ANGLES: usize = 720;

/// Relative slope increase between the lower and upper half of the radii
/// above which growth is declared faster than exponential type.
pub const SLOPE_GROWTH_TOL: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    CompatibleWithCompactSupport,
    Incompatible,
}

/// Maximum modulus `M(r) = max_{|z|=r} |F(z)|` in log form, with least-
/// squares slopes of `log M` against `r` on both halves of the radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    pub log_max_modulus: Vec<f64>,
    pub slope_low: f64,
    pub slope_high: f64,
    /// Slope over the upper half; `None` when the growth is superlinear.
    pub fitted_type: Option<f64>,
    pub classification: Classification,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Estimates the exponential type of `f` from its maximum modulus on the
/// given circles.
pub fn exp_type_estimate(f: &dyn EntireFunction, radii: &[f64], n_angles: usize) -> Result<GrowthReport> {
    if radii.len() < 4 {
        return Err(Error::InvalidConfig("need at least 4 radii".into()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("radii must be positive and strictly increasing".into()));
    }
    if n_angles < 4 {
        return Err(Error::InvalidConfig("need at least 4 angles".into()));
    }
    let mut angles: Vec<f64> = (0..n_angles).map(|j| 2.0 * PI * j as f64 / n_angles as f64).collect();
    angles.extend([0.5 * PI, 1.5 * PI]);
    let log_max_modulus: Vec<f64> = radii
        .iter()
        .map(|&r| {
            angles
                .iter()
                .map(|&a| f.log_abs(Complex64::from_polar(r, a)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let half = radii.len() / 2;
    let slope_low = ls_slope(&radii[..half], &log_max_modulus[..half]);
    let slope_high = ls_slope(&radii[half..], &log_max_modulus[half..]);
    let superlinear = slope_high > (1.0 + SLOPE_GROWTH_TOL) * slope_low.max(0.0) + 1e-9;
    Ok(GrowthReport {
        radii: radii.to_vec(),
        log_max_modulus,
        slope_low,
        slope_high,
        fitted_type: (!superlinear).then_some(slope_high.max(0.0)),
        classification: if superlinear {
            Classification::Incompatible
        } else {
            Classification::CompatibleWithCompactSupport
        },
    })
}

/// `log |exp(-â(z_m))|` along an explicit sequence `z_m = m e^{iφ_m}` on
/// which it grows like `m^degree`, with the fitted exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub b: f64,
    pub degree: u32,
    pub m: Vec<f64>,
    pub angle: Vec<f64>,
    pub log_modulus: Vec<f64>,
    pub exponent: f64,
}

/// Sequence angle for `â = b z^d` (even `d`) or `i b z^d` (odd `d`).
fn probe_angle(b: f64, degree: u32, m: f64) -> f64 {
    let d = degree as f64;
    if degree % 2 == 0 {
        let n = d / 2.0;
        if b > 0.0 {
            m * PI / (2.0 * n * (m + 0.5))
        } else {
            PI / (8.0 * n)
        }
    } else if b > 0.0 {
        PI / (2.0 * d)
    } else {
        3.0 * PI / (2.0 * d)
    }
}

/// Fits `log log |f1(z_m)|` against `log m` for `m ∈ [10, 1000]`.
pub fn monomial_growth_probe(b: f64, degree: u32) -> Result<ProbeReport> {
    if degree < 2 {
        return Err(Error::domain(format!(
            "degree {degree} symbols (constant or pure drift) generate causal semigroups; the probe needs degree >= 2"
        )));
    }
    let f = SemigroupTransform::new(&SymbolSpec::Monomial { b, degree }, 1.0)?;
    let count = 41;
    let m: Vec<f64> = (0..count)
        .map(|i| 10f64.powf(1.0 + 2.0 * i as f64 / (count - 1) as f64))
        .collect();
    let angle: Vec<f64> = m.iter().map(|&mm| probe_angle(b, degree, mm)).collect();
    let log_modulus: Vec<f64> = m
        .iter()
        .zip(&angle)
        .map(|(&mm, &a)| f.log_abs(Complex64::from_polar(mm, a)))
        .collect();
    if let Some(i) = log_modulus.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::domain(format!(
            "probe sequence is not growing at m = {}: log|f1| = {}",
            m[i], log_modulus[i]
        )));
    }
    let lx: Vec<f64> = m.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = log_modulus.iter().map(|v| v.ln()).collect();
    Ok(ProbeReport {
        b,
        degree,
        exponent: ls_slope(&lx, &ly),
        m,
        angle,
        log_modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::ShellTransform;
    use crate::dim::Dim;

    fn radii(n: usize, rmax: f64) -> Vec<f64> {
        (1..=n).map(|i| rmax * i as f64 / n as f64).collect()
    }

    #[test]
    fn gaussian_is_incompatible() {
        let f = SemigroupTransform::new(&SymbolSpec::Gaussian { d0: 1.0 }, 1.0).unwrap();
        let rep = exp_type_estimate(&f, &radii(20, 20.0), DEFAULT_ANGLES).unwrap();
        for (r, v) in rep.radii.iter().zip(&rep.log_max_modulus) {
            assert!((v - r * r).abs() < 1e-9 * r * r);
        }
        assert_eq!(rep.classification, Classification::Incompatible);
        assert_eq!(rep.fitted_type, None);
        let wide = exp_type_estimate(&f, &radii(40, 40.0), DEFAULT_ANGLES).unwrap();
        assert_eq!(wide.classification, Classification::Incompatible);
    }

    #[test]
    fn shells_have_their_radius_as_type() {
        let f = ShellTransform { dim: Dim::One, radius: 2.0 };
        let rep = exp_type_estimate(&f, &radii(20, 20.0), DEFAULT_ANGLES).unwrap();
        assert_eq!(rep.classification, Classification::CompatibleWithCompactSupport);
        assert!((rep.fitted_type.unwrap() - 2.0).abs() < 0.05);
        // logarithmic prefactors in 2D and 3D need a longer range
        for dim in [Dim::Two, Dim::Three] {
            let f = ShellTransform { dim, radius: 2.0 };
            let rep = exp_type_estimate(&f, &radii(40, 40.0), 360).unwrap();
            assert_eq!(rep.classification, Classification::CompatibleWithCompactSupport);
            assert!((rep.fitted_type.unwrap() - 2.0).abs() < 0.05, "{dim} {:?}", rep.fitted_type);
        }
    }

    #[test]
    fn constant_symbol_has_type_zero() {
        let f = SemigroupTransform::new(&SymbolSpec::Constant { b: 0.7 }, 2.0).unwrap();
        let rep = exp_type_estimate(&f, &radii(20, 20.0), DEFAULT_ANGLES).unwrap();
        assert_eq!(rep.classification, Classification::CompatibleWithCompactSupport);
        assert!(rep.fitted_type.unwrap().abs() < 1e-12);
    }

    #[test]
    fn probes_recover_degree() {
        for degree in 2..=6 {
            for b in [1.0, -1.0, 0.3] {
                let rep = monomial_growth_probe(b, degree).unwrap();
                assert!((rep.exponent - degree as f64).abs() < 0.1, "d={degree} b={b}: {}", rep.exponent);
            }
        }
        assert!(monomial_growth_probe(1.0, 1).is_err());
    }

    #[test]
    fn odd_probe_is_exact() {
        let rep = monomial_growth_probe(1.0, 3).unwrap();
        for (m, v) in rep.m.iter().zip(&rep.log_modulus) {
            assert!((v / m.powi(3) - 1.0).abs() < 1e-12);
        }
    }
}
