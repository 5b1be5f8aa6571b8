//! Periodic Fourier backend. The spherical mean of radius `R` multiplies
//! the mode `k` by `cos(|k|R)`, `J0(|k|R)` or `sin(|k|R)/(|k|R)` in 1, 2
//! and 3 dimensions; the heat flow multiplies it by `exp(-D0 |k|² t)`.
//! Unlike the stencil backend this is free of interpolation diffusion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::field::GridField;
use crate::special::{bessel_j0, sinc};

use super::{time_decompose, ModelParams};

fn transform(data: &mut [Complex64], ext: [usize; 3], dir: FftDirection) {
    let mut planner = FftPlanner::new();
    let strides = [ext[1] * ext[2], ext[2], 1];
    for a in 0..3 {
        let n = ext[a];
        if n < 2 {
            continue;
        }
        let fft = planner.plan_fft(n, dir);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for start in 0..data.len() {
            // visit each line once: its first element has index 0 on axis a
            if (start / strides[a]) % n != 0 {
                continue;
            }
            for i in 0..n {
                line[i] = data[start + i * strides[a]];
            }
            fft.process(&mut line);
            for i in 0..n {
                data[start + i * strides[a]] = line[i];
            }
        }
    }
}

fn wave_numbers(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let f = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            2.0 * PI * f / (n as f64 * h)
        })
        .collect()
}

/// Multiplies the periodic transform of `u` by `m(|k|)`.
fn apply_radial_multiplier(u: &GridField, m: impl Fn(f64) -> f64) -> GridField {
    let ext = u.extents3();
    let mut data: Vec<Complex64> = u.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, ext, FftDirection::Forward);
    let ks: Vec<Vec<f64>> = (0..3).map(|a| wave_numbers(ext[a], u.spacing())).collect();
    for (p, z) in data.iter_mut().enumerate() {
        let idx = u.multi_index(p);
        let mut k2 = 0.0;
        for a in 0..u.dim().get() {
            k2 += ks[a][idx[a]] * ks[a][idx[a]];
        }
        *z *= m(k2.sqrt());
    }
    transform(&mut data, ext, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    u.with_samples_unchecked(data.iter().map(|z| z.re * scale).collect())
}

fn sphere_multiplier(dim: Dim, x: f64) -> f64 {
    match dim {
        Dim::One => x.cos(),
        Dim::Two => bessel_j0(x),
        Dim::Three => sinc(x),
    }
}

/// `v(·, t)` for `u` extended periodically from its grid, using exact
/// sphere means of each Fourier mode.
pub fn evolve_spectral(u: &GridField, t: f64, p: &ModelParams) -> Result<GridField> {
    let td = time_decompose(t, p)?;
    let dim = u.dim();
    let n = td.n as i32;
    let (lambda, r) = (p.lambda(), td.radius);
    Ok(apply_radial_multiplier(u, |k| {
        sphere_multiplier(dim, k * lambda).powi(n) * sphere_multiplier(dim, k * r)
    }))
}

/// Periodic heat flow `u * G_heat(·, t)` with diffusivity `d0`.
pub fn heat_spectral(u: &GridField, t: f64, d0: f64) -> Result<GridField> {
    if !(t >= 0.0) || !(d0 > 0.0) {
        return Err(Error::domain(format!("heat flow needs t >= 0 and D0 > 0, got t={t}, D0={d0}")));
    }
    Ok(apply_radial_multiplier(u, |k| (-d0 * k * k * t).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve;
    use crate::field::integrate;

    fn bump(dim: Dim, n: usize) -> GridField {
        GridField::centered(dim, 2.0, n, |p| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 0.08).exp()).unwrap()
    }

    #[test]
    fn transform_round_trip_and_mass() {
        let u = bump(Dim::Three, 16);
        let p = ModelParams::new(1.0, 0.25).unwrap();
        let v = evolve_spectral(&u, 0.6, &p).unwrap();
        assert!(((integrate(&v) - integrate(&u)) / integrate(&u)).abs() < 1e-12);
        let w = heat_spectral(&u, 0.0, 1.0).unwrap();
        for (a, b) in w.samples().iter().zip(u.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_shift_is_exact_on_grid() {
        // cos(kR) with R a multiple of h is the average of two exact shifts.
        let u = bump(Dim::One, 256);
        let h = u.spacing();
        let p = ModelParams::new(1.0, 16.0 * h).unwrap();
        let s = evolve_spectral(&u, 1.5 * p.tau, &p).unwrap();
        let g = evolve(&u, 1.5 * p.tau, &p).unwrap();
        for (a, b) in s.samples().iter().zip(g.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_flow_of_gaussian() {
        // exp(-x²/0.08) = Gaussian with 2σ² = 0.08; after time t it widens
        // to 2σ² + 4 D0 t.
        let u = bump(Dim::Two, 65);
        let v = heat_spectral(&u, 0.05, 0.2).unwrap();
        let w2 = 0.08 + 4.0 * 0.2 * 0.05;
        let peak = 0.08 / w2;
        let mid = v.flat_index([32, 32, 0]);
        assert!((v.samples()[mid] - peak).abs() < 1e-9);
    }
}
