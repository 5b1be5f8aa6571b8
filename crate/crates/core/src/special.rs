//! Special functions needed for the radial Fourier multipliers.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

fn j0_nodes(mag: f64) -> usize {
    (mag.ceil() as usize + 48).next_power_of_two()
}

/// Bessel `J0` from `(1/π) ∫_0^π cos(x sin θ) dθ`. The integrand is
/// `π`-periodic and entire, so the trapezoid rule converges geometrically
/// once the node count exceeds `|x|`.
pub fn bessel_j0(x: f64) -> f64 {
    let m = j0_nodes(x.abs());
    let mut acc = 0.0;
    for i in 0..m {
        let th = PI * i as f64 / m as f64;
        acc += (x * th.sin()).cos();
    }
    acc / m as f64
}

/// `log |J0(z)|` without forming `e^{|Im z|}`.
pub fn log_abs_j0(z: Complex64) -> f64 {
    let ay = z.im.abs();
    let m = j0_nodes(z.norm());
    let mut acc = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    for k in 0..m {
        let s = (PI * k as f64 / m as f64).sin();
        let a = (i * z * s - ay).exp();
        let b = (-i * z * s - ay).exp();
        acc += 0.5 * (a + b);
    }
    ay + (acc.norm() / m as f64).ln()
}

/// `log |cos z|`.
pub fn log_abs_cos(z: Complex64) -> f64 {
    // |cos z|^2 = cos^2 x + sinh^2 y
    let ay = z.im.abs();
    let e = (-2.0 * ay).exp();
    let c = z.re.cos();
    let sh = 0.5 * (1.0 - e);
    ay + 0.5 * (c * c * e + sh * sh).ln()
}

/// `log |sin z / z|`.
pub fn log_abs_sinc(z: Complex64) -> f64 {
    let r = z.norm();
    if r < 1e-4 {
        return (Complex64::new(1.0, 0.0) - z * z / 6.0).norm().ln();
    }
    // |sin z|^2 = sin^2 x + sinh^2 y
    let ay = z.im.abs();
    let e = (-2.0 * ay).exp();
    let s = z.re.sin();
    let sh = 0.5 * (1.0 - e);
    ay + 0.5 * (s * s * e + sh * sh).ln() - r.ln()
}
