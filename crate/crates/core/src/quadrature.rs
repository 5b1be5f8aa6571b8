//! One-dimensional Gauss-Legendre rules and a small integrator for
//! piecewise-smooth integrands with square-root endpoint behaviour.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 6-point rule used by the radial integrators.
pub(crate) fn gauss6() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(6))
}

/// Integrates `f` over `[a, b]` where `f` may behave like `sqrt(s - a)`
/// near `a` (when `sing_lo`) and like `sqrt(b - s)` near `b` (when
/// `sing_hi`). Singular ends are mapped through `s = end ± u²`, which makes
/// the transformed integrand smooth.
pub(crate) fn integrate_sqrt_ends<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    sing_lo: bool,
    sing_hi: bool,
    mut f: F,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    match (sing_lo, sing_hi) {
        (false, false) => rule.integrate(a, b, f),
        (true, false) => {
            let umax = (b - a).sqrt();
            rule.integrate(0.0, umax, |u| 2.0 * u * f(a + u * u))
        }
        (false, true) => {
            let umax = (b - a).sqrt();
            rule.integrate(0.0, umax, |u| 2.0 * u * f(b - u * u))
        }
        (true, true) => {
            let mid = 0.5 * (a + b);
            let umax = (mid - a).sqrt();
            let left = rule.integrate(0.0, umax, |u| 2.0 * u * f(a + u * u));
            let right = rule.integrate(0.0, umax, |u| 2.0 * u * f(b - u * u));
            left + right
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        for n in 1..12 {
            let rule = GaussLegendre::new(n);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n} sum={sum}");
            for p in 0..(2 * n) {
                let exact = (3f64.powi(p as i32 + 1) - 1.0) / (p as f64 + 1.0);
                let got = rule.integrate(1.0, 3.0, |x| x.powi(p as i32));
                assert!((got - exact).abs() < 1e-11 * exact.max(1.0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn sqrt_substitution_handles_endpoint_singular_derivative() {
        let rule = gauss6();
        // ∫_0^1 sqrt(s) ds = 2/3
        let got = integrate_sqrt_ends(rule, 0.0, 1.0, true, false, f64::sqrt);
        assert!((got - 2.0 / 3.0).abs() < 1e-14);
        // ∫_0^1 sqrt(s (1 - s)) ds = π/8
        let got = integrate_sqrt_ends(rule, 0.0, 1.0, true, true, |s| (s * (1.0 - s)).sqrt());
        assert!((got - PI / 8.0).abs() < 1e-6, "{got}");
        let fine = GaussLegendre::new(20);
        let got = integrate_sqrt_ends(&fine, 0.0, 1.0, true, true, |s| (s * (1.0 - s)).sqrt());
        assert!((got - PI / 8.0).abs() < 1e-12, "{got}");
    }
}
