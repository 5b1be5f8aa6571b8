//! Density x density convolution through one-dimensional marginals.
//!
//! The first Cartesian coordinate of a sum of independent rotationally
//! symmetric vectors is the sum of the coordinates, so the marginal law of
//! the product is the 1D convolution of the marginals. The radial CDF is
//! then recovered from the marginal by an Abel-type inversion.

use crate::dim::Dim;
use crate::quadrature::gauss6;

use super::kernel::coordinate_cdf;
use super::PreparedSegment;

pub(crate) struct ProjectionPart {
    dim: Dim,
    mass: f64,
    lo: f64,
    hi: f64,
    h: f64,
    /// Marginal CDF at nodes `z_k = k h`, `k >= 0`.
    q: Vec<f64>,
    /// Marginal density at the same nodes.
    p: Vec<f64>,
}

impl ProjectionPart {
    pub fn new(dim: Dim, a: &PreparedSegment, b: &PreparedSegment, cells: usize) -> Self {
        let cells = cells.max(16);
        let h = (a.r_hi + b.r_hi) / cells as f64;
        let na = (a.r_hi / h).ceil() as usize;
        let nb = (b.r_hi / h).ceil() as usize;
        let ma = marginal_cell_masses(dim, a, h, na);
        let mb = marginal_cell_masses(dim, b, h, nb);

        let mut c = vec![0.0; ma.len() + mb.len() - 1];
        for (i, x) in ma.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            for (j, y) in mb.iter().enumerate() {
                c[i + j] += x * y;
            }
        }

        // Nodes Z_k = (k - na - nb) h; the sum of the uniform laws on cells
        // i and j is a triangle centred on node i + j + 1.
        let n_nodes = 2 * (na + nb) + 1;
        let mut q_all = vec![0.0; n_nodes];
        let mut acc = 0.0;
        for k in 1..n_nodes {
            let half = c.get(k - 1).copied().unwrap_or(0.0);
            let full = if k >= 2 { c.get(k - 2).copied().unwrap_or(0.0) } else { 0.0 };
            acc += full;
            q_all[k] = acc + 0.5 * half;
        }
        let mass = a.mass() * b.mass();
        let centre = na + nb;
        let q: Vec<f64> = q_all[centre..].to_vec();
        let mut p = vec![0.0; q.len()];
        for k in 0..q.len() {
            let up = q_all.get(centre + k + 1).copied().unwrap_or(mass);
            let down = q_all[centre + k - 1];
            p[k] = ((up - down) / (2.0 * h)).max(0.0);
        }
        if let Some(last) = p.last_mut() {
            *last = 0.0;
        }

        let lo = (a.r_lo - b.r_hi).max(b.r_lo - a.r_hi).max(0.0);
        ProjectionPart {
            dim,
            mass,
            lo,
            hi: a.r_hi + b.r_hi,
            h,
            q,
            p,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn interp(&self, values: &[f64], z: f64) -> f64 {
        let x = z / self.h;
        let i = x.floor() as usize;
        if i + 1 >= values.len() {
            return *values.last().unwrap();
        }
        let f = x - i as f64;
        values[i] * (1.0 - f) + values[i + 1] * f
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= self.lo {
            return 0.0;
        }
        if r >= self.hi {
            return self.mass;
        }
        let m = self.mass;
        let f = match self.dim {
            Dim::One => 2.0 * self.interp(&self.q, r) - m,
            Dim::Three => {
                2.0 * self.interp(&self.q, r) - m - 2.0 * r * self.interp(&self.p, r)
            }
            Dim::Two => m - 2.0 * self.abel_tail(r),
        };
        f.clamp(0.0, m)
    }

    /// `∫_R^∞ p(z) z / sqrt(z² - R²) dz` for the piecewise-linear `p`.
    fn abel_tail(&self, r: f64) -> f64 {
        let h = self.h;
        let r2 = r * r;
        let s = |z: f64| (z * z - r2).max(0.0).sqrt();
        let start = (r / h).floor() as usize;
        let mut acc = 0.0;
        for k in start..self.p.len() - 1 {
            let z0 = k as f64 * h;
            let z1 = z0 + h;
            let a = z0.max(r);
            if z1 <= a {
                continue;
            }
            let (p0, p1) = (self.p[k], self.p[k + 1]);
            if p0 == 0.0 && p1 == 0.0 {
                continue;
            }
            let beta = (p1 - p0) / h;
            let alpha = p0 - beta * z0;
            let (sa, sb) = (s(a), s(z1));
            let first = sb - sa;
            let second = 0.5 * (z1 * sb - a * sa) + 0.5 * r2 * ((z1 + sb) / (a + sa)).ln();
            acc += alpha * first + beta * second;
        }
        acc
    }
}

/// Masses of the first-coordinate marginal on cells `[z_j, z_{j+1}]`,
/// `z_j = (j - n) h`, `j = 0..2n`.
fn marginal_cell_masses(dim: Dim, seg: &PreparedSegment, h: f64, n: usize) -> Vec<f64> {
    let total = seg.mass();
    let half: Vec<f64> = (0..=n).map(|k| marginal_cdf(dim, seg, k as f64 * h)).collect();
    // Q(-z) = M - Q(z) for a measure without mass at the origin.
    let mut q = Vec::with_capacity(2 * n + 1);
    for k in (1..=n).rev() {
        q.push(total - half[k]);
    }
    q.extend_from_slice(&half);
    q.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
}

/// `P(X_1 <= z)` for `z >= 0`.
fn marginal_cdf(dim: Dim, seg: &PreparedSegment, z: f64) -> f64 {
    let total = seg.mass();
    if z <= 0.0 {
        return 0.5 * total;
    }
    let inner = seg.cdf(z);
    let outer = match dim {
        Dim::One => 0.5 * (total - inner),
        Dim::Two => seg.integrate_against(gauss6(), z, seg.r_hi, Some(z), None, |r| {
            coordinate_cdf(dim, z / r)
        }),
        Dim::Three => seg.integrate_against(gauss6(), z, seg.r_hi, None, None, |r| {
            0.5 * (1.0 + z / r)
        }),
    };
    inner + outer
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{PreparedSegment, Segment, ShellKernel};

    fn pair_segment(dim: Dim, r1: f64, r2: f64, n: usize) -> PreparedSegment {
        let k = ShellKernel::new(dim, r1, r2).unwrap();
        let (lo, hi) = k.support();
        // cell-averaged samples of the exact law
        let h = (hi - lo) / (n - 1) as f64;
        let samples = (0..n)
            .map(|i| {
                let a = (lo + (i as f64 - 0.5) * h).max(lo);
                let b = (lo + (i as f64 + 0.5) * h).min(hi);
                (k.cdf(b) - k.cdf(a)) / (b - a)
            })
            .collect();
        PreparedSegment::new(&Segment::new(lo, hi, samples).unwrap())
    }

    #[test]
    fn marginal_of_3d_law_is_consistent() {
        // r/2 on [0, 2] has marginal density (2 - |z|) / 4.
        let seg = pair_segment(Dim::Three, 1.0, 1.0, 257);
        for &z in &[0.25, 0.5, 1.0, 1.5] {
            let want = 0.5 + (2.0 * z - 0.5 * z * z) / 4.0;
            assert!((marginal_cdf(Dim::Three, &seg, z) - want).abs() < 1e-5);
        }
    }

    #[test]
    fn product_mass_and_bounds() {
        for dim in Dim::ALL {
            let a = pair_segment(dim, 1.0, 0.6, 129);
            let b = pair_segment(dim, 0.8, 0.8, 129);
            let part = ProjectionPart::new(dim, &a, &b, 2048);
            let m = a.mass() * b.mass();
            assert!((part.mass() - m).abs() < 1e-15);
            assert_eq!(part.cdf(part.bounds().1), m);
            let mut prev = 0.0;
            for i in 0..=50 {
                let r = 3.2 * i as f64 / 50.0;
                let f = part.cdf(r);
                assert!(f + 1e-9 >= prev, "{dim:?}: cdf not monotone at {r}");
                prev = f;
            }
        }
    }
}
