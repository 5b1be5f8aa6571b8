//! Rotationally symmetric measures on `R^N` stored as atoms (delta
//! shells) plus piecewise-linear radial densities, and their convolution.

mod convolve;
mod kernel;
mod projection;

use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub use convolve::{convolve_radial, convolve_radial_with, ConvolveOptions};
pub use kernel::{shell_pair_density, ShellKernel, ShellPair};

/// Relative support threshold: density samples below `SUPPORT_EPS` times
/// the peak density count as zero.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Default relative merge tolerance for atom radii.
pub const MERGE_REL_TOL: f64 = 1e-9;

/// A delta shell: mass `mass` spread uniformly over the sphere of radius
/// `radius`. Serialized as `[r, m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Atom {
    pub radius: f64,
    pub mass: f64,
}

impl Atom {
    pub const fn new(radius: f64, mass: f64) -> Self {
        Atom { radius, mass }
    }
}

impl From<[f64; 2]> for Atom {
    fn from([radius, mass]: [f64; 2]) -> Self {
        Atom { radius, mass }
    }
}

impl From<Atom> for [f64; 2] {
    fn from(a: Atom) -> Self {
        [a.radius, a.mass]
    }
}

/// Radial mass density `dμ/dr` sampled on a uniform grid over
/// `[r_lo, r_hi]`, linear between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r_lo: f64,
    pub r_hi: f64,
    pub samples: Vec<f64>,
}

impl Segment {
    pub fn new(r_lo: f64, r_hi: f64, samples: Vec<f64>) -> Result<Self> {
        let seg = Segment {
            r_lo,
            r_hi,
            samples,
        };
        seg.validate()?;
        Ok(seg)
    }

    /// Samples `f` at the uniform nodes of `[r_lo, r_hi]`.
    pub fn from_fn(r_lo: f64, r_hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("a segment needs at least two samples"));
        }
        let h = (r_hi - r_lo) / (n - 1) as f64;
        let samples = (0..n).map(|i| f(r_lo + h * i as f64)).collect();
        Segment::new(r_lo, r_hi, samples)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_lo >= 0.0 && self.r_lo < self.r_hi && self.r_hi.is_finite()) {
            return Err(Error::domain(format!(
                "segment bounds must satisfy 0 <= r_lo < r_hi, got [{}, {}]",
                self.r_lo, self.r_hi
            )));
        }
        if self.samples.len() < 2 {
            return Err(Error::domain("a segment needs at least two samples"));
        }
        if let Some(bad) = self.samples.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::domain(format!(
                "density samples must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.r_hi - self.r_lo) / (self.samples.len() - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.samples.len() {
            self.r_hi
        } else {
            self.r_lo + self.spacing() * i as f64
        }
    }

    /// Linear interpolation of the samples; zero outside the segment.
    pub fn density(&self, r: f64) -> f64 {
        if r < self.r_lo || r > self.r_hi {
            return 0.0;
        }
        let h = self.spacing();
        let x = (r - self.r_lo) / h;
        let i = (x.floor() as usize).min(self.samples.len() - 2);
        let f = x - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }

    /// Trapezoid mass, which equals the integral of the interpolant.
    pub fn mass(&self) -> f64 {
        let h = self.spacing();
        let n = self.samples.len();
        let inner: f64 = self.samples[1..n - 1].iter().sum();
        h * (inner + 0.5 * (self.samples[0] + self.samples[n - 1]))
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().cloned().fold(0.0, f64::max)
    }
}

/// End-sample to neighbour ratio above which a segment end is treated
/// as an inverse-square-root singularity. Such an end gives about 2.7,
/// a smooth density about 1.
const SQRT_END_RATIO: f64 = 2.0;

/// Dual cells next to such an end that use square-root interpolation.
const SQRT_END_CELLS: f64 = 8.0;

/// Segment with cumulative cell masses for repeated CDF evaluation.
#[derive(Debug, Clone)]
pub(crate) struct PreparedSegment {
    pub r_lo: f64,
    pub r_hi: f64,
    pub h: f64,
    pub samples: Vec<f64>,
    /// `prefix[i]` = mass on `[r_lo, node(i)]`.
    pub prefix: Vec<f64>,
}

impl PreparedSegment {
    pub fn new(seg: &Segment) -> Self {
        let h = seg.spacing();
        let mut prefix = Vec::with_capacity(seg.samples.len());
        let mut acc = 0.0;
        prefix.push(0.0);
        for w in seg.samples.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            prefix.push(acc);
        }
        PreparedSegment {
            r_lo: seg.r_lo,
            r_hi: seg.r_hi,
            h,
            samples: seg.samples.clone(),
            prefix,
        }
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.samples.len() - 1
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells() {
            self.r_hi
        } else {
            self.r_lo + self.h * i as f64
        }
    }

    #[inline]
    fn locate(&self, r: f64) -> (usize, f64) {
        let x = (r - self.r_lo) / self.h;
        let i = (x.floor().max(0.0) as usize).min(self.cells() - 1);
        (i, r - self.node(i))
    }

    /// Mass on `[r_lo, min(r, r_hi)]`.
    #[inline]
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= self.r_lo {
            return 0.0;
        }
        if r >= self.r_hi {
            return self.mass();
        }
        let (i, d) = self.locate(r);
        let slope = (self.samples[i + 1] - self.samples[i]) / self.h;
        self.prefix[i] + d * (self.samples[i] + 0.5 * slope * d)
    }

    /// CDF that is exact at the dual-cell boundaries `node(i) ± h/2`, where
    /// resampled segments take their cell averages, and interpolated in
    /// between. Near an end whose sample exceeds its neighbour by more
    /// than [`SQRT_END_RATIO`] (an inverse-square-root endpoint) the
    /// interpolation is linear in the square root of the distance to that
    /// end; elsewhere it is linear in `r`.
    pub fn dual_cdf(&self, r: f64) -> f64 {
        if r <= self.r_lo {
            return 0.0;
        }
        let total = self.mass();
        if r >= self.r_hi {
            return total;
        }
        let n = self.cells();
        let h = self.h;
        let s = &self.samples;
        // dual cell j spans [node(j) - h/2, node(j) + h/2] clipped to the segment
        let j = ((((r - self.r_lo) / h) + 0.5).floor() as usize).min(n);
        let a = if j == 0 { self.r_lo } else { self.r_lo + (j as f64 - 0.5) * h };
        let b = if j == n { self.r_hi } else { self.r_lo + (j as f64 + 0.5) * h };
        let fa = if j == 0 { 0.0 } else { self.prefix[j] - 0.5 * h * s[j] };
        let fb = fa + s[j] * (b - a);
        let near = SQRT_END_CELLS * h;
        let w = if s[0] > SQRT_END_RATIO * s[1] && a - self.r_lo < near {
            let (ra, rb) = ((a - self.r_lo).sqrt(), (b - self.r_lo).sqrt());
            ((r - self.r_lo).sqrt() - ra) / (rb - ra)
        } else if s[n] > SQRT_END_RATIO * s[n - 1] && self.r_hi - b < near {
            let (ra, rb) = ((self.r_hi - a).sqrt(), (self.r_hi - b).sqrt());
            (ra - (self.r_hi - r).sqrt()) / (ra - rb)
        } else {
            (r - a) / (b - a)
        };
        fa + w.clamp(0.0, 1.0) * (fb - fa)
    }

    /// `∫ g(s) ρ(s) ds` over `[a, b] ∩ [r_lo, r_hi]`, split at the density
    /// nodes. `g` may have square-root behaviour at `sing_lo` / `sing_hi`.
    pub fn integrate_against<F: FnMut(f64) -> f64>(
        &self,
        rule: &GaussLegendre,
        a: f64,
        b: f64,
        sing_lo: Option<f64>,
        sing_hi: Option<f64>,
        mut g: F,
    ) -> f64 {
        let a = a.max(self.r_lo);
        let b = b.min(self.r_hi);
        if b <= a {
            return 0.0;
        }
        let (i0, _) = self.locate(a);
        let (mut i1, _) = self.locate(b);
        if i1 > i0 && self.node(i1) >= b {
            i1 -= 1;
        }
        let mut acc = 0.0;
        for i in i0..=i1 {
            let lo = self.node(i).max(a);
            let hi = self.node(i + 1).min(b);
            if hi <= lo {
                continue;
            }
            let s0 = self.samples[i];
            let slope = (self.samples[i + 1] - s0) / self.h;
            let x0 = self.node(i);
            let at_lo = sing_lo.is_some_and(|p| (lo - p).abs() <= 1e-12 * (1.0 + p.abs()));
            let at_hi = sing_hi.is_some_and(|p| (hi - p).abs() <= 1e-12 * (1.0 + p.abs()));
            acc += crate::quadrature::integrate_sqrt_ends(rule, lo, hi, at_lo, at_hi, |s| {
                g(s) * (s0 + slope * (s - x0))
            });
        }
        acc
    }
}

/// Rotationally symmetric measure on `R^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMeasure {
    dim: Dim,
    atoms: Vec<Atom>,
    segments: Vec<Segment>,
}

impl RadialMeasure {
    /// Validates, sorts and merges atoms closer than the default relative
    /// tolerance.
    pub fn new(dim: Dim, atoms: Vec<Atom>, segments: Vec<Segment>) -> Result<Self> {
        let scale = atoms
            .iter()
            .map(|a| a.radius)
            .chain(segments.iter().map(|s| s.r_hi))
            .fold(0.0, f64::max);
        Self::with_merge_tol(dim, atoms, segments, MERGE_REL_TOL * scale)
    }

    pub fn with_merge_tol(
        dim: Dim,
        mut atoms: Vec<Atom>,
        mut segments: Vec<Segment>,
        merge_tol: f64,
    ) -> Result<Self> {
        for a in &atoms {
            if !(a.radius >= 0.0 && a.radius.is_finite() && a.mass >= 0.0 && a.mass.is_finite()) {
                return Err(Error::domain(format!(
                    "atoms need a finite radius >= 0 and mass >= 0, got ({}, {})",
                    a.radius, a.mass
                )));
            }
        }
        for s in &segments {
            s.validate()?;
        }
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if a.radius - last.radius <= merge_tol => {
                    let m = last.mass + a.mass;
                    last.radius = (last.radius * last.mass + a.radius * a.mass) / m;
                    last.mass = m;
                }
                _ => merged.push(a),
            }
        }
        segments.sort_by(|a, b| a.r_lo.total_cmp(&b.r_lo));
        for w in segments.windows(2) {
            if w[1].r_lo < w[0].r_hi {
                return Err(Error::domain("density segments overlap"));
            }
        }
        Ok(RadialMeasure {
            dim,
            atoms: merged,
            segments,
        })
    }

    /// Single delta shell.
    pub fn atom(dim: Dim, radius: f64, mass: f64) -> Result<Self> {
        Self::new(dim, vec![Atom::new(radius, mass)], Vec::new())
    }

    /// Point mass at the origin (the identity for convolution).
    pub fn delta(dim: Dim) -> Self {
        RadialMeasure {
            dim,
            atoms: vec![Atom::new(0.0, 1.0)],
            segments: Vec::new(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_atomic(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RadialMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.radius, a.mass * factor))
                .collect(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    r_lo: s.r_lo,
                    r_hi: s.r_hi,
                    samples: s.samples.iter().map(|x| x * factor).collect(),
                })
                .collect(),
        }
    }

    /// Atom masses plus trapezoid masses of the segments.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.segments.iter().map(Segment::mass).sum::<f64>()
    }

    /// Largest radius carrying any mass, ignoring thresholds.
    pub fn outer_radius(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.radius)
            .chain(self.segments.iter().map(|s| s.r_hi))
            .fold(0.0, f64::max)
    }

    pub fn peak_density(&self) -> f64 {
        self.segments.iter().map(Segment::peak).fold(0.0, f64::max)
    }

    /// `μ(B_r)`: mass within radius `r` (atoms at radius exactly `r` count).
    pub fn cdf(&self, r: f64) -> f64 {
        self.cdf_evaluator().cdf(r)
    }

    pub fn cdf_evaluator(&self) -> RadialCdf {
        RadialCdf::new(self)
    }

    /// `(r_min, r_max)` over atoms and density samples above
    /// `SUPPORT_EPS` times the peak density.
    pub fn support(&self) -> Result<(f64, f64)> {
        self.support_with(SUPPORT_EPS)
    }

    pub fn support_with(&self, rel_eps: f64) -> Result<(f64, f64)> {
        if !(self.mass() > 0.0) {
            return Err(Error::domain("support of a zero measure is undefined"));
        }
        let threshold = rel_eps * self.peak_density();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.radius);
            hi = hi.max(a.radius);
        }
        for s in &self.segments {
            for (i, &v) in s.samples.iter().enumerate() {
                if v > threshold {
                    let r = s.node(i);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        if lo > hi {
            return Err(Error::domain("support of a zero measure is undefined"));
        }
        Ok((lo, hi))
    }

    /// `∫ |F_a(r) - F_b(r)| dr` between the radial CDFs, i.e. the
    /// Wasserstein-1 distance of the radial laws. Units of length.
    pub fn cdf_distance(&self, other: &RadialMeasure) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim.get(),
                right: other.dim.get(),
            });
        }
        let mut breaks: Vec<f64> = vec![0.0];
        for m in [self, other] {
            breaks.extend(m.atoms.iter().map(|a| a.radius));
            for s in &m.segments {
                breaks.extend((0..s.samples.len()).map(|i| s.node(i)));
                breaks.extend((1..s.samples.len()).map(|i| s.r_lo + (i as f64 - 0.5) * s.spacing()));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let fa = self.cdf_evaluator();
        let fb = other.cdf_evaluator();
        let rule = crate::quadrature::gauss6();
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            // Both CDFs are smooth on (a, b); evaluate strictly inside.
            total += rule.integrate(a, b, |r| (fa.cdf(r) - fb.cdf(r)).abs());
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RadialMeasure = serde_json::from_str(text)?;
        RadialMeasure::new(raw.dim, raw.atoms, raw.segments)
    }

    /// Rows `(r, density, atom_mass)` sorted by radius.
    pub fn csv_rows(&self) -> Vec<(f64, f64, f64)> {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for s in &self.segments {
            for (i, &v) in s.samples.iter().enumerate() {
                rows.push((s.node(i), v, 0.0));
            }
        }
        for a in &self.atoms {
            rows.push((a.radius, 0.0, a.mass));
        }
        rows.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.total_cmp(&y.2)));
        rows
    }
}

/// Fast CDF evaluation of a [`RadialMeasure`].
#[derive(Debug, Clone)]
pub struct RadialCdf {
    atom_radii: Vec<f64>,
    atom_prefix: Vec<f64>,
    segments: Vec<PreparedSegment>,
}

impl RadialCdf {
    fn new(m: &RadialMeasure) -> Self {
        let mut acc = 0.0;
        let atom_prefix = m
            .atoms
            .iter()
            .map(|a| {
                acc += a.mass;
                acc
            })
            .collect();
        RadialCdf {
            atom_radii: m.atoms.iter().map(|a| a.radius).collect(),
            atom_prefix,
            segments: m.segments.iter().map(PreparedSegment::new).collect(),
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        let k = self.atom_radii.partition_point(|&x| x <= r);
        let mut acc = if k == 0 { 0.0 } else { self.atom_prefix[k - 1] };
        for s in &self.segments {
            acc += s.dual_cdf(r);
        }
        acc
    }

    pub fn total(&self) -> f64 {
        self.atom_prefix.last().copied().unwrap_or(0.0)
            + self.segments.iter().map(PreparedSegment::mass).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_bookkeeping() {
        let m = RadialMeasure::atom(Dim::Three, 0.5, 1.0).unwrap();
        assert_eq!(m.mass(), 1.0);
        let m = RadialMeasure::new(
            Dim::One,
            vec![Atom::new(0.0, 0.5), Atom::new(2.0, 0.5)],
            vec![],
        )
        .unwrap();
        assert_eq!(m.mass(), 1.0);
        // density r / 2 on [0, 2] integrates exactly under the trapezoid rule
        let seg = Segment::from_fn(0.0, 2.0, 33, |r| 0.5 * r).unwrap();
        let m = RadialMeasure::new(Dim::Three, vec![], vec![seg]).unwrap();
        assert!((m.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn atoms_are_sorted_and_merged() {
        let m = RadialMeasure::new(
            Dim::Two,
            vec![
                Atom::new(2.0, 0.25),
                Atom::new(1.0, 0.25),
                Atom::new(1.0 + 1e-12, 0.5),
                Atom::new(3.0, 0.0),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert!((m.atoms()[0].mass - 0.75).abs() < 1e-15);
        assert_eq!(m.atoms()[1].radius, 2.0);
    }

    #[test]
    fn rejects_invalid_parts() {
        assert!(RadialMeasure::atom(Dim::One, -1.0, 1.0).is_err());
        assert!(Segment::new(1.0, 1.0, vec![1.0, 1.0]).is_err());
        assert!(Segment::new(0.0, 1.0, vec![1.0, -1.0]).is_err());
        let a = Segment::new(0.0, 1.0, vec![1.0, 1.0]).unwrap();
        let b = Segment::new(0.5, 2.0, vec![1.0, 1.0]).unwrap();
        assert!(RadialMeasure::new(Dim::Two, vec![], vec![a, b]).is_err());
    }

    #[test]
    fn support_of_atoms_and_zero_measure() {
        let m = RadialMeasure::atom(Dim::Three, 0.7, 1.0).unwrap();
        assert_eq!(m.support().unwrap(), (0.7, 0.7));
        let z = RadialMeasure::new(Dim::Three, vec![], vec![]).unwrap();
        assert!(z.support().is_err());
    }

    #[test]
    fn prepared_segment_cdf_matches_trapezoid() {
        let seg = Segment::from_fn(0.5, 1.5, 11, |r| r * r).unwrap();
        let p = PreparedSegment::new(&seg);
        assert!((p.cdf(1.5) - seg.mass()).abs() < 1e-15);
        // within a cell the CDF is the integral of the linear interpolant
        let r = 0.53;
        let h = 0.1;
        let s0 = 0.25;
        let s1 = 0.36;
        let d = r - 0.5;
        let want = d * (s0 + 0.5 * (s1 - s0) / h * d);
        assert!((p.cdf(r) - want).abs() < 1e-15);
    }

    #[test]
    fn measure_cdf_follows_inverse_sqrt_ends() {
        // 2D shell pair: density ~ (r_hi - r)^(-1/2) at both ends
        let k = ShellKernel::new(Dim::Two, 1.0, 0.5).unwrap();
        let g = crate::convolve_radial(
            &RadialMeasure::atom(Dim::Two, 1.0, 1.0).unwrap(),
            &RadialMeasure::atom(Dim::Two, 0.5, 1.0).unwrap(),
        )
        .unwrap();
        let c = g.cdf_evaluator();
        let worst = (0..=20000)
            .map(|i| 0.5 + i as f64 / 20000.0)
            .map(|r| (c.cdf(r) - k.cdf(r)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn dual_cdf_is_exact_at_dual_boundaries() {
        let seg = Segment::from_fn(0.0, 1.0, 11, |r| 1.0 + r).unwrap();
        let p = PreparedSegment::new(&seg);
        let h = 0.1;
        let mut acc = 0.5 * h * seg.samples[0];
        for i in 1..10 {
            assert!((p.dual_cdf((i as f64 + 0.5) * h) - (acc + h * seg.samples[i])).abs() < 1e-14);
            acc += h * seg.samples[i];
        }
        assert!((p.dual_cdf(1.0) - p.mass()).abs() < 1e-14);
    }

    #[test]
    fn cdf_distance_between_atoms_is_exact() {
        let a = RadialMeasure::atom(Dim::One, 1.0, 1.0).unwrap();
        let b = RadialMeasure::atom(Dim::One, 1.5, 1.0).unwrap();
        assert!((a.cdf_distance(&b).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(a.cdf_distance(&a).unwrap(), 0.0);
    }

    #[test]
    fn json_layout() {
        let seg = Segment::new(0.0, 1.0, vec![0.0, 2.0]).unwrap();
        let m = RadialMeasure::new(Dim::Two, vec![Atom::new(0.5, 0.5)], vec![seg]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["atoms"][0][0], 0.5);
        assert_eq!(v["segments"][0]["r_hi"], 1.0);
        assert_eq!(RadialMeasure::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}
