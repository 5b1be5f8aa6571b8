use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dim::Dim;
use crate::error::{Error, Result};

use super::{ball_box, ScalarField};

/// Uniform Cartesian grid of samples, row-major with the last active axis
/// varying fastest. Inactive axes have extent 1 and origin 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    dim: Dim,
    origin: [f64; 3],
    h: f64,
    extents: [usize; 3],
    samples: Vec<f64>,
}

impl GridField {
    pub fn new(dim: Dim, origin: &[f64], h: f64, extents: &[usize], samples: Vec<f64>) -> Result<Self> {
        let n = dim.get();
        if origin.len() != n || extents.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: origin.len().max(extents.len()),
            });
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("grid spacing must be positive, got {h}")));
        }
        if extents.iter().any(|&e| e < 2) {
            return Err(Error::domain(format!("every extent must be at least 2, got {extents:?}")));
        }
        let mut o = [0.0; 3];
        let mut e = [1usize; 3];
        o[..n].copy_from_slice(origin);
        e[..n].copy_from_slice(extents);
        if o.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        let len = e.iter().product::<usize>();
        if samples.len() != len {
            return Err(Error::domain(format!(
                "expected {len} samples for extents {extents:?}, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample {i} is not finite")));
        }
        Ok(GridField {
            dim,
            origin: o,
            h,
            extents: e,
            samples,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(dim: Dim, origin: &[f64], h: f64, extents: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&[f64; 3]) -> f64 + Sync,
    {
        let len: usize = extents.iter().product();
        let mut g = GridField::new(dim, origin, h, extents, vec![0.0; len.max(1)])?;
        let samples: Vec<f64> = (0..g.samples.len()).into_par_iter().map(|i| f(&g.point(i))).collect();
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample {i} is not finite")));
        }
        g.samples = samples;
        Ok(g)
    }

    /// Cube grid centred on the origin: `n` points per axis spanning
    /// `[-half_width, half_width]`.
    pub fn centered<F>(dim: Dim, half_width: f64, n: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64; 3]) -> f64 + Sync,
    {
        if n < 2 {
            return Err(Error::domain("need at least 2 points per axis"));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        let d = dim.get();
        GridField::from_fn(dim, &vec![-half_width; d], h, &vec![n; d], f)
    }

    /// Same geometry, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        GridField::new(
            self.dim,
            &self.origin[..self.dim.get()],
            self.h,
            self.extents(),
            samples,
        )
    }

    pub(crate) fn with_samples_unchecked(&self, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        GridField {
            samples,
            ..self.clone_geometry()
        }
    }

    fn clone_geometry(&self) -> Self {
        GridField {
            dim: self.dim,
            origin: self.origin,
            h: self.h,
            extents: self.extents,
            samples: Vec::new(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim.get()]
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dim.get()]
    }

    pub(crate) fn extents3(&self) -> [usize; 3] {
        self.extents
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let [_, n1, n2] = self.extents;
        [flat / (n1 * n2), (flat / n2) % n1, flat % n2]
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let [_, n1, n2] = self.extents;
        (idx[0] * n1 + idx[1]) * n2 + idx[2]
    }

    /// Coordinates of sample `flat`, padded to three components.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 3];
        for a in 0..self.dim.get() {
            p[a] = self.origin[a] + idx[a] as f64 * self.h;
        }
        p
    }

    /// Largest coordinate on each active axis.
    pub fn upper(&self) -> [f64; 3] {
        let mut u = [0.0; 3];
        for a in 0..self.dim.get() {
            u[a] = self.origin[a] + (self.extents[a] - 1) as f64 * self.h;
        }
        u
    }

    pub fn bounds(&self) -> Vec<[f64; 2]> {
        let u = self.upper();
        (0..self.dim.get()).map(|a| [self.origin[a], u[a]]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Bounding box of the samples with `|u| > rel_eps * max|u|`, or `None`
    /// for the zero field.
    pub fn support_box(&self, rel_eps: f64) -> Option<Vec<[f64; 2]>> {
        let thr = rel_eps * self.max_abs();
        if self.max_abs() == 0.0 {
            return None;
        }
        let d = self.dim.get();
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for (i, v) in self.samples.iter().enumerate() {
            if v.abs() > thr {
                let idx = self.multi_index(i);
                for a in 0..d {
                    lo[a] = lo[a].min(idx[a]);
                    hi[a] = hi[a].max(idx[a]);
                }
            }
        }
        Some(
            (0..d)
                .map(|a| {
                    [
                        self.origin[a] + lo[a] as f64 * self.h,
                        self.origin[a] + hi[a] as f64 * self.h,
                    ]
                })
                .collect(),
        )
    }

    /// Multilinear interpolation; `None` outside the grid box.
    pub fn interpolate(&self, x: &[f64; 3]) -> Option<f64> {
        let d = self.dim.get();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..d {
            let n = self.extents[a];
            let pos = (x[a] - self.origin[a]) / self.h;
            let slack = 1e-9 * (n as f64);
            if !(pos >= -slack && pos <= (n - 1) as f64 + slack) {
                return None;
            }
            let pos = pos.clamp(0.0, (n - 1) as f64);
            let i = (pos.floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = pos - i as f64;
        }
        Some(self.corner_sum(d, base, frac))
    }

    fn corner_sum(&self, d: usize, base: [usize; 3], frac: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = base;
            for a in 0..d {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    idx[a] += 1;
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * self.samples[self.flat_index(idx)];
            }
        }
        acc
    }

    /// Grid-aligned translation by `shift` cells, filling with zeros.
    pub fn shifted(&self, shift: &[isize]) -> Result<Self> {
        let d = self.dim.get();
        if shift.len() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: shift.len(),
            });
        }
        let mut out = vec![0.0; self.samples.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let idx = self.multi_index(i);
            let mut src = [0usize; 3];
            let mut inside = true;
            for a in 0..d {
                let s = idx[a] as isize - shift[a];
                if s < 0 || s >= self.extents[a] as isize {
                    inside = false;
                    break;
                }
                src[a] = s as usize;
            }
            if inside {
                *slot = self.samples[self.flat_index(src)];
            }
        }
        Ok(self.with_samples_unchecked(out))
    }

    pub(crate) fn same_geometry(&self, other: &GridField) -> bool {
        self.dim == other.dim
            && self.origin == other.origin
            && self.h == other.h
            && self.extents == other.extents
    }
}

impl ScalarField for GridField {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn value(&self, x: &[f64; 3]) -> f64 {
        let d = self.dim.get();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..d {
            let n = self.extents[a];
            let pos = ((x[a] - self.origin[a]) / self.h).clamp(0.0, (n - 1) as f64);
            let i = (pos.floor() as usize).min(n - 2);
            base[a] = i;
            frac[a] = pos - i as f64;
        }
        self.corner_sum(d, base, frac)
    }

    fn check_ball(&self, center: &[f64; 3], radius: f64) -> Result<()> {
        let u = self.upper();
        let slack = 1e-9 * self.h;
        for a in 0..self.dim.get() {
            if center[a] - radius < self.origin[a] - slack || center[a] + radius > u[a] + slack {
                return Err(Error::OutOfDomain {
                    detail: format!(
                        "sphere of radius {radius} around {:?} leaves the grid {:?}",
                        &center[..self.dim.get()],
                        self.bounds()
                    ),
                    required: ball_box(self.dim, center, radius),
                });
            }
        }
        Ok(())
    }
}
