use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridField;

use super::stencil::{evolve_with, EvolveOptions};
use super::ModelParams;

/// Tabulated speed density `f(c)` on `(0, c*]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedDistribution {
    nodes: Vec<(f64, f64)>,
    c_star: f64,
}

/// Allowed deviation of `Σ f_i Δc_i` from one.
pub const SPEED_NORM_TOL: f64 = 1e-10;

impl SpeedDistribution {
    /// `nodes` are `(c_i, f_i)` with strictly increasing speeds in
    /// `(0, c_star]`. A single node is a point mass of weight `f_0`;
    /// otherwise weights are `f_i` times trapezoid cell widths.
    pub fn new(nodes: Vec<(f64, f64)>, c_star: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidConfig("speed distribution has no nodes".into()));
        }
        if !(c_star > 0.0 && c_star.is_finite()) {
            return Err(Error::InvalidConfig(format!("c* must be positive, got {c_star}")));
        }
        for (i, &(c, f)) in nodes.iter().enumerate() {
            if !(c > 0.0 && c <= c_star) {
                return Err(Error::InvalidConfig(format!("speed {c} outside (0, {c_star}]")));
            }
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::InvalidConfig(format!("weight {f} at speed {c} is negative")));
            }
            if i > 0 && c <= nodes[i - 1].0 {
                return Err(Error::InvalidConfig("speeds must be strictly increasing".into()));
            }
        }
        let dist = SpeedDistribution { nodes, c_star };
        let total: f64 = dist.weights().iter().sum();
        if (total - 1.0).abs() > SPEED_NORM_TOL {
            return Err(Error::InvalidConfig(format!(
                "speed weights integrate to {total}, expected 1"
            )));
        }
        Ok(dist)
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    /// `f_i Δc_i`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        if n == 1 {
            return vec![self.nodes[0].1];
        }
        (0..n)
            .map(|i| {
                let lo = self.nodes[i.saturating_sub(1)].0;
                let hi = self.nodes[(i + 1).min(n - 1)].0;
                self.nodes[i].1 * 0.5 * (hi - lo)
            })
            .collect()
    }

    /// Period for speed `c` under `c τ_c = c* τ*`.
    pub fn period_for(&self, c: f64, tau_star: f64) -> f64 {
        self.c_star * tau_star / c
    }
}

/// `Σ_i f_i Δc_i v_{c_i}(·, t)` where `v_c` evolves `family(c)` with speed
/// `c` and period `c* τ* / c`.
pub fn superpose<F>(
    dist: &SpeedDistribution,
    family: F,
    t: f64,
    tau_star: f64,
    opts: &EvolveOptions,
) -> Result<GridField>
where
    F: Fn(f64) -> Result<GridField>,
{
    let mut acc: Option<Vec<f64>> = None;
    let mut geometry: Option<GridField> = None;
    for (&(c, _), w) in dist.nodes().iter().zip(dist.weights()) {
        let u = family(c)?;
        if let Some(g) = &geometry {
            if !g.same_geometry(&u) {
                return Err(Error::InvalidConfig(format!(
                    "field for speed {c} is on a different grid"
                )));
            }
        }
        let p = ModelParams::new(c, dist.period_for(c, tau_star))?;
        let v = evolve_with(&u, t, &p, opts)?;
        match &mut acc {
            None => acc = Some(v.samples().iter().map(|x| w * x).collect()),
            Some(a) => a.iter_mut().zip(v.samples()).for_each(|(a, x)| *a += w * x),
        }
        geometry.get_or_insert(v);
    }
    let g = geometry.expect("distribution has nodes");
    Ok(g.with_samples_unchecked(acc.unwrap()))
}

/// Recovering `f` from a superposed solution is ill-posed and is not
/// attempted.
pub fn infer_speed_distribution(_observed: &GridField) -> Result<SpeedDistribution> {
    Err(Error::IllPosed(
        "recovering the speed distribution from a superposed solution".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dim;
    use crate::evolution::evolve;
    use crate::field::{integrate, SphereQuadrature};

    fn bump() -> GridField {
        GridField::centered(Dim::Two, 2.0, 41, |p| (-(p[0] * p[0] + p[1] * p[1]) / 0.05).exp()).unwrap()
    }

    #[test]
    fn weights_and_validation() {
        let d = SpeedDistribution::new(vec![(0.5, 1.0), (1.0, 1.0), (1.5, 1.0), (2.0, 0.0)], 2.0);
        assert!(d.is_err());
        let d = SpeedDistribution::new(vec![(1.0, 1.0), (2.0, 1.0)], 2.0).unwrap();
        assert_eq!(d.weights(), vec![0.5, 0.5]);
        assert_eq!(d.period_for(1.0, 0.1), 0.2);
        assert!(SpeedDistribution::new(vec![(2.0, 1.0), (1.0, 1.0)], 2.0).is_err());
        assert!(SpeedDistribution::new(vec![(3.0, 1.0)], 2.0).is_err());
    }

    #[test]
    fn point_mass_reduces_to_single_speed() {
        let u = bump();
        let d = SpeedDistribution::new(vec![(1.0, 1.0)], 1.0).unwrap();
        let opts = EvolveOptions::new(SphereQuadrature::new(Dim::Two));
        let s = superpose(&d, |_| Ok(u.clone()), 0.3, 0.2, &opts).unwrap();
        let p = ModelParams::new(1.0, 0.2).unwrap();
        assert_eq!(s, evolve(&u, 0.3, &p).unwrap());
    }

    #[test]
    fn superposed_mass_is_one() {
        let u = bump();
        let m = integrate(&u);
        let u = u.with_samples(u.samples().iter().map(|v| v / m).collect()).unwrap();
        let d = SpeedDistribution::new(vec![(0.5, 2.0), (1.0, 2.0)], 1.0).unwrap();
        let opts = EvolveOptions::new(SphereQuadrature::new(Dim::Two));
        let s = superpose(&d, |_| Ok(u.clone()), 0.7, 0.25, &opts).unwrap();
        assert!((integrate(&s) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inversion_is_refused() {
        assert!(matches!(infer_speed_distribution(&bump()), Err(Error::IllPosed(_))));
    }
}
