use causal_diffusion::evolution::{evolve_with, time_decompose, EvolveOptions};
use causal_diffusion::field::{integrate, point, spherical_mean, FnField};
use causal_diffusion::{convolve_radial, Atom, Dim, GridField, ModelParams, RadialMeasure, SphereQuadrature};
use proptest::prelude::*;

fn dim() -> impl Strategy<Value = Dim> {
    prop_oneof![Just(Dim::One), Just(Dim::Two), Just(Dim::Three)]
}

fn atoms(dim: Dim) -> impl Strategy<Value = RadialMeasure> {
    prop::collection::vec((0.05f64..2.0, 0.05f64..1.0), 1..4).prop_map(move |v| {
        RadialMeasure::new(dim, v.into_iter().map(|(r, m)| Atom::new(r, m)).collect(), vec![]).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (RadialMeasure, RadialMeasure)> {
    dim().prop_flat_map(|d| (atoms(d), atoms(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_mass_is_multiplicative((a, b) in pair()) {
        let ab = convolve_radial(&a, &b).unwrap();
        prop_assert!((ab.mass() - a.mass() * b.mass()).abs() < 1e-8);
    }

    #[test]
    fn convolution_commutes((a, b) in pair()) {
        let d = convolve_radial(&a, &b).unwrap().cdf_distance(&convolve_radial(&b, &a).unwrap()).unwrap();
        prop_assert!(d < 1e-8 * (a.outer_radius() + b.outer_radius()));
    }

    #[test]
    fn convolution_support_is_bounded_by_the_sum((a, b) in pair()) {
        let (_, hi) = convolve_radial(&a, &b).unwrap().support().unwrap();
        prop_assert!(hi <= a.outer_radius() + b.outer_radius() + 1e-9);
    }

    #[test]
    fn time_decomposition_reassembles_t(t in 0.0f64..20.0, c0 in 0.1f64..5.0, tau in 0.05f64..3.0) {
        let p = ModelParams::new(c0, tau).unwrap();
        let td = time_decompose(t, &p).unwrap();
        prop_assert!(td.radius >= 0.0 && td.radius <= p.lambda() * (1.0 + 1e-12));
        let back = td.n as f64 * tau + td.radius / c0;
        prop_assert!((back - t).abs() <= 1e-9 * t.max(1.0));
    }

    #[test]
    fn spherical_mean_of_affine_is_its_center_value(
        d in dim(), a in -2.0f64..2.0, b in -2.0f64..2.0, r in 0.0f64..3.0, x in -1.0f64..1.0
    ) {
        let f = FnField::new(d, move |p: &[f64; 3]| 1.0 + a * p[0] + b * p[1] - p[2]);
        let q = SphereQuadrature::new(d);
        let c = point(d, &[x, -x, 0.5 * x][..d.get()]).unwrap();
        let want = 1.0 + a * c[0] + b * c[1] - c[2];
        let got = spherical_mean(&f, &q, &c, r).unwrap();
        prop_assert!((got - want).abs() < 1e-11 * (1.0 + want.abs()));
    }

    #[test]
    fn evolution_conserves_mass_and_sign(
        c in -0.3f64..0.3, s in 0.1f64..0.2, t in 0.01f64..1.0
    ) {
        let u = GridField::centered(Dim::One, 3.0, 241, |p| (-(p[0] - c).powi(2) / (2.0 * s * s)).exp()).unwrap();
        let p = ModelParams::new(1.0, 0.25).unwrap();
        let v = evolve_with(&u, t, &p, &EvolveOptions::new(SphereQuadrature::new(Dim::One))).unwrap();
        prop_assert!(((integrate(&v) - integrate(&u)) / integrate(&u)).abs() < 1e-9);
        prop_assert!(v.samples().iter().all(|x| *x >= 0.0));
    }
}
