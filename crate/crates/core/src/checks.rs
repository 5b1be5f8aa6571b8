//! Aggregated invariant checks with a deterministic JSON report.
//!
//! Fixtures are drawn from a fixed internal seed, so only the checks
//! flagged `stochastic` depend on [`CheckConfig::seed`].

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    classical_limit_error, exp_type_estimate, gaussian_green, monomial_growth_probe, Classification,
    SemigroupTransform, ShellTransform, SymbolSpec, DEFAULT_ANGLES,
};
use crate::dim::Dim;
use crate::error::Result;
use crate::evolution::monte_carlo::uniform_direction;
use crate::evolution::{
    continuity_residual, ddt_jump, epd_residual, evolve_with, green, ks_distance, sample_green_monte_carlo,
    semigroup_check, superpose, EvolutionState, EvolveOptions, FdSteps, ModelParams, SpeedDistribution,
};
use crate::field::{integrate, spherical_mean, FnField, GridField, ScalarField, SphereQuadrature};
use crate::quadrature::{integrate_sqrt_ends, GaussLegendre};
use crate::radial::{convolve_radial, Atom, RadialMeasure, ShellKernel};

const FIXTURE_SEED: u64 = 0x5eed_f1e1d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub seed: u64,
    /// Samples per Monte Carlo comparison.
    pub mc_samples: usize,
    /// Factor applied to every sphere-quadrature weight used by the
    /// evolution checks. Anything but 1 breaks mass conservation.
    pub mass_leak_factor: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 1,
            mc_samples: 200_000,
            mass_leak_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst measured value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub stochastic: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: CheckConfig,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn below(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value.is_finite() && value <= tolerance,
        value,
        tolerance,
        stochastic: false,
        detail: detail.into(),
    }
}

fn stochastic(mut c: CheckResult) -> CheckResult {
    c.stochastic = true;
    c
}

fn failed(name: &str, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        value: f64::NAN,
        tolerance: f64::NAN,
        stochastic: false,
        detail: format!("error: {err}"),
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| failed(name, e))
}

/// Runs every check in a fixed order.
pub fn run_check_suite(cfg: &CheckConfig) -> CheckReport {
    let checks = vec![
        run("radial.kernel_normalization", kernel_normalization),
        run("radial.kernel_monte_carlo", || kernel_monte_carlo(cfg)),
        run("radial.mass_multiplicativity", mass_multiplicativity),
        run("radial.commutativity", commutativity),
        run("radial.associativity", associativity),
        run("radial.support_additivity", support_additivity),
        run("field.quadrature_moments", quadrature_moments),
        run("field.mean_value_recovery", mean_value_recovery),
        run("evolution.mass_conservation", || mass_conservation(cfg)),
        run("evolution.positivity", || positivity(cfg)),
        run("evolution.translation_equivariance", || translation(cfg)),
        run("evolution.causality", causality),
        run("evolution.semigroup", semigroup),
        run("evolution.green_monte_carlo", || green_monte_carlo(cfg)),
        run("evolution.jump", jump),
        run("evolution.epd_quadratic", epd_quadratic),
        run("evolution.continuity_affine", continuity_affine),
        run("evolution.superposition_mass", || superposition_mass(cfg)),
        run("evolution.speed_continuity", || speed_continuity(cfg)),
        run("diagnostics.gaussian_positive", gaussian_positive),
        run("diagnostics.gaussian_incompatible", gaussian_incompatible),
        run("diagnostics.shell_type", shell_type),
        run("diagnostics.monomial_probes", monomial_probes),
        run("diagnostics.classical_limit", classical_limit),
    ];
    CheckReport {
        config: cfg.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn quadrature(cfg: &CheckConfig, dim: Dim) -> SphereQuadrature {
    let q = SphereQuadrature::new(dim);
    if cfg.mass_leak_factor == 1.0 {
        q
    } else {
        q.scaled_weights(cfg.mass_leak_factor)
    }
}

fn kernel_normalization() -> Result<CheckResult> {
    let rule = GaussLegendre::new(40);
    let mut worst: f64 = 0.0;
    for dim in [Dim::Two, Dim::Three] {
        for (r1, r2) in [(1.0, 1.0), (1.0, 0.5), (0.3, 2.0)] {
            let k = ShellKernel::new(dim, r1, r2)?;
            let (lo, hi) = k.support();
            let mass = integrate_sqrt_ends(&rule, lo, hi, true, true, |r| k.density(r));
            worst = worst.max((mass - 1.0).abs());
        }
    }
    let k = ShellKernel::new(Dim::One, 2.0, 1.0)?;
    let m: f64 = k.atoms_1d().iter().map(|a| a.mass).sum();
    worst = worst.max((m - 1.0).abs());
    Ok(below("radial.kernel_normalization", worst, 1e-8, "|∫ density - 1| over dims and radius pairs"))
}

fn kernel_monte_carlo(cfg: &CheckConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = (cfg.mc_samples / 5).max(100);
    let mut worst_ratio: f64 = 0.0;
    for dim in [Dim::Two, Dim::Three] {
        for _ in 0..5 {
            let r1 = rng.gen_range(0.2..2.0);
            let r2 = rng.gen_range(0.2..2.0);
            let k = ShellKernel::new(dim, r1, r2)?;
            let mut s: Vec<f64> = (0..n)
                .map(|_| {
                    let x = uniform_direction(dim, &mut rng);
                    let y = uniform_direction(dim, &mut rng);
                    let v: Vec<f64> = (0..3).map(|a| r1 * x[a] + r2 * y[a]).collect();
                    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
                })
                .collect();
            s.sort_by(f64::total_cmp);
            let d = ks_distance(&s, |r| k.cdf(r));
            worst_ratio = worst_ratio.max(d * (n as f64).sqrt() / 4.0);
        }
    }
    Ok(stochastic(below(
        "radial.kernel_monte_carlo",
        worst_ratio,
        1.0,
        format!("max KS / (4/sqrt(n)) over 5 radius pairs in 2D and 3D, n = {n}"),
    )))
}

fn atoms(dim: Dim, list: &[(f64, f64)]) -> Result<RadialMeasure> {
    RadialMeasure::new(dim, list.iter().map(|&(r, m)| Atom::new(r, m)).collect(), vec![])
}

fn mass_multiplicativity() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let a = atoms(dim, &[(0.4, 0.3), (1.1, 0.5)])?;
        let b = atoms(dim, &[(0.2, 0.25), (0.7, 0.6), (1.5, 0.15)])?;
        let ab = convolve_radial(&a, &b)?;
        worst = worst.max((ab.mass() - a.mass() * b.mass()).abs());
        let abab = convolve_radial(&ab, &ab)?;
        worst = worst.max((abab.mass() - ab.mass() * ab.mass()).abs());
    }
    Ok(below("radial.mass_multiplicativity", worst, 1e-8, "|mass(a*b) - mass(a) mass(b)|"))
}

fn commutativity() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let a = atoms(dim, &[(0.4, 0.3), (1.1, 0.7)])?;
        let b = atoms(dim, &[(0.25, 0.5), (0.9, 0.5)])?;
        let d = convolve_radial(&a, &b)?.cdf_distance(&convolve_radial(&b, &a)?)?;
        worst = worst.max(d / (a.outer_radius() + b.outer_radius()));
    }
    Ok(below("radial.commutativity", worst, 1e-8, "relative CDF L1 distance of a*b and b*a"))
}

fn associativity() -> Result<CheckResult> {
    let mut worst_1d: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let a = atoms(dim, &[(0.4, 0.3), (1.1, 0.7)])?;
        let b = atoms(dim, &[(0.25, 0.5), (0.9, 0.5)])?;
        let c = atoms(dim, &[(0.6, 1.0)])?;
        let left = convolve_radial(&convolve_radial(&a, &b)?, &c)?;
        let right = convolve_radial(&a, &convolve_radial(&b, &c)?)?;
        let scale = a.outer_radius() + b.outer_radius() + c.outer_radius();
        let d = left.cdf_distance(&right)? / scale;
        if dim == Dim::One {
            worst_1d = worst_1d.max(d);
        } else {
            worst = worst.max(d);
        }
    }
    let mut r = below(
        "radial.associativity",
        worst,
        1e-5,
        format!("relative CDF L1 distance of (a*b)*c and a*(b*c): 1D {worst_1d:e} (tol 1e-8), 2D/3D"),
    );
    r.passed &= worst_1d <= 1e-8;
    Ok(r)
}

fn support_additivity() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let a = atoms(dim, &[(0.4, 0.3), (1.1, 0.7)])?;
        let b = atoms(dim, &[(0.25, 0.5), (0.9, 0.5)])?;
        let (lo, hi) = convolve_radial(&a, &b)?.support()?;
        worst = worst.max((hi - 2.0).abs());
        // smallest |r_a - r_b| over pairs is 0.15
        worst = worst.max((lo - 0.15).abs());
    }
    Ok(below("radial.support_additivity", worst, 1e-9, "support of atom-only products"))
}

fn quadrature_moments() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for dim in Dim::ALL {
        let q = SphereQuadrature::new(dim);
        let (m0, m1, m2) = q.moments();
        ok &= (m0 - 1.0).abs() <= 1e-12 && m1.iter().all(|v| v.abs() <= 1e-10);
        let n = dim.get();
        for k in 0..n {
            for l in 0..n {
                let want = if k == l { 1.0 / n as f64 } else { 0.0 };
                worst = worst.max((m2[k][l] - want).abs());
            }
        }
    }
    let mut r = below(
        "field.quadrature_moments",
        worst,
        5e-3,
        "max second-moment deviation of the default rules (exact in 1D/2D)",
    );
    r.passed &= ok;
    Ok(r)
}

fn mean_value_recovery() -> Result<CheckResult> {
    let u = GridField::centered(Dim::Two, 1.0, 41, |p| (-(p[0] * p[0] + 2.0 * p[1] * p[1])).exp() + p[0])?;
    let q = SphereQuadrature::new(Dim::Two);
    let x = [0.13, -0.21, 0.0];
    let exact = (-(0.13f64.powi(2) + 2.0 * 0.21f64.powi(2))).exp() + 0.13;
    let h = u.spacing();
    let errs: Vec<f64> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&r| spherical_mean(&u, &q, &x, r).map(|v| (v - exact).abs()))
        .collect::<Result<_>>()?;
    let at_zero = (spherical_mean(&u, &q, &x, 0.0)? - exact).abs();
    // the limit R -> 0 is the interpolated value
    let excess: Vec<f64> = errs.iter().map(|e| (e - at_zero).abs()).collect();
    let ratio = (excess[0] / excess[1]).min(excess[1] / excess[2]);
    let mut r = below(
        "field.mean_value_recovery",
        1.0 / ratio,
        1.0 / 1.8,
        format!("errors at R = h, h/2, h/4: {errs:?}; interpolation error at R = 0: {at_zero:e}"),
    );
    r.passed &= errs[2] < errs[0];
    Ok(r)
}

/// Random sums of Gaussian bumps inside the ball of radius `spread`.
fn random_bumps(dim: Dim, half: f64, n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Result<GridField> {
    let k = rng.gen_range(1..=3);
    let bumps: Vec<([f64; 3], f64, f64)> = (0..k)
        .map(|_| {
            let mut c = [0.0; 3];
            for a in 0..dim.get() {
                c[a] = rng.gen_range(-spread..spread);
            }
            (c, rng.gen_range(0.08..0.15), rng.gen_range(0.5..2.0))
        })
        .collect();
    GridField::centered(dim, half, n, move |p| {
        bumps
            .iter()
            .map(|(c, s, a)| {
                let r2: f64 = (0..3).map(|i| (p[i] - c[i]).powi(2)).sum();
                a * (-r2 / (2.0 * s * s)).exp()
            })
            .sum()
    })
}

fn fixture_grid(dim: Dim) -> (f64, usize) {
    match dim {
        Dim::One => (2.6, 261),
        Dim::Two => (2.6, 105),
        Dim::Three => (2.6, 53),
    }
}

fn mass_conservation(cfg: &CheckConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let p = ModelParams::new(1.0, 0.2)?;
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let opts = EvolveOptions::new(quadrature(cfg, dim));
        for _ in 0..2 {
            let (half, n) = fixture_grid(dim);
            let u = random_bumps(dim, half, n, 0.4, &mut rng)?;
            let t = rng.gen_range(0.0..1.0f64).max(1e-3);
            let v = evolve_with(&u, t, &p, &opts)?;
            let (a, b) = (integrate(&u), integrate(&v));
            worst = worst.max(((b - a) / a).abs());
        }
    }
    Ok(below("evolution.mass_conservation", worst, 1e-6, "relative mass drift, 2 fixtures per dimension"))
}

fn positivity(cfg: &CheckConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 1);
    let p = ModelParams::new(1.0, 0.2)?;
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let (half, n) = fixture_grid(dim);
        let u = random_bumps(dim, half, n, 0.4, &mut rng)?;
        let v = evolve_with(&u, 0.5, &p, &EvolveOptions::new(quadrature(cfg, dim)))?;
        let min = v.samples().iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.max(-min / v.max_abs());
    }
    Ok(below("evolution.positivity", worst, 0.0, "-min(v) / max|v| for nonnegative u"))
}

fn translation(cfg: &CheckConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 2);
    let p = ModelParams::new(1.0, 0.2)?;
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let (half, n) = fixture_grid(dim);
        let u = random_bumps(dim, half, n, 0.2, &mut rng)?;
        let shift: Vec<isize> = (0..dim.get()).map(|a| [3, -2, 1][a]).collect();
        let opts = EvolveOptions::new(quadrature(cfg, dim));
        let a = evolve_with(&u.shifted(&shift)?, 0.3, &p, &opts)?;
        let b = evolve_with(&u, 0.3, &p, &opts)?.shifted(&shift)?;
        let d = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d / a.max_abs());
    }
    Ok(below("evolution.translation_equivariance", worst, 1e-12, "grid-aligned shifts commute with evolution"))
}

fn causality() -> Result<CheckResult> {
    let p = ModelParams::new(1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for dim in Dim::ALL {
        for k in [0.5, 1.5, 2.5, 3.5] {
            let t = k * p.tau;
            let g = green(t, &p, dim)?;
            let (lo, hi) = g.support()?;
            let cell = g.segments().first().map(|s| s.spacing()).unwrap_or(0.0);
            let excess = (hi - p.c0 * t - cell).max(0.0);
            worst = worst.max(excess);
            if dim != Dim::One && k == 1.5 {
                let inner = p.c0 * (2.0 * p.tau - t);
                let off = ((lo - inner).abs() - 2.0 * cell).max(0.0);
                worst = worst.max(off);
            }
            if dim != Dim::One && k == 2.5 {
                worst = worst.max((lo - 0.05 * p.lambda()).max(0.0));
            }
            detail.push(format!("N={dim} t={k}τ: [{lo:.6}, {hi:.6}]"));
        }
    }
    Ok(below("evolution.causality", worst, 0.0, detail.join("; ")))
}

fn semigroup() -> Result<CheckResult> {
    let p = ModelParams::new(1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    let mut zero_ok = true;
    for dim in Dim::ALL {
        for k in 0..=4usize {
            for m in 0..=(4 - k) {
                let d = semigroup_check(k, m, &p, dim)?;
                if k * m == 0 {
                    zero_ok &= d == 0.0;
                } else {
                    worst = worst.max(d);
                }
            }
        }
    }
    let mut r = below("evolution.semigroup", worst, 1e-4, "max defect for k + m <= 4");
    r.passed &= zero_ok;
    Ok(r)
}

fn green_monte_carlo(cfg: &CheckConfig) -> Result<CheckResult> {
    let p = ModelParams::new(1.0, 1.0)?;
    let n = cfg.mc_samples.max(100);
    let mut worst_ratio: f64 = 0.0;
    for (i, dim) in [Dim::Two, Dim::Three].into_iter().enumerate() {
        for (j, t) in [1.5, 2.5].into_iter().enumerate() {
            let g = green(t, &p, dim)?;
            let s = sample_green_monte_carlo(t, &p, dim, n, cfg.seed.wrapping_add((2 * i + j) as u64))?;
            let cdf = g.cdf_evaluator();
            worst_ratio = worst_ratio.max(ks_distance(&s, |r| cdf.cdf(r)) * (n as f64).sqrt() / 4.0);
        }
    }
    // 1D at t = 2τ: half the particles return to the origin
    let s = sample_green_monte_carlo(2.0, &p, Dim::One, n, cfg.seed.wrapping_add(7))?;
    let at_zero = s.iter().filter(|r| **r < 1e-9).count() as f64;
    let sigma = (n as f64 * 0.25).sqrt();
    let z = (at_zero - 0.5 * n as f64).abs() / sigma;
    worst_ratio = worst_ratio.max(z / 3.0);
    Ok(stochastic(below(
        "evolution.green_monte_carlo",
        worst_ratio,
        1.0,
        format!("max of KS / (4/sqrt(n)) in 2D/3D and binomial z / 3 in 1D, n = {n}"),
    )))
}

fn quadratic(dim: Dim) -> Arc<dyn ScalarField> {
    Arc::new(FnField::new(dim, |p: &[f64; 3]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2]))
}

fn gaussian_bump(dim: Dim) -> Arc<dyn ScalarField> {
    Arc::new(FnField::new(dim, |p: &[f64; 3]| {
        (-((p[0] - 0.1).powi(2) + p[1] * p[1] + p[2] * p[2]) / 0.5).exp()
    }))
}

fn jump() -> Result<CheckResult> {
    let p = ModelParams::new(1.0, 0.5)?;
    let want = 2.0 * p.c0 * p.c0 * p.tau;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for dim in Dim::ALL {
        let st = EvolutionState::from_field(p, quadratic(dim), SphereQuadrature::new(dim), 1)?;
        let j = ddt_jump(&st, 1, &[0.2, 0.1, 0.0])?;
        worst = worst.max(((j.left - want) / want).abs() / 0.01);
        worst = worst.max(j.right.abs() / (1e-3 * want));
        let st = EvolutionState::from_field(p, gaussian_bump(dim), SphereQuadrature::new(dim), 1)?;
        let j = ddt_jump(&st, 1, &[0.3, 0.0, 0.0])?;
        worst = worst.max(j.right.abs() / (1e-3 * j.left.abs()));
        detail.push(format!("N={dim} gaussian left {:.6e} right {:.3e}", j.left, j.right));
    }
    Ok(below("evolution.jump", worst, 1.0, detail.join("; ")))
}

fn epd_quadratic() -> Result<CheckResult> {
    let p = ModelParams::new(1.3, 0.5)?;
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let st = EvolutionState::from_field(p, quadratic(dim), SphereQuadrature::new(dim), 0)?;
        for (x, t) in [([0.2, 0.1, -0.3], 0.1), ([1.0, -0.5, 0.25], 0.3), ([0.0, 0.0, 0.0], 0.45)] {
            let r = epd_residual(&st, &x, t, FdSteps { dt: 0.01, dx: 0.01 })?;
            worst = worst.max(r.abs());
        }
    }
    Ok(below("evolution.epd_quadratic", worst, 1e-8, "|residual| for u = |x|^2"))
}

fn continuity_affine() -> Result<CheckResult> {
    let p = ModelParams::new(1.3, 0.5)?;
    let mut worst: f64 = 0.0;
    for dim in Dim::ALL {
        let u: Arc<dyn ScalarField> =
            Arc::new(FnField::new(dim, |p: &[f64; 3]| 2.0 - p[0] + 0.5 * p[1] + 3.0 * p[2]));
        let st = EvolutionState::from_field(p, u, SphereQuadrature::new(dim), 1)?;
        for t in [0.1, 0.3, 0.7] {
            let r = continuity_residual(&st, &[0.3, 0.2, 0.1], t, FdSteps { dt: 0.01, dx: 0.01 })?;
            worst = worst.max(r.abs());
        }
    }
    Ok(below("evolution.continuity_affine", worst, 1e-10, "|residual| for affine u"))
}

fn superposition_mass(cfg: &CheckConfig) -> Result<CheckResult> {
    let dim = Dim::Two;
    let u = GridField::centered(dim, 3.0, 121, |p| (-(p[0] * p[0] + p[1] * p[1]) / 0.05).exp())?;
    let m = integrate(&u);
    let u = u.with_samples(u.samples().iter().map(|v| v / m).collect())?;
    let dist = SpeedDistribution::new(vec![(0.5, 2.0), (1.0, 2.0)], 1.0)?;
    let s = superpose(&dist, |_| Ok(u.clone()), 0.9, 0.25, &EvolveOptions::new(quadrature(cfg, dim)))?;
    let mass = integrate(&s);
    Ok(below("evolution.superposition_mass", (mass - 1.0).abs(), 1e-6, format!("mass {mass}")))
}

fn speed_continuity(cfg: &CheckConfig) -> Result<CheckResult> {
    let dim = Dim::Two;
    let u = GridField::centered(dim, 2.5, 101, |p| (-(p[0] * p[0] + p[1] * p[1]) / 0.1).exp())?;
    let opts = EvolveOptions::new(quadrature(cfg, dim));
    let (c_star, tau_star, t) = (1.0, 0.3, 0.47);
    let at = |c: f64| -> Result<f64> {
        let p = ModelParams::new(c, c_star * tau_star / c)?;
        let v = evolve_with(&u, t, &p, &opts)?;
        Ok(v.samples()[v.flat_index([50, 50, 0])])
    };
    let (a, b) = (at(0.8)?, at(0.808)?);
    let rel = ((a - b) / a).abs();
    Ok(below("evolution.speed_continuity", rel, 0.05, format!("v at c = 0.8: {a:.6e}, c = 0.808: {b:.6e}")))
}

fn gaussian_positive() -> Result<CheckResult> {
    let (t, d0) = (1.0_f64, 1.0_f64);
    let mut min = f64::INFINITY;
    for dim in Dim::ALL {
        let mut x = vec![0.0; dim.get()];
        x[0] = 10.0 * (4.0 * d0 * t).sqrt();
        min = min.min(gaussian_green(&x, t, d0, dim)?);
    }
    let mut r = below("diagnostics.gaussian_positive", -min, 0.0, format!("min value {min:e}"));
    r.passed &= min > 0.0;
    Ok(r)
}

fn radii(n: usize, rmax: f64) -> Vec<f64> {
    (1..=n).map(|i| rmax * i as f64 / n as f64).collect()
}

fn gaussian_incompatible() -> Result<CheckResult> {
    let f = SemigroupTransform::new(&SymbolSpec::Gaussian { d0: 1.0 }, 1.0)?;
    let a = exp_type_estimate(&f, &radii(20, 20.0), DEFAULT_ANGLES)?;
    let b = exp_type_estimate(&f, &radii(40, 40.0), DEFAULT_ANGLES)?;
    let ok = a.classification == Classification::Incompatible && b.classification == Classification::Incompatible;
    let mut r = below(
        "diagnostics.gaussian_incompatible",
        a.slope_low / a.slope_high,
        1.0 / 1.1,
        format!("slopes {:.4} -> {:.4}", a.slope_low, a.slope_high),
    );
    r.passed &= ok;
    Ok(r)
}

fn shell_type() -> Result<CheckResult> {
    let f = ShellTransform { dim: Dim::One, radius: 2.0 };
    let rep = exp_type_estimate(&f, &radii(20, 20.0), DEFAULT_ANGLES)?;
    let fitted = rep.fitted_type.unwrap_or(f64::INFINITY);
    Ok(below("diagnostics.shell_type", (fitted - 2.0).abs() / 2.0, 0.025, format!("fitted type {fitted}")))
}

fn monomial_probes() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for degree in 2..=6 {
        for b in [1.0, -1.0] {
            worst = worst.max((monomial_growth_probe(b, degree)?.exponent - degree as f64).abs());
        }
    }
    Ok(below("diagnostics.monomial_probes", worst, 0.1, "|exponent - degree|, degrees 2-6, b = ±1"))
}

fn classical_limit() -> Result<CheckResult> {
    let (t0, d0) = (0.05, 0.5);
    let u = GridField::centered(Dim::One, 4.0, 257, |p| gaussian_green(&p[..1], t0, d0, Dim::One).unwrap())?;
    let t_end = 0.4;
    let pts = classical_limit_error(&u, t_end, d0, &[t_end / 4.0, t_end / 8.0, t_end / 16.0])?;
    let errs: Vec<f64> = pts.iter().map(|p| p.error).collect();
    let worst_ratio = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    Ok(below("diagnostics.classical_limit", worst_ratio, 1.0 - 1e-9, format!("L1 errors {errs:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_leak_is_detected() {
        let cfg = CheckConfig {
            mass_leak_factor: 0.9,
            ..CheckConfig::default()
        };
        let r = mass_conservation(&cfg).unwrap();
        assert!(!r.passed);
        assert!(mass_conservation(&CheckConfig::default()).unwrap().passed);
    }
}
