use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use causal_diffusion::checks::{run_check_suite, CheckConfig};
use causal_diffusion::diagnostics::{
    classical_limit_error, exp_type_estimate, gaussian_green, gaussian_mass_outside, monomial_growth_probe,
    Classification, EntireFunction, SemigroupTransform, ShellTransform, SymbolSpec,
};
use causal_diffusion::evolution::{
    continuity_residual, ddt_jump, epd_residual, evolve_spectral, evolve_with, fick_d, fick_d0, flux as flux_at,
    green as green_at, ks_distance, sample_green_monte_carlo, time_decompose, Boundary, EvolutionState,
    EvolveOptions, FdSteps,
};
use causal_diffusion::field::{integrate, point, read_field, FnField};
use causal_diffusion::{Dim, Error, GridField, ModelParams, ScalarField, SphereQuadrature};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::{csv, Output};
use crate::ModelArgs;

fn model(m: &ModelArgs) -> Result<(Dim, ModelParams)> {
    Ok((Dim::new(m.dim)?, ModelParams::new(m.c0, m.tau)?))
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidConfig(msg.into()).into()
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// exp(-|x|² / (2σ²))
    Gaussian,
    /// |x|²
    Quadratic,
    /// 1 + x - x₂/2 + x₃/4
    Affine,
    Constant,
}

impl Profile {
    fn eval(self, sigma: f64, p: &[f64; 3]) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        match self {
            Profile::Gaussian => (-r2 / (2.0 * sigma * sigma)).exp(),
            Profile::Quadratic => r2,
            Profile::Affine => 1.0 + p[0] - 0.5 * p[1] + 0.25 * p[2],
            Profile::Constant => 1.0,
        }
    }
}

/// Initial data: a field file, or an analytic profile.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SourceArgs {
    /// Field file: `.json` header with binary samples, or `.csv`.
    #[arg(long)]
    pub u: Option<PathBuf>,
    /// Grid origin for CSV input, one value per axis.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub origin: Vec<f64>,
    /// Grid spacing for CSV input.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, value_enum, default_value_t = Profile::Gaussian)]
    pub profile: Profile,
    #[arg(long, default_value_t = 0.25)]
    pub sigma: f64,
    /// Samples per axis when a profile is gridded.
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    /// Half width of the gridded box.
    #[arg(long, default_value_t = 2.5)]
    pub half_width: f64,
}

impl SourceArgs {
    fn grid(&self, dim: Dim) -> Result<GridField> {
        match &self.u {
            Some(path) => {
                let geometry = self.h.map(|h| (self.origin.as_slice(), h));
                let u = read_field(path, geometry)?;
                if u.dim() != dim {
                    return Err(Error::DimensionMismatch { left: u.dim().get(), right: dim.get() }.into());
                }
                Ok(u)
            }
            None => {
                let (profile, sigma) = (self.profile, self.sigma);
                Ok(GridField::centered(dim, self.half_width, self.n, move |p| profile.eval(sigma, p))?)
            }
        }
    }

    /// Gridded input is evolved with the default sphere rule; analytic
    /// profiles are evaluated exactly with the dense rule.
    fn state(&self, dim: Dim, p: ModelParams, horizon: usize) -> Result<EvolutionState> {
        if self.u.is_some() {
            let opts = EvolveOptions::new(SphereQuadrature::new(dim));
            return Ok(EvolutionState::from_grid(p, self.grid(dim)?, horizon, &opts)?);
        }
        let (profile, sigma) = (self.profile, self.sigma);
        let f: Arc<dyn ScalarField> = Arc::new(FnField::new(dim, move |x: &[f64; 3]| profile.eval(sigma, x)));
        Ok(EvolutionState::from_field(p, f, SphereQuadrature::dense(dim), horizon)?)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    /// Fail unless the grid covers every sphere around the support.
    Strict,
    /// Extend the field by its edge values.
    Clamp,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Stencil,
    /// Periodic FFT evolution on the grid box.
    Spectral,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Output times.
    #[arg(long = "t", value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Strict)]
    pub boundary: BoundaryArg,
    #[arg(long, value_enum, default_value_t = Backend::Stencil)]
    pub backend: Backend,
    /// Sphere quadrature nodes (2D and 3D).
    #[arg(long)]
    pub sphere_nodes: Option<usize>,
}

pub fn simulate(a: &SimulateArgs) -> Result<Output> {
    let (dim, p) = model(&a.model)?;
    let u = a.source.grid(dim)?;
    let quad = match a.sphere_nodes {
        Some(n) => SphereQuadrature::with_nodes(dim, n)?,
        None => SphereQuadrature::new(dim),
    };
    let boundary = match a.boundary {
        BoundaryArg::Strict => Boundary::Strict,
        BoundaryArg::Clamp => Boundary::Clamp,
    };
    let opts = EvolveOptions::new(quad).with_boundary(boundary);
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    for (i, &t) in a.times.iter().enumerate() {
        let td = time_decompose(t, &p)?;
        let v = match a.backend {
            Backend::Stencil => evolve_with(&u, t, &p, &opts)?,
            Backend::Spectral => evolve_spectral(&u, t, &p)?,
        };
        let name = format!("v_{i:03}.csv");
        rows.push(json!({
            "t": t, "n": td.n, "radius": td.radius,
            "mass": integrate(&v), "max_abs": v.max_abs(), "file": name,
        }));
        fields.push((name, v));
    }
    let summary = json!({
        "dim": dim, "c0": p.c0, "tau": p.tau,
        "grid": { "origin": u.origin(), "h": u.spacing(), "extents": u.extents() },
        "initial_mass": integrate(&u),
        "outputs": rows,
    });
    let mut out = Output::new(summary)?;
    for (name, v) in fields {
        out = out.field(&name, v);
    }
    Ok(out)
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GreenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t: f64,
}

pub fn green(a: &GreenArgs) -> Result<Output> {
    let (dim, p) = model(&a.model)?;
    let g = green_at(a.t, &p, dim)?;
    let td = time_decompose(a.t, &p)?;
    let (lo, hi) = g.support()?;
    let d0 = fick_d0(&p, dim);
    let reach = p.c0 * a.t;
    let summary = json!({
        "dim": dim, "c0": p.c0, "tau": p.tau, "t": a.t,
        "n": td.n, "radius": td.radius,
        "mass": g.mass(),
        "support": [lo, hi],
        "light_cone_radius": reach,
        "gaussian_comparison": {
            "d0": d0,
            "mass_outside_light_cone": if a.t > 0.0 { gaussian_mass_outside(reach, a.t, d0, dim)? } else { 0.0 },
        },
    });
    let rows = g.csv_rows().into_iter().map(|(r, d, m)| [r, d, m]);
    Ok(Output::new(summary)?
        .text("green.csv", csv(["r", "density", "atom_mass"], rows))
        .text("green.json", g.to_json()? + "\n"))
}

fn coords(dim: Dim, x: &[f64]) -> Result<[f64; 3]> {
    if x.is_empty() {
        return Ok([0.0; 3]);
    }
    Ok(point(dim, x)?)
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct JumpArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Checkpoint index.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Evaluation point, one value per axis.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
}

pub fn jump(a: &JumpArgs) -> Result<Output> {
    let (dim, p) = model(&a.model)?;
    let x = coords(dim, &a.x)?;
    let state = a.source.state(dim, p, a.m)?;
    let j = ddt_jump(&state, a.m, &x)?;
    Output::new(json!({
        "dim": dim, "c0": p.c0, "tau": p.tau, "m": a.m, "t": p.checkpoint(a.m),
        "x": &x[..dim.get()],
        "left": j.left, "right": j.right, "jump": j.jump(), "step": j.step,
    }))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FluxArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Step of the central differences for the Fick gradient.
    #[arg(long, default_value_t = 1e-4)]
    pub dx: f64,
}

pub fn flux(a: &FluxArgs) -> Result<Output> {
    let (dim, p) = model(&a.model)?;
    let x = coords(dim, &a.x)?;
    let n = time_decompose(a.t, &p)?.n;
    let state = a.source.state(dim, p, n)?;
    let j = flux_at(&state, &x, a.t)?;
    let d = fick_d(a.t, &p, dim)?;
    let mut fick = Vec::new();
    for k in 0..dim.get() {
        let (mut xp, mut xm) = (x, x);
        xp[k] += a.dx;
        xm[k] -= a.dx;
        let g = (state.value(&xp, a.t)? - state.value(&xm, a.t)?) / (2.0 * a.dx);
        fick.push(-d * g);
    }
    Output::new(json!({
        "dim": dim, "c0": p.c0, "tau": p.tau, "t": a.t,
        "x": &x[..dim.get()],
        "value": state.value(&x, a.t)?,
        "flux": &j[..dim.get()],
        "fick_d": d,
        "fick_flux": fick,
    }))
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    /// ∂v/∂t + ∇·j
    Continuity,
    /// Damped wave equation between checkpoints.
    Epd,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = ResidualKind::Epd)]
    pub kind: ResidualKind,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.02)]
    pub dx: f64,
    /// Number of halvings of (dt, dx).
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Fail with exit code 4 when the finest residual exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn residual(a: &ResidualArgs) -> Result<Output> {
    let (dim, p) = model(&a.model)?;
    if a.levels == 0 {
        return Err(invalid("--levels must be at least 1"));
    }
    let x = coords(dim, &a.x)?;
    let n = time_decompose(a.t, &p)?.n;
    let state = a.source.state(dim, p, n)?;
    let mut rows = Vec::new();
    for l in 0..a.levels {
        let f = 0.5f64.powi(l as i32);
        let steps = FdSteps { dt: a.dt * f, dx: a.dx * f };
        let r = match a.kind {
            ResidualKind::Continuity => continuity_residual(&state, &x, a.t, steps)?,
            ResidualKind::Epd => epd_residual(&state, &x, a.t, steps)?,
        };
        rows.push((steps, r));
    }
    let orders: Vec<f64> = rows.windows(2).map(|w| (w[0].1.abs() / w[1].1.abs()).log2()).collect();
    let finest = rows.last().map(|r| r.1).unwrap_or(f64::NAN);
    let table = csv(
        ["dt", "dx", "residual", "order"],
        rows.iter().enumerate().map(|(i, (s, r))| {
            let order = if i == 0 { f64::NAN } else { orders[i - 1] };
            [s.dt, s.dx, *r, order]
        }),
    );
    let mut out = Output::new(json!({
        "dim": dim, "c0": p.c0, "tau": p.tau, "t": a.t, "kind": a.kind,
        "x": &x[..dim.get()],
        "residuals": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
        "observed_orders": orders,
        "tol": a.tol,
    }))?
    .text("residual.csv", table);
    if let Some(tol) = a.tol {
        if !(finest.abs() <= tol) {
            out.failure = Some(format!("finest residual {finest:e} exceeds {tol:e}"));
        }
    }
    Ok(out)
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LimitArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long = "D0", alias = "d0", default_value_t = 0.5)]
    pub d0: f64,
    /// Comparison time T; every period must divide it.
    #[arg(long, default_value_t = 0.4)]
    pub t_end: f64,
    /// Periods; defaults to T/4, T/8, T/16.
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Time of the heat-kernel profile used as initial data.
    #[arg(long, default_value_t = 0.05)]
    pub t0: f64,
    /// Samples per axis; defaults to 257, 129 and 48 in 1, 2 and 3D.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
}

pub fn limit(a: &LimitArgs) -> Result<Output> {
    let dim = Dim::new(a.dim)?;
    let n = a.n.unwrap_or(match dim {
        Dim::One => 257,
        Dim::Two => 129,
        Dim::Three => 48,
    });
    let (t0, d0) = (a.t0, a.d0);
    if !(t0 > 0.0) {
        return Err(invalid(format!("--t0 must be positive, got {t0}")));
    }
    let u = GridField::centered(dim, a.half_width, n, |p| {
        gaussian_green(&p[..dim.get()], t0, d0, dim).unwrap_or(0.0)
    })?;
    let taus = if a.taus.is_empty() {
        vec![a.t_end / 4.0, a.t_end / 8.0, a.t_end / 16.0]
    } else {
        a.taus.clone()
    };
    let pts = classical_limit_error(&u, a.t_end, a.d0, &taus)?;
    let monotone = pts.windows(2).all(|w| w[1].error < w[0].error);
    let table = csv(
        ["tau", "c0", "error", "causal_mass", "heat_mass"],
        pts.iter().map(|p| [p.tau, p.c0, p.error, p.causal_mass, p.heat_mass]),
    );
    Ok(Output::new(json!({
        "dim": dim, "d0": a.d0, "t_end": a.t_end, "t0": a.t0, "n": n,
        "initial_mass": integrate(&u),
        "points": pts,
        "strictly_decreasing": monotone,
    }))?
    .text("limit.csv", table))
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Gaussian,
    Monomial,
    Constant,
    /// Transform of a uniform sphere of radius --radius.
    Shell,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PwsArgs {
    #[arg(long, value_enum)]
    pub symbol: SymbolKind,
    #[arg(long = "D0", alias = "d0", default_value_t = 1.0)]
    pub d0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 20.0)]
    pub rmax: f64,
    /// Radii rmax/nr, 2 rmax/nr, ..., rmax.
    #[arg(long, default_value_t = 20)]
    pub nr: usize,
    #[arg(long, default_value_t = causal_diffusion::diagnostics::DEFAULT_ANGLES)]
    pub angles: usize,
}

pub fn pws(a: &PwsArgs) -> Result<Output> {
    if a.nr < 4 || !(a.rmax > 0.0) {
        return Err(invalid("need --nr >= 4 and --rmax > 0"));
    }
    let f: Box<dyn EntireFunction> = match a.symbol {
        SymbolKind::Gaussian => Box::new(SemigroupTransform::new(&SymbolSpec::Gaussian { d0: a.d0 }, a.t)?),
        SymbolKind::Monomial => Box::new(SemigroupTransform::new(
            &SymbolSpec::Monomial { b: a.b, degree: a.degree },
            a.t,
        )?),
        SymbolKind::Constant => Box::new(SemigroupTransform::new(&SymbolSpec::Constant { b: a.b }, a.t)?),
        SymbolKind::Shell => Box::new(ShellTransform { dim: Dim::new(a.dim)?, radius: a.radius }),
    };
    let radii: Vec<f64> = (1..=a.nr).map(|i| a.rmax * i as f64 / a.nr as f64).collect();
    let rep = exp_type_estimate(f.as_ref(), &radii, a.angles)?;
    let table = csv(
        ["r", "log_max_modulus"],
        rep.radii.iter().zip(&rep.log_max_modulus).map(|(r, m)| [*r, *m]),
    );
    Ok(Output::new(json!({
        "symbol": a.symbol,
        "slope_low": rep.slope_low,
        "slope_high": rep.slope_high,
        "fitted_type": rep.fitted_type,
        "classification": rep.classification,
        "compact_support_possible": rep.classification == Classification::CompatibleWithCompactSupport,
    }))?
    .text("growth.csv", table))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ProbeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long)]
    pub degree: u32,
}

pub fn probe(a: &ProbeArgs) -> Result<Output> {
    let rep = monomial_growth_probe(a.b, a.degree)?;
    let table = csv(
        ["m", "angle", "log_modulus"],
        (0..rep.m.len()).map(|i| [rep.m[i], rep.angle[i], rep.log_modulus[i]]),
    );
    Ok(Output::new(json!({ "b": rep.b, "degree": rep.degree, "exponent": rep.exponent }))?.text("probe.csv", table))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn sample(a: &SampleArgs) -> Result<Output> {
    let (dim, p) = model(&a.model)?;
    let s = sample_green_monte_carlo(a.t, &p, dim, a.samples, a.seed)?;
    let cdf = green_at(a.t, &p, dim)?.cdf_evaluator();
    let ks = ks_distance(&s, |r| cdf.cdf(r));
    let table = csv(["r"], s.iter().map(|r| [*r]));
    Ok(Output::new(json!({
        "dim": dim, "c0": p.c0, "tau": p.tau, "t": a.t,
        "samples": a.samples, "seed": a.seed,
        "ks_distance": ks,
        "ks_bound": 4.0 / (a.samples as f64).sqrt(),
    }))?
    .text("samples.csv", table))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200_000)]
    pub mc_samples: usize,
    /// Scales every sphere weight in the evolution checks.
    #[arg(long, default_value_t = 1.0)]
    pub mass_leak: f64,
}

pub fn check(a: &CheckArgs) -> Result<Output> {
    let report = run_check_suite(&CheckConfig {
        seed: a.seed,
        mc_samples: a.mc_samples,
        mass_leak_factor: a.mass_leak,
    });
    let failed: Vec<String> = report.failures().map(|c| c.name.clone()).collect();
    let body = report.to_json()?;
    let mut out = Output::new(&report)?.text("report.json", body);
    if !failed.is_empty() {
        out.failure = Some(format!("failed checks: {}", failed.join(", ")));
    }
    Ok(out)
}
