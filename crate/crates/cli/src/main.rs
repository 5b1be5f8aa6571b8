use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

mod commands;
mod output;

use commands::*;
use output::{Manifest, Output, ToleranceFailure};

#[derive(Parser)]
#[command(name = "causal-diff", version, about = "Causal diffusion simulations and diagnostics")]
struct Cli {
    /// Directory for manifest.json, summary.json and CSV outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "CAUSAL_DIFF_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Invocation,
}

#[derive(Subcommand)]
enum Invocation {
    #[command(flatten)]
    Run(Command),
    /// Re-run the configuration stored in a manifest.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Evolve a grid field to one or more times.
    Simulate(SimulateArgs),
    /// Radial Green function at time t.
    Green(GreenArgs),
    /// One-sided time derivatives at a checkpoint.
    Jump(JumpArgs),
    /// Flux density and its Fick approximation.
    Flux(FluxArgs),
    /// Continuity or wave-equation residual under step refinement.
    Residual(ResidualArgs),
    /// Distance to the heat solution as the period shrinks at fixed D0.
    Limit(LimitArgs),
    /// Exponential-type estimate of a semigroup transform.
    Pws(PwsArgs),
    /// Growth along the divergent sequences for a monomial symbol.
    Probe(ProbeArgs),
    /// Monte Carlo samples of the walker displacement.
    Sample(SampleArgs),
    /// Run the invariant check suite.
    Check(CheckArgs),
}

impl Command {
    fn execute(&self) -> Result<Output> {
        match self {
            Command::Simulate(a) => simulate(a),
            Command::Green(a) => green(a),
            Command::Jump(a) => jump(a),
            Command::Flux(a) => flux(a),
            Command::Residual(a) => residual(a),
            Command::Limit(a) => limit(a),
            Command::Pws(a) => pws(a),
            Command::Probe(a) => probe(a),
            Command::Sample(a) => sample(a),
            Command::Check(a) => check(a),
        }
    }
}

#[derive(Args, Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ToleranceFailure>().is_some() {
        return 4;
    }
    use causal_diffusion::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Domain(_) | E::OutOfDomain { .. } | E::IllPosed(_)) => 3,
        _ => 2,
    }
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    let mut v = serde_json::json!({
        "error": "error",
        "message": format!("{err:#}"),
    });
    if let Some(e) = err.downcast_ref::<causal_diffusion::Error>() {
        v["error"] = e.kind().into();
        if let causal_diffusion::Error::OutOfDomain { required, .. } = e {
            v["required_box"] = serde_json::json!(required);
        }
    }
    if err.downcast_ref::<ToleranceFailure>().is_some() {
        v["error"] = "tolerance".into();
    }
    v
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(causal_diffusion::Error::InvalidConfig("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let command = match cli.command {
        Invocation::Run(c) => c,
        Invocation::Rerun { manifest } => Manifest::load(&manifest)?.config,
    };
    let out = command.execute()?;
    let summary = serde_json::to_string_pretty(&out.summary)?;
    if let Some(dir) = &cli.out {
        output::write_all(dir, &Manifest::new(command), &out)?;
    }
    println!("{summary}");
    out.verdict()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let v = serde_json::json!({"error": "invalid_config", "message": e.to_string().trim()});
            eprintln!("{v}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
