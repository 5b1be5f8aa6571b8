//! Particle picture of the Green function: a particle moves in straight
//! legs of length `c0 τ`, choosing a fresh uniform direction each period.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dim::Dim;
use crate::error::{Error, Result};

use super::{time_decompose, ModelParams};

const CHUNK: usize = 1 << 15;

pub(crate) fn uniform_direction(dim: Dim, rng: &mut ChaCha8Rng) -> [f64; 3] {
    match dim {
        Dim::One => [if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0, 0.0],
        Dim::Two => {
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            [th.cos(), th.sin(), 0.0]
        }
        Dim::Three => loop {
            let g: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if n > 1e-12 {
                break [g[0] / n, g[1] / n, g[2] / n];
            }
        },
    }
}

/// Sorted distances from the origin of `n_samples` particles at time `t`.
/// Chunk `i` draws from stream `i` of a ChaCha generator seeded with
/// `seed`, so the output does not depend on the thread count.
pub fn sample_green_monte_carlo(
    t: f64,
    p: &ModelParams,
    dim: Dim,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let td = time_decompose(t, p)?;
    let legs: Vec<f64> = std::iter::repeat(p.lambda())
        .take(td.n)
        .chain(std::iter::once(td.radius))
        .collect();
    let chunks = n_samples.div_ceil(CHUNK);
    let mut radii: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let legs = &legs;
            (0..count)
                .map(move |_| {
                    let mut x = [0.0; 3];
                    for &len in legs {
                        let y = uniform_direction(dim, &mut rng);
                        for a in 0..3 {
                            x[a] += len * y[a];
                        }
                    }
                    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    Ok(radii)
}

/// Kolmogorov-Smirnov statistic of sorted samples against a continuous
/// CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
