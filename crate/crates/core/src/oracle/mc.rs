//! Monte Carlo reduced predictors and Shapley values under a known law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::law::FeatureLaw;
use crate::error::{Error, Result};
use crate::shapley::GameWeights;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Generator for stream `stream` of the master `seed`. Streams are
/// independent, so results do not depend on how work is scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `E[f(x_S, X_rest) | X_S = x_S]` from `n_mc` conditional draws.
pub fn mc_reduced<F>(f: &F, law: &FeatureLaw, s: &[usize], x: &[f64], n_mc: usize, seed: u64) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    mc_reduced_stream(f, law, s, x, n_mc, seed, 0)
}

fn mc_reduced_stream<F>(
    f: &F,
    law: &FeatureLaw,
    s: &[usize],
    x: &[f64],
    n_mc: usize,
    seed: u64,
    stream: u64,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    if n_mc == 0 {
        return Err(Error::Config("n_mc must be positive".into()));
    }
    if s.len() == law.dim() {
        return Ok(Estimate {
            value: f(x),
            std_error: 0.0,
        });
    }
    let sampler = law.conditional_sampler(s, x)?;
    let mut rng = stream_rng(seed, stream);
    let mut buf = vec![0.0; x.len()];
    // Welford accumulation.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for j in 0..n_mc {
        sampler.sample_into(&mut rng, &mut buf);
        let y = f(&buf);
        let delta = y - mean;
        mean += delta / (j + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = if n_mc > 1 { m2 / (n_mc - 1) as f64 } else { 0.0 };
    Ok(Estimate {
        value: mean,
        std_error: (var / n_mc as f64).sqrt(),
    })
}

/// Monte Carlo value table over player groups, indexed by player bit mask.
/// Subset `mask` uses stream `mask` of `seed`.
pub fn mc_value_table<F>(
    f: &F,
    law: &FeatureLaw,
    players: &[Vec<usize>],
    x: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let p = players.len();
    if p > 20 {
        return Err(Error::TooManyPlayers { players: p, limit: 20 });
    }
    (0..1usize << p)
        .into_par_iter()
        .map(|mask| {
            let mut s: Vec<usize> = (0..p)
                .filter(|i| mask >> i & 1 == 1)
                .flat_map(|i| players[i].iter().copied())
                .collect();
            s.sort_unstable();
            mc_reduced_stream(f, law, &s, x, n_mc, seed, mask as u64)
        })
        .collect()
}

/// Shapley values and their standard errors from a Monte Carlo value table,
/// treating subsets as independent.
pub fn shapley_with_errors(table: &[Estimate]) -> (Vec<f64>, Vec<f64>) {
    let p = table.len().trailing_zeros() as usize;
    let w = GameWeights::new(p);
    let mut phi = vec![0.0; p];
    let mut var = vec![0.0; p];
    for (t, est) in table.iter().enumerate() {
        let size = t.count_ones() as usize;
        for i in 0..p {
            let c = if t >> i & 1 == 1 {
                w.kernel(size - 1)
            } else if size < p {
                -w.kernel(size)
            } else {
                0.0
            };
            phi[i] += c * est.value;
            var[i] += c * c * est.std_error * est.std_error;
        }
    }
    (phi, var.into_iter().map(f64::sqrt).collect())
}

/// Monte Carlo Shapley values with per-player standard errors.
pub fn mc_shapley<F>(
    f: &F,
    law: &FeatureLaw,
    players: &[Vec<usize>],
    x: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let table = mc_value_table(f, law, players, x, n_mc, seed)?;
    Ok(shapley_with_errors(&table))
}
