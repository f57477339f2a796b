//! Seeded, schedule-independent Monte Carlo plumbing.
//!
//! Every trial owns a ChaCha stream selected by its index, and results are
//! collected in trial order before any reduction, so estimates depend only
//! on `(inputs, seed)` and not on the number of worker threads.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Generator for trial `trial` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Seed for a sub-experiment, e.g. one sample size of a sweep.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multinomial atom counts of an i.i.d. sample of size `n`.
pub struct CountSampler {
    index: WeightedIndex<f64>,
    atoms: usize,
}

impl CountSampler {
    pub fn new(weights: &[f64]) -> Result<CountSampler> {
        let index = WeightedIndex::new(weights).map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Ok(CountSampler { index, atoms: weights.len() })
    }

    pub fn counts<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<u32> {
        let mut c = vec![0u32; self.atoms];
        for _ in 0..n {
            c[self.index.sample(rng)] += 1;
        }
        c
    }

    /// Empirical weights `c_i / n`.
    pub fn frequencies<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        self.counts(rng, n).into_iter().map(|c| c as f64 / n as f64).collect()
    }
}

/// Runs `trials` independent trials in parallel, returning results in trial order.
pub fn run_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    (0..trials).into_par_iter().map(&f).collect()
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}
