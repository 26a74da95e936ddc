//! Shared input builders for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use dtr::{HistoryVector, WeightedSample};

/// Random weighted classification samples with signed weights.
pub fn random_samples(n: usize, dim: usize, seed: u64) -> Vec<WeightedSample> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let values: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let signal: f64 = values.iter().sum();
            WeightedSample {
                history: HistoryVector { values, stage: 1 },
                action: if signal + rng.sample::<f64, _>(StandardNormal) > 0.0 {
                    1
                } else {
                    -1
                },
                weight: rng.sample::<f64, _>(StandardNormal),
            }
        })
        .collect()
}

/// Random regression inputs as (columns, response).
pub fn random_regression(n: usize, p: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 1.5 * cols[0][i] - 0.5 * cols[1][i] + rng.sample::<f64, _>(StandardNormal))
        .collect();
    (cols, y)
}
