//! Synthetic benchmark with a right-skewed target.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;

/// `n` rows of five standard-normal features and a log-normal target
/// `y = exp(f(x) + noise)` where every feature enters `f`.
pub fn lognormal_benchmark(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, 0.25).expect("noise normal");
    let mut features = Vec::with_capacity(5 * n);
    let mut target = Vec::with_capacity(n);
    for _ in 0..n {
        let x: [f64; 5] = std::array::from_fn(|_| std.sample(&mut rng));
        let signal = 0.5 * x[0] + 0.3 * x[1] - 0.25 * x[2] + 0.2 * x[3] * x[4] + 0.15 * (2.0 * x[4]).sin();
        features.extend_from_slice(&x);
        target.push((signal + noise.sample(&mut rng)).exp());
    }
    let names = (1..=5).map(|i| format!("x{i}")).collect();
    Dataset::new(features, 5, target, names).expect("finite synthetic data")
}
