//! Holdout and relevance-stratified k-fold partitions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mixes a base seed with cell coordinates (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(31);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded random partition into `ceil(train_fraction * n)` training rows and
/// the rest. Both index lists are returned in ascending order.
pub fn holdout_split(
    n_rows: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_rows < 5 {
        return Err(Error::invalid(format!("holdout split needs at least 5 rows, got {n_rows}")));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    // Guard against 0.8 * 10 landing a hair above 8.
    let n_train = ((train_fraction * n_rows as f64) - 1e-9).ceil() as usize;
    let n_train = n_train.clamp(1, n_rows - 1);
    let mut idx: Vec<usize> = (0..n_rows).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits rows into `k` folds balanced on relevance: rows are shuffled, stably
/// sorted by relevance, and dealt round-robin. Each fold lists positions into
/// `relevances` in ascending order.
pub fn stratified_kfold(relevances: &[f64], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = relevances.len();
    if k < 2 {
        return Err(Error::invalid("k-fold needs k >= 2"));
    }
    if n < k {
        return Err(Error::invalid(format!("{n} rows cannot fill {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.sort_by(|&a, &b| relevances[a].total_cmp(&relevances[b]));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, &row) in idx.iter().enumerate() {
        folds[pos % k].push(row);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Rows outside fold `f`.
pub fn complement(folds: &[Vec<usize>], f: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != f)
        .flat_map(|(_, rows)| rows.iter().copied())
        .collect();
    rows.sort_unstable();
    rows
}
