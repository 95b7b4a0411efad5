//! Normalised score differences and the Bayesian sign test.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{check_same_len, Error, Result};

/// Prior strength of the pseudo-observation placed at zero.
pub const PRIOR_STRENGTH: f64 = 0.5;

/// Mean over folds of `(S_k - M_k) / M_k`. Negative values favour `S`.
pub fn compute_prior(scores_s: &[f64], scores_m: &[f64]) -> Result<f64> {
    check_same_len("fold score vectors", scores_s.len(), scores_m.len())?;
    if scores_s.is_empty() {
        return Err(Error::invalid("no fold scores"));
    }
    if let Some(k) = scores_m.iter().position(|&m| m == 0.0) {
        return Err(Error::DegenerateScore(format!("reference score of fold {k} is zero")));
    }
    let total: f64 = scores_s
        .iter()
        .zip(scores_m)
        .map(|(s, m)| (s - m) / m)
        .sum();
    Ok(total / scores_s.len() as f64)
}

/// How posterior draws are summarised into region probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorConvention {
    /// Fraction of draws in which a region carries the largest mass.
    #[default]
    Winner,
    /// Average mass of each region over the draws.
    MeanMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesPosterior {
    /// Probability that the difference is below `-rope_radius`.
    pub p_left: f64,
    pub p_rope: f64,
    pub p_right: f64,
    pub rope_radius: f64,
    pub n_samples: usize,
    pub convention: PosteriorConvention,
}

/// Bayesian sign test with a Dirichlet-process prior.
///
/// The observations are augmented with a pseudo-observation at zero of
/// strength [`PRIOR_STRENGTH`]. Each draw samples weights from
/// `Dirichlet(s, 1, ..., 1)` and sums them by region: left of
/// `-rope_radius`, inside `[-rope_radius, rope_radius]`, or right of it.
pub fn bayes_sign_test(
    z: &[f64],
    rope_radius: f64,
    n_samples: usize,
    seed: u64,
    convention: PosteriorConvention,
) -> Result<BayesPosterior> {
    if z.is_empty() {
        return Err(Error::invalid("sign test needs at least one observation"));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sign test observations must be finite"));
    }
    if !(rope_radius >= 0.0 && rope_radius.is_finite()) {
        return Err(Error::invalid("rope radius must be finite and >= 0"));
    }
    if n_samples < 10_000 {
        return Err(Error::invalid(format!("need at least 10000 posterior draws, got {n_samples}")));
    }
    // 0 = left, 1 = rope, 2 = right
    let region: Vec<usize> = z
        .iter()
        .map(|&v| {
            if v < -rope_radius {
                0
            } else if v > rope_radius {
                2
            } else {
                1
            }
        })
        .collect();

    let prior = Gamma::new(PRIOR_STRENGTH, 1.0).expect("valid gamma shape");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = [0.0f64; 3];
    for _ in 0..n_samples {
        let mut mass = [0.0f64; 3];
        mass[1] = prior.sample(&mut rng);
        for &r in &region {
            let g: f64 = Exp1.sample(&mut rng);
            mass[r] += g;
        }
        let total = mass[0] + mass[1] + mass[2];
        match convention {
            PosteriorConvention::MeanMass => {
                for (a, m) in acc.iter_mut().zip(mass) {
                    *a += m / total;
                }
            }
            PosteriorConvention::Winner => {
                let mut best = 0;
                for r in 1..3 {
                    if mass[r] > mass[best] {
                        best = r;
                    }
                }
                acc[best] += 1.0;
            }
        }
    }
    let norm = acc[0] + acc[1] + acc[2];
    Ok(BayesPosterior {
        p_left: acc[0] / norm,
        p_rope: acc[1] / norm,
        p_right: acc[2] / norm,
        rope_radius,
        n_samples,
        convention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_examples() {
        let m = [2.0; 10];
        assert_eq!(compute_prior(&m, &m).unwrap(), 0.0);
        let half: Vec<f64> = m.iter().map(|v| v * 0.5).collect();
        assert_eq!(compute_prior(&half, &m).unwrap(), -0.5);
        let s: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!((compute_prior(&s, &m).unwrap() - 1.75).abs() < 1e-15);
    }

    #[test]
    fn prior_degenerate_reference() {
        let mut m = [1.0; 10];
        m[3] = 0.0;
        assert!(matches!(compute_prior(&[1.0; 10], &m), Err(Error::DegenerateScore(_))));
        assert!(compute_prior(&[1.0; 9], &[1.0; 10]).is_err());
    }

    #[test]
    fn sign_convention() {
        // S better in every fold -> negative prior.
        let m = [4.0, 5.0, 6.0];
        let s = [3.0, 4.5, 5.0];
        assert!(compute_prior(&s, &m).unwrap() < 0.0);
        assert!(compute_prior(&m, &s).unwrap() > 0.0);
    }

    #[test]
    fn mean_mass_of_all_left() {
        let p = bayes_sign_test(&[-0.5; 36], 0.01, 20_000, 1, PosteriorConvention::MeanMass).unwrap();
        // E[left mass] = 36 / 36.5
        assert!((p.p_left - 36.0 / 36.5).abs() < 2e-3);
        assert!((p.p_left + p.p_rope + p.p_right - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_observations() {
        let z: Vec<f64> = (0..36).map(|i| if i < 24 { -0.1 } else if i < 30 { 0.0 } else { 0.2 }).collect();
        let p = bayes_sign_test(&z, 0.01, 20_000, 3, PosteriorConvention::Winner).unwrap();
        assert!(p.p_left > p.p_right && p.p_left > p.p_rope);
        assert!(p.p_left < 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bayes_sign_test(&[], 0.01, 20_000, 0, PosteriorConvention::Winner).is_err());
        assert!(bayes_sign_test(&[0.1], 0.01, 100, 0, PosteriorConvention::Winner).is_err());
    }
}
