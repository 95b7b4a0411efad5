//! Squared Error Relevance Area and its derivatives.
//!
//! `SER_t` is the sum of squared errors over the instances whose target
//! relevance is at least `t`; SERA integrates it over `t` in `[0, 1]`. The
//! integral is approximated by the trapezoidal rule on the cutoffs
//! `t_k = k / T`, which reduces to a weighted squared error with per-instance
//! weights `w_j = (1 + 2 n_j + [phi_j >= t_T]) / T`, where `n_j` counts the
//! interior cutoffs the instance clears. The weights depend only on the
//! targets, so the gradient is `w_j (yhat_j - y_j)` and the Hessian is `w_j`.

use serde::{Deserialize, Serialize};

use crate::error::{check_same_len, Error, Result};

pub const DEFAULT_STEPS: usize = 1000;

/// Uniform cutoff grid `t_k = k / T`, `k = 0..=T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceGrid {
    steps: usize,
}

impl Default for RelevanceGrid {
    fn default() -> Self {
        RelevanceGrid {
            steps: DEFAULT_STEPS,
        }
    }
}

impl RelevanceGrid {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("relevance grid needs at least one interval"));
        }
        Ok(RelevanceGrid { steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn cutoff(&self, k: usize) -> f64 {
        k as f64 / self.steps as f64
    }

    pub fn cutoffs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.cutoff(k))
    }

    /// Number of interior cutoffs `t_1..t_{T-1}` with `t_k <= relevance`.
    pub fn interior_count(&self, relevance: f64) -> usize {
        if self.steps < 2 {
            return 0;
        }
        let last = self.steps - 1;
        let mut k = ((relevance * self.steps as f64).floor().max(0.0) as usize).min(last);
        // Settle the estimate against the exact cutoff values.
        while k > 0 && self.cutoff(k) > relevance {
            k -= 1;
        }
        while k < last && self.cutoff(k + 1) <= relevance {
            k += 1;
        }
        k
    }
}

/// Per-instance trapezoid weights for a fixed set of target relevances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeraWeights {
    pub weights: Vec<f64>,
    pub relevances: Vec<f64>,
    pub n_counts: Vec<usize>,
    pub steps: usize,
}

impl SeraWeights {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights restricted to the given rows, in that order.
    pub fn select(&self, rows: &[usize]) -> SeraWeights {
        SeraWeights {
            weights: rows.iter().map(|&i| self.weights[i]).collect(),
            relevances: rows.iter().map(|&i| self.relevances[i]).collect(),
            n_counts: rows.iter().map(|&i| self.n_counts[i]).collect(),
            steps: self.steps,
        }
    }
}

/// A sampled `SER_t` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub ser: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeraCurve {
    pub points: Vec<CurvePoint>,
}

fn check_inputs(y: &[f64], y_hat: &[f64], relevances: &[f64]) -> Result<()> {
    check_same_len("targets and predictions", y.len(), y_hat.len())?;
    check_same_len("targets and relevances", y.len(), relevances.len())
}

fn check_relevances(relevances: &[f64]) -> Result<()> {
    match relevances.iter().position(|r| !(0.0..=1.0).contains(r)) {
        Some(i) => Err(Error::invalid(format!(
            "relevance {} at index {i} outside [0, 1]",
            relevances[i]
        ))),
        None => Ok(()),
    }
}

fn ser_unchecked(y: &[f64], y_hat: &[f64], relevances: &[f64], t: f64) -> f64 {
    y.iter()
        .zip(y_hat)
        .zip(relevances)
        .filter(|(_, &phi)| phi >= t)
        .map(|((&yi, &pi), _)| (pi - yi) * (pi - yi))
        .sum()
}

/// Sum of squared errors over instances with relevance `>= t`.
pub fn ser_t(y: &[f64], y_hat: &[f64], relevances: &[f64], t: f64) -> Result<f64> {
    check_inputs(y, y_hat, relevances)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("cutoff {t} outside [0, 1]")));
    }
    Ok(ser_unchecked(y, y_hat, relevances, t))
}

/// SERA by the composite trapezoidal rule over the grid cutoffs.
///
/// Evaluates every `SER_{t_k}` explicitly, so the cost is `O(T * N)`.
pub fn sera_trapezoid(
    y: &[f64],
    y_hat: &[f64],
    relevances: &[f64],
    grid: RelevanceGrid,
) -> Result<f64> {
    check_inputs(y, y_hat, relevances)?;
    let t = grid.steps();
    let ends = ser_unchecked(y, y_hat, relevances, grid.cutoff(0))
        + ser_unchecked(y, y_hat, relevances, grid.cutoff(t));
    let interior: f64 = (1..t)
        .map(|k| ser_unchecked(y, y_hat, relevances, grid.cutoff(k)))
        .sum();
    Ok((interior + 0.5 * ends) / t as f64)
}

/// Exact SERA, `sum_i phi_i (yhat_i - y_i)^2`, since the indicator
/// `[phi_i >= t]` integrates to `phi_i` over `[0, 1]`.
pub fn sera_analytic(y: &[f64], y_hat: &[f64], relevances: &[f64]) -> Result<f64> {
    check_inputs(y, y_hat, relevances)?;
    Ok(y.iter()
        .zip(y_hat)
        .zip(relevances)
        .map(|((&yi, &pi), &phi)| phi * (pi - yi) * (pi - yi))
        .sum())
}

pub fn sera_weights(relevances: &[f64], grid: RelevanceGrid) -> Result<SeraWeights> {
    check_relevances(relevances)?;
    let t = grid.steps();
    let top = grid.cutoff(t);
    let n_counts: Vec<usize> = relevances.iter().map(|&r| grid.interior_count(r)).collect();
    let weights = relevances
        .iter()
        .zip(&n_counts)
        .map(|(&r, &n)| {
            let end = if r >= top { 1.0 } else { 0.0 };
            (1.0 + 2.0 * n as f64 + end) / t as f64
        })
        .collect();
    Ok(SeraWeights {
        weights,
        relevances: relevances.to_vec(),
        n_counts,
        steps: t,
    })
}

/// Trapezoidal SERA through the weights: `0.5 * sum_j w_j r_j^2`.
pub fn sera_from_weights(y: &[f64], y_hat: &[f64], weights: &SeraWeights) -> Result<f64> {
    check_same_len("targets and predictions", y.len(), y_hat.len())?;
    check_same_len("targets and weights", y.len(), weights.len())?;
    Ok(0.5
        * y.iter()
            .zip(y_hat)
            .zip(&weights.weights)
            .map(|((&yi, &pi), &w)| w * (pi - yi) * (pi - yi))
            .sum::<f64>())
}

pub fn sera_gradient(y: &[f64], y_hat: &[f64], weights: &SeraWeights) -> Result<Vec<f64>> {
    check_same_len("targets and predictions", y.len(), y_hat.len())?;
    check_same_len("targets and weights", y.len(), weights.len())?;
    Ok(y.iter()
        .zip(y_hat)
        .zip(&weights.weights)
        .map(|((&yi, &pi), &w)| w * (pi - yi))
        .collect())
}

pub fn sera_hessian(weights: &SeraWeights) -> Vec<f64> {
    weights.weights.clone()
}

/// Gradient of SERA by applying the trapezoidal rule directly to
/// `2 * integral of (yhat_j - y_j) [phi_j >= t] dt`, one cutoff at a time.
pub fn sera_gradient_direct(
    y: &[f64],
    y_hat: &[f64],
    relevances: &[f64],
    grid: RelevanceGrid,
) -> Result<Vec<f64>> {
    check_inputs(y, y_hat, relevances)?;
    Ok(y.iter()
        .zip(y_hat)
        .zip(relevances)
        .map(|((&yi, &pi), &phi)| 2.0 * trapezoid_gated(pi - yi, phi, grid))
        .collect())
}

/// Second derivative by the trapezoidal rule on `2 * integral of [phi_j >= t] dt`.
pub fn sera_hessian_direct(relevances: &[f64], grid: RelevanceGrid) -> Result<Vec<f64>> {
    check_relevances(relevances)?;
    Ok(relevances
        .iter()
        .map(|&phi| 2.0 * trapezoid_gated(1.0, phi, grid))
        .collect())
}

fn trapezoid_gated(value: f64, phi: f64, grid: RelevanceGrid) -> f64 {
    let t = grid.steps();
    let gate = |k: usize| if phi >= grid.cutoff(k) { value } else { 0.0 };
    let interior: f64 = (1..t).map(gate).sum();
    (0.5 * gate(0) + interior + 0.5 * gate(t)) / t as f64
}

pub fn sera_curve(
    y: &[f64],
    y_hat: &[f64],
    relevances: &[f64],
    grid: RelevanceGrid,
) -> Result<SeraCurve> {
    check_inputs(y, y_hat, relevances)?;
    let points = grid
        .cutoffs()
        .map(|t| CurvePoint {
            t,
            ser: ser_unchecked(y, y_hat, relevances, t),
        })
        .collect();
    Ok(SeraCurve { points })
}

/// Mean squared error.
pub fn mse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_same_len("targets and predictions", y.len(), y_hat.len())?;
    if y.is_empty() {
        return Err(Error::invalid("mean squared error of an empty sample"));
    }
    let sse: f64 = y.iter().zip(y_hat).map(|(a, b)| (b - a) * (b - a)).sum();
    Ok(sse / y.len() as f64)
}
