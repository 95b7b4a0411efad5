//! Agreement and cost of the closed-form SERA derivatives against the
//! trapezoidal rule applied directly, and against finite differences.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boosting::{fit, Hyperparams, Objective};
use crate::data::Dataset;
use crate::error::Result;
use crate::relevance::{build_relevance, ExtremeType};
use crate::sera::{self, RelevanceGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivCheckReport {
    pub n_rows: usize,
    pub steps: usize,
    pub grad_mean_abs_diff: f64,
    pub grad_max_abs_diff: f64,
    pub hess_mean_abs_diff: f64,
    pub hess_max_abs_diff: f64,
    /// Instances probed by finite differences.
    pub fd_instances: usize,
    pub fd_grad_max_rel_err: f64,
    pub fd_hess_max_abs_err: f64,
    pub time_closed_form_s: f64,
    pub time_direct_s: f64,
}

/// Model used to produce realistic predictions for the comparison.
pub fn reference_params() -> Hyperparams {
    Hyperparams::new(100, 3, 0.1)
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn mean_max_abs(a: &[f64], b: &[f64]) -> (f64, f64) {
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    let (sum, max) = diffs.fold((0.0, 0.0f64), |(s, m), d| (s + d, m.max(d)));
    (sum / a.len() as f64, max)
}

/// Central differences of the trapezoidal SERA in prediction `j`.
pub fn finite_difference(
    y: &[f64],
    y_hat: &[f64],
    relevances: &[f64],
    grid: RelevanceGrid,
    j: usize,
) -> Result<(f64, f64)> {
    let mut p = y_hat.to_vec();
    let at = |delta: f64, p: &mut Vec<f64>| {
        p[j] = y_hat[j] + delta;
        sera::sera_trapezoid(y, p, relevances, grid)
    };
    // SERA is quadratic in each prediction, so central differences carry no
    // truncation error and a wide step keeps cancellation small.
    let h = 1e-3 * y_hat[j].abs().max(1.0);
    let (up, centre, down) = (at(h, &mut p)?, at(0.0, &mut p)?, at(-h, &mut p)?);
    let grad = (up - down) / (2.0 * h);
    let hess = (up - 2.0 * centre + down) / (h * h);
    Ok((grad, hess))
}

/// Fits a SERA-objective model, then compares derivative routes on its
/// training predictions. Up to `fd_probes` evenly spaced instances are also
/// checked by finite differences.
pub fn derivative_check(
    dataset: &Dataset,
    type_override: Option<ExtremeType>,
    grid: RelevanceGrid,
    seed: u64,
    fd_probes: usize,
) -> Result<DerivCheckReport> {
    let y = dataset.target();
    let phi = build_relevance(y, type_override)?;
    let relevances = phi.evaluate_all(y)?;
    let objective = Objective::sera(&relevances, grid)?;
    let model = fit(dataset, &objective, &reference_params(), seed)?;
    let y_hat = model.predict_dataset(dataset)?;

    let start = Instant::now();
    let weights = sera::sera_weights(&relevances, grid)?;
    let grad = sera::sera_gradient(y, &y_hat, &weights)?;
    let hess = sera::sera_hessian(&weights);
    let time_closed_form_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let grad_direct = sera::sera_gradient_direct(y, &y_hat, &relevances, grid)?;
    let hess_direct = sera::sera_hessian_direct(&relevances, grid)?;
    let time_direct_s = start.elapsed().as_secs_f64();

    let (grad_mean_abs_diff, grad_max_abs_diff) = mean_max_abs(&grad, &grad_direct);
    let (hess_mean_abs_diff, hess_max_abs_diff) = mean_max_abs(&hess, &hess_direct);

    let n = y.len();
    let probes = fd_probes.min(n);
    let mut fd_grad_max_rel_err = 0.0f64;
    let mut fd_hess_max_abs_err = 0.0f64;
    for i in 0..probes {
        let j = i * n / probes;
        let (g, h) = finite_difference(y, &y_hat, &relevances, grid, j)?;
        fd_grad_max_rel_err = fd_grad_max_rel_err.max((g - grad[j]).abs() / grad[j].abs().max(f64::MIN_POSITIVE));
        fd_hess_max_abs_err = fd_hess_max_abs_err.max((h - hess[j]).abs());
    }

    Ok(DerivCheckReport {
        n_rows: n,
        steps: grid.steps(),
        grad_mean_abs_diff,
        grad_max_abs_diff,
        hess_mean_abs_diff,
        hess_max_abs_diff,
        fd_instances: probes,
        fd_grad_max_rel_err,
        fd_hess_max_abs_err,
        time_closed_form_s: round3(time_closed_form_s),
        time_direct_s: round3(time_direct_s),
    })
}
