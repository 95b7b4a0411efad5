use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_len, Error, Result};
use crate::sera::{self, RelevanceGrid, SeraWeights};

/// Tag of the built-in objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Mse,
    Sera,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Mse => "mse",
            ObjectiveKind::Sera => "sera",
        })
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(ObjectiveKind::Mse),
            "sera" => Ok(ObjectiveKind::Sera),
            other => Err(Error::invalid(format!("unknown objective `{other}`"))),
        }
    }
}

/// A twice-differentiable training loss, supplied to the learner as
/// per-instance gradients and Hessians.
///
/// The tree learner only ever sees what this trait returns, so any loss can
/// be plugged in.
pub trait TrainingObjective: Send + Sync {
    /// Short tag stored in the fitted model.
    fn tag(&self) -> &str;

    /// Constant prediction the ensemble starts from.
    fn base_score(&self, y: &[f64]) -> Result<f64>;

    /// Fills `grad` and `hess` with the derivatives of the loss with respect
    /// to each prediction.
    fn grad_hess(&self, y: &[f64], y_hat: &[f64], grad: &mut [f64], hess: &mut [f64]) -> Result<()>;

    /// Loss value whose derivatives `grad_hess` returns.
    fn loss(&self, y: &[f64], y_hat: &[f64]) -> Result<f64>;
}

/// Squared error or SERA.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Mse,
    Sera(SeraWeights),
}

impl Objective {
    /// SERA objective for a training set with the given target relevances.
    pub fn sera(relevances: &[f64], grid: RelevanceGrid) -> Result<Self> {
        Ok(Objective::Sera(sera::sera_weights(relevances, grid)?))
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Objective::Mse => ObjectiveKind::Mse,
            Objective::Sera(_) => ObjectiveKind::Sera,
        }
    }

    fn check_aligned(&self, n: usize) -> Result<()> {
        match self {
            Objective::Sera(w) if w.len() != n => Err(Error::invalid(format!(
                "SERA weights cover {} instances but the data has {n}",
                w.len()
            ))),
            _ => Ok(()),
        }
    }
}

impl TrainingObjective for Objective {
    fn tag(&self) -> &str {
        match self {
            Objective::Mse => "mse",
            Objective::Sera(_) => "sera",
        }
    }

    fn base_score(&self, y: &[f64]) -> Result<f64> {
        base_score_for(self, y)
    }

    fn grad_hess(&self, y: &[f64], y_hat: &[f64], grad: &mut [f64], hess: &mut [f64]) -> Result<()> {
        check_same_len("targets and predictions", y.len(), y_hat.len())?;
        check_same_len("targets and gradient buffer", y.len(), grad.len())?;
        check_same_len("targets and hessian buffer", y.len(), hess.len())?;
        self.check_aligned(y.len())?;
        match self {
            Objective::Mse => {
                for i in 0..y.len() {
                    grad[i] = y_hat[i] - y[i];
                    hess[i] = 1.0;
                }
            }
            Objective::Sera(w) => {
                for (i, &wi) in w.weights.iter().enumerate() {
                    grad[i] = wi * (y_hat[i] - y[i]);
                    hess[i] = wi;
                }
            }
        }
        Ok(())
    }

    fn loss(&self, y: &[f64], y_hat: &[f64]) -> Result<f64> {
        check_same_len("targets and predictions", y.len(), y_hat.len())?;
        self.check_aligned(y.len())?;
        match self {
            Objective::Mse => Ok(0.5 * y.iter().zip(y_hat).map(|(a, b)| (b - a) * (b - a)).sum::<f64>()),
            Objective::Sera(w) => sera::sera_from_weights(y, y_hat, w),
        }
    }
}

/// Gradients and Hessians of a built-in objective at `y_hat`.
pub fn grad_hess(objective: &Objective, y: &[f64], y_hat: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut g = vec![0.0; y.len()];
    let mut h = vec![0.0; y.len()];
    objective.grad_hess(y, y_hat, &mut g, &mut h)?;
    Ok((g, h))
}

/// The constant minimising the objective: the mean for squared error, the
/// weight-averaged target for SERA.
pub fn base_score_for(objective: &Objective, y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::invalid("base score of an empty target"));
    }
    objective.check_aligned(y.len())?;
    match objective {
        Objective::Mse => Ok(y.iter().sum::<f64>() / y.len() as f64),
        Objective::Sera(w) => {
            let num: f64 = w.weights.iter().zip(y).map(|(w, y)| w * y).sum();
            let den: f64 = w.weights.iter().sum();
            Ok(num / den)
        }
    }
}
