//! Second-order gradient boosting of regression trees.
//!
//! Each round computes per-instance gradients `g` and Hessians `h` of the
//! objective at the current predictions and grows a tree by exact greedy
//! search. A split is scored by
//! `0.5 * (G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)) - gamma`
//! and a leaf takes the Newton step `-G / (H + lambda)`, shrunk by `eta`.

mod objective;
mod tree;

use serde::{Deserialize, Serialize};

pub use objective::{base_score_for, grad_hess, Objective, ObjectiveKind, TrainingObjective};
pub use tree::{RegressionTree, TreeNode};

use crate::data::Dataset;
use crate::error::{Error, Result};
use tree::{grow_tree, SortedColumns, SplitRules};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub nrounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_min_child_weight")]
    pub min_child_weight: f64,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_min_child_weight() -> f64 {
    1e-6
}

impl Hyperparams {
    /// Tuned parameters with `lambda = 1`, `gamma = 0` and
    /// `min_child_weight = 1e-6`.
    pub fn new(nrounds: usize, max_depth: usize, eta: f64) -> Self {
        Hyperparams {
            nrounds,
            max_depth,
            eta,
            lambda: default_lambda(),
            gamma: 0.0,
            min_child_weight: default_min_child_weight(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nrounds == 0 {
            return Err(Error::invalid("nrounds must be positive"));
        }
        if self.max_depth == 0 {
            return Err(Error::invalid("max_depth must be positive"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid(format!("eta {} outside (0, 1]", self.eta)));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// The tuning grid `nrounds x max_depth x eta` =
    /// `{250, 500} x {3, 5, 7} x {0.001, 0.01, 0.1}`.
    pub fn default_grid() -> Vec<Hyperparams> {
        let mut grid = Vec::with_capacity(18);
        for nrounds in [250, 500] {
            for max_depth in [3, 5, 7] {
                for eta in [1e-3, 1e-2, 1e-1] {
                    grid.push(Hyperparams::new(nrounds, max_depth, eta));
                }
            }
        }
        grid
    }
}

/// Additive tree ensemble: `base_score + eta * sum(tree outputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub base_score: f64,
    pub eta: f64,
    pub objective: String,
    pub feature_names: Vec<String>,
    pub trees: Vec<RegressionTree>,
}

impl GbmModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + self.eta * t.predict_row(row))
    }

    /// Predictions for a row-major matrix with `n_cols` columns.
    pub fn predict(&self, features: &[f64], n_cols: usize) -> Result<Vec<f64>> {
        if n_cols != self.feature_names.len() {
            return Err(Error::invalid(format!(
                "model expects {} features, got {n_cols}",
                self.feature_names.len()
            )));
        }
        if features.len() % n_cols != 0 {
            return Err(Error::invalid("feature matrix length is not a multiple of the column count"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature matrix contains non-finite values"));
        }
        Ok(features.chunks_exact(n_cols).map(|r| self.predict_row(r)).collect())
    }

    /// Predictions for a dataset whose columns must match the training schema.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.feature_names() != self.feature_names.as_slice() {
            return Err(Error::invalid("dataset columns do not match the model's training schema"));
        }
        self.predict(data.features(), data.n_cols())
    }

    /// The ensemble after its first `rounds` trees. Boosting is
    /// deterministic, so this equals a fit with `nrounds = rounds`.
    pub fn truncated(&self, rounds: usize) -> GbmModel {
        GbmModel {
            trees: self.trees[..rounds.min(self.trees.len())].to_vec(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// By-products of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    /// Objective loss before the first round and after each round.
    pub loss: Vec<f64>,
    /// Training predictions accumulated during boosting.
    pub train_predictions: Vec<f64>,
}

/// Fits a boosted ensemble. `seed` is accepted for reproducibility contracts;
/// the learner has no stochastic step, so identical inputs always give an
/// identical model.
pub fn fit(
    train: &Dataset,
    objective: &dyn TrainingObjective,
    params: &Hyperparams,
    seed: u64,
) -> Result<GbmModel> {
    fit_traced(train, objective, params, seed).map(|(m, _)| m)
}

pub fn fit_traced(
    train: &Dataset,
    objective: &dyn TrainingObjective,
    params: &Hyperparams,
    _seed: u64,
) -> Result<(GbmModel, FitTrace)> {
    params.validate()?;
    let n = train.n_rows();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 training rows, got {n}")));
    }
    let y = train.target();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite training target"));
    }

    let base_score = objective.base_score(y)?;
    let rules = SplitRules {
        max_depth: params.max_depth,
        lambda: params.lambda,
        gamma: params.gamma,
        min_child_weight: params.min_child_weight,
    };
    let columns = SortedColumns::new(train.features(), n, train.n_cols());
    let mut preds = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut leaf_of = vec![0usize; n];
    let mut trees = Vec::with_capacity(params.nrounds);
    let mut loss = Vec::with_capacity(params.nrounds + 1);
    loss.push(objective.loss(y, &preds)?);

    for _ in 0..params.nrounds {
        objective.grad_hess(y, &preds, &mut grad, &mut hess)?;
        let tree = grow_tree(&columns, &grad, &hess, rules, &mut leaf_of);
        for (p, &leaf) in preds.iter_mut().zip(&leaf_of) {
            if let TreeNode::Leaf { value } = tree.nodes[leaf] {
                *p += params.eta * value;
            }
        }
        trees.push(tree);
        loss.push(objective.loss(y, &preds)?);
    }

    let model = GbmModel {
        base_score,
        eta: params.eta,
        objective: objective.tag().to_owned(),
        feature_names: train.feature_names().to_vec(),
        trees,
    };
    Ok((
        model,
        FitTrace {
            loss,
            train_predictions: preds,
        },
    ))
}
