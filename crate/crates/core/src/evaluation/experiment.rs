//! End-to-end protocol: profile, holdout, tuning, refit, out-of-sample
//! scoring, SERA curves and the turning point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boosting::{fit, Hyperparams, Objective, ObjectiveKind};
use crate::config::ExperimentConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::bayes::compute_prior;
use crate::evaluation::compare::{turning_point, TurningPoint};
use crate::evaluation::search::{grid_search, CvResult, CvSettings};
use crate::evaluation::split::{derive_seed, holdout_split};
use crate::evaluation::{profile, DatasetProfile};
use crate::output::PredictionRow;
use crate::relevance::{build_relevance, RelevanceFunction};
use crate::sera::{self, SeraCurve};

/// Fold scores of the selected workflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScores {
    pub sera: Vec<f64>,
    pub mse: Vec<f64>,
    pub mean_sera: f64,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestWorkflow {
    pub model: String,
    pub params: Hyperparams,
    pub cv_scores: CvScores,
}

impl From<&CvResult> for BestWorkflow {
    fn from(r: &CvResult) -> Self {
        BestWorkflow {
            model: r.workflow.model_tag.clone(),
            params: r.workflow.params,
            cv_scores: CvScores {
                sera: r.fold_scores_sera.clone(),
                mse: r.fold_scores_mse.clone(),
                mean_sera: r.mean_sera,
                mean_mse: r.mean_mse,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OosScores {
    pub mse: f64,
    pub sera: f64,
}

/// Everything a run reports, keyed by objective (`best`) or model name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub seed: u64,
    pub profile: DatasetProfile,
    /// Relevance function fitted on the training partition.
    pub relevance: RelevanceFunction,
    pub steps: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub best: BTreeMap<String, BestWorkflow>,
    pub oos: BTreeMap<String, OosScores>,
    pub curves: BTreeMap<String, String>,
    pub predictions: BTreeMap<String, String>,
    pub turning_point: Option<TurningPoint>,
}

/// Score that the normalised-difference prior is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sera,
    Mse,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sera" => Ok(Metric::Sera),
            "mse" => Ok(Metric::Mse),
            other => Err(Error::invalid(format!("unknown metric `{other}`"))),
        }
    }
}

impl ExperimentRecord {
    /// Normalised fold-score difference of the SERA-optimised workflow
    /// against the MSE-optimised one.
    pub fn prior(&self, metric: Metric) -> Result<f64> {
        let get = |kind: ObjectiveKind| {
            self.best.get(&kind.to_string()).ok_or_else(|| {
                Error::invalid(format!("record `{}` has no {kind} workflow", self.dataset))
            })
        };
        let (s, m) = (get(ObjectiveKind::Sera)?, get(ObjectiveKind::Mse)?);
        match metric {
            Metric::Sera => compute_prior(&s.cv_scores.sera, &m.cv_scores.sera),
            Metric::Mse => compute_prior(&s.cv_scores.mse, &m.cv_scores.mse),
        }
    }
}

pub fn model_name(kind: ObjectiveKind) -> String {
    format!("gbm_{kind}")
}

/// A finished run: the record plus the data behind its file references.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub record: ExperimentRecord,
    pub predictions: BTreeMap<String, Vec<PredictionRow>>,
    pub curves: BTreeMap<String, SeraCurve>,
}

pub fn run_experiment(dataset: &Dataset, name: &str, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let grid = config.relevance_grid()?;
    let seed = config.seed;

    let full_phi = build_relevance(dataset.target(), config.extreme_type_override)
        .map_err(|e| e.in_stage("profile"))?;
    let profile = profile(dataset, &full_phi);

    let (train_rows, test_rows) =
        holdout_split(dataset.n_rows(), config.train_fraction, seed).map_err(|e| e.in_stage("holdout"))?;
    let train = dataset.subset(&train_rows);
    let test = dataset.subset(&test_rows);

    let phi = build_relevance(train.target(), config.extreme_type_override)
        .map_err(|e| e.in_stage("relevance"))?;
    let train_rel = phi.evaluate_all(train.target())?;
    let test_rel = phi.evaluate_all(test.target())?;

    let settings = CvSettings {
        folds: config.folds,
        grid,
        threads: config.threads,
    };

    let mut best = BTreeMap::new();
    let mut oos = BTreeMap::new();
    let mut curves = BTreeMap::new();
    let mut curve_files = BTreeMap::new();
    let mut predictions = BTreeMap::new();
    let mut prediction_files = BTreeMap::new();
    let mut test_preds: BTreeMap<ObjectiveKind, Vec<f64>> = BTreeMap::new();

    let mut objectives = config.objectives.clone();
    objectives.sort();
    objectives.dedup();
    for (i, &kind) in objectives.iter().enumerate() {
        let model = model_name(kind);
        let search = grid_search(&train, &model, kind, &config.grid, &phi, &settings, seed)
            .map_err(|e| e.in_stage(if kind == ObjectiveKind::Mse { "grid search (mse)" } else { "grid search (sera)" }))?;

        let objective = match kind {
            ObjectiveKind::Mse => Objective::Mse,
            ObjectiveKind::Sera => Objective::sera(&train_rel, grid)?,
        };
        let fitted = fit(&train, &objective, &search.best.workflow.params, derive_seed(seed, u64::MAX, i as u64))
            .map_err(|e| e.in_stage("refit"))?;
        let pred = fitted.predict_dataset(&test).map_err(|e| e.in_stage("scoring"))?;
        let scores = OosScores {
            mse: sera::mse(test.target(), &pred)?,
            sera: sera::sera_trapezoid(test.target(), &pred, &test_rel, grid)?,
        };
        let curve = sera::sera_curve(test.target(), &pred, &test_rel, grid)?;

        best.insert(kind.to_string(), BestWorkflow::from(&search.best));
        oos.insert(model.clone(), scores);
        curve_files.insert(model.clone(), format!("curve_{model}.csv"));
        prediction_files.insert(model.clone(), format!("predictions_{model}.csv"));
        curves.insert(model.clone(), curve);
        predictions.insert(
            model.clone(),
            test_rows
                .iter()
                .zip(test.target())
                .zip(&pred)
                .map(|((&row_id, &y), &yhat)| PredictionRow { row_id, y, yhat })
                .collect(),
        );
        test_preds.insert(kind, pred);
    }

    let turning_point = match (test_preds.get(&ObjectiveKind::Sera), test_preds.get(&ObjectiveKind::Mse)) {
        (Some(s), Some(m)) => Some(
            turning_point(test.target(), s, m, &test_rel, grid).map_err(|e| e.in_stage("turning point"))?,
        ),
        _ => None,
    };

    Ok(ExperimentOutcome {
        record: ExperimentRecord {
            dataset: name.to_owned(),
            seed,
            profile,
            relevance: phi,
            steps: grid.steps(),
            n_train: train.n_rows(),
            n_test: test.n_rows(),
            best,
            oos,
            curves: curve_files,
            predictions: prediction_files,
            turning_point,
        },
        predictions,
        curves,
    })
}

/// Writes `experiment.json` plus the prediction and curve files it names.
pub fn write_experiment(outcome: &ExperimentOutcome, dir: &std::path::Path) -> Result<()> {
    use crate::output::{curve_csv, predictions_csv, write_atomic, write_json};
    std::fs::create_dir_all(dir)?;
    for (model, file) in &outcome.record.predictions {
        write_atomic(dir.join(file), predictions_csv(&outcome.predictions[model]).as_bytes())?;
    }
    for (model, file) in &outcome.record.curves {
        write_atomic(dir.join(file), curve_csv(&outcome.curves[model]).as_bytes())?;
    }
    write_json(dir.join("experiment.json"), &outcome.record)
}
