//! The experimental protocol around the learner: dataset profiling, holdout
//! and stratified cross-validation, grid search, the Bayesian sign test,
//! ranks, SERA curves and turning points.

mod bayes;
mod compare;
mod derivcheck;
mod experiment;
mod search;
mod split;
pub mod synthetic;

use serde::{Deserialize, Serialize};

pub use bayes::{bayes_sign_test, compute_prior, BayesPosterior, PosteriorConvention, PRIOR_STRENGTH};
pub use derivcheck::{derivative_check, finite_difference, reference_params, DerivCheckReport};
pub use compare::{rank_models, restricted_sera, turning_point, TurningPoint};
pub use experiment::{
    model_name, run_experiment, write_experiment, BestWorkflow, CvScores, ExperimentOutcome,
    ExperimentRecord, Metric, OosScores,
};
pub use search::{grid_search, CvResult, CvSettings, SearchOutcome, Workflow};
pub use split::{complement, derive_seed, holdout_split, stratified_kfold};

use crate::data::Dataset;
use crate::relevance::{ExtremeType, RelevanceFunction};

/// Size, column mix and imbalance of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub n_rows: usize,
    pub n_nominal: usize,
    pub n_numeric: usize,
    /// Rows with relevance exactly 1.
    pub n_rare: usize,
    /// `n_rare / n_rows * 100`.
    pub ir: f64,
    pub extreme_type: ExtremeType,
}

pub fn profile(dataset: &Dataset, phi: &RelevanceFunction) -> DatasetProfile {
    let n_rows = dataset.n_rows();
    let n_rare = dataset
        .target()
        .iter()
        .filter(|&&y| phi.eval_finite(y) == 1.0)
        .count();
    DatasetProfile {
        n_rows,
        n_nominal: dataset.n_nominal(),
        n_numeric: dataset.n_numeric(),
        n_rare,
        ir: n_rare as f64 / n_rows as f64 * 100.0,
        extreme_type: phi.extreme_type(),
    }
}
