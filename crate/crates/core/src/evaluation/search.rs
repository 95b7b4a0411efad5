//! Cross-validated grid search over boosting hyperparameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boosting::{fit, Hyperparams, Objective, ObjectiveKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::split::{complement, derive_seed, stratified_kfold};
use crate::relevance::RelevanceFunction;
use crate::sera::{self, RelevanceGrid};

/// A (model, objective, hyperparameters) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub model_tag: String,
    pub objective: ObjectiveKind,
    pub params: Hyperparams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub workflow: Workflow,
    pub fold_scores_sera: Vec<f64>,
    pub fold_scores_mse: Vec<f64>,
    pub mean_sera: f64,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvSettings {
    pub folds: usize,
    pub grid: RelevanceGrid,
    /// Worker threads; 0 evaluates cells sequentially.
    pub threads: usize,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            folds: 10,
            grid: RelevanceGrid::default(),
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: CvResult,
    pub all: Vec<CvResult>,
}

/// Runs `f` over `items` on `threads` workers, keeping input order.
pub(crate) fn map_cells<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    if threads == 0 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Evaluates every workflow by relevance-stratified k-fold cross-validation
/// on `train` and picks the lowest mean SERA.
///
/// Equal means prefer fewer rounds, then shallower trees, then a smaller
/// learning rate, then the earlier grid entry. Every fold fit gets a seed
/// derived from `(seed, workflow, fold)`, so results do not depend on the
/// evaluation order or thread count.
pub fn grid_search(
    train: &Dataset,
    model_tag: &str,
    objective: ObjectiveKind,
    grid: &[Hyperparams],
    phi: &RelevanceFunction,
    settings: &CvSettings,
    seed: u64,
) -> Result<SearchOutcome> {
    if grid.is_empty() {
        return Err(Error::invalid("hyperparameter grid is empty"));
    }
    let y = train.target();
    let relevances = phi.evaluate_all(y)?;
    let folds = stratified_kfold(&relevances, settings.folds, seed)?;
    let weights = sera::sera_weights(&relevances, settings.grid)?;

    // Workflows that differ only in `nrounds` share one fit per fold: the
    // shorter ensembles are prefixes of the longest one.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (w, p) in grid.iter().enumerate() {
        let same = |q: &Hyperparams| Hyperparams { nrounds: p.nrounds, ..*q } == *p;
        match groups.iter_mut().find(|g| same(&grid[g[0]])) {
            Some(g) => g.push(w),
            None => groups.push(vec![w]),
        }
    }
    let cells: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|g| (0..folds.len()).map(move |f| (g, f)))
        .collect();
    let group_scores = map_cells(&cells, settings.threads, |&(g, f)| {
        let members = &groups[g];
        let longest = *members
            .iter()
            .max_by_key(|&&w| (grid[w].nrounds, std::cmp::Reverse(w)))
            .expect("groups are non-empty");
        let fit_rows = complement(&folds, f);
        let val_rows = &folds[f];
        let fit_data = train.subset(&fit_rows);
        let val_data = train.subset(val_rows);
        let obj = match objective {
            ObjectiveKind::Mse => Objective::Mse,
            ObjectiveKind::Sera => Objective::Sera(weights.select(&fit_rows)),
        };
        let model = fit(&fit_data, &obj, &grid[longest], derive_seed(seed, longest as u64, f as u64))?;
        let val_rel: Vec<f64> = val_rows.iter().map(|&r| relevances[r]).collect();
        members
            .iter()
            .map(|&w| {
                let pred = model.truncated(grid[w].nrounds).predict_dataset(&val_data)?;
                let sera = sera::sera_trapezoid(val_data.target(), &pred, &val_rel, settings.grid)?;
                let mse = sera::mse(val_data.target(), &pred)?;
                Ok((w, sera, mse))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut scores = vec![(0.0, 0.0); grid.len() * folds.len()];
    for (&(_, f), cell) in cells.iter().zip(&group_scores) {
        for &(w, sera, mse) in cell {
            scores[w * folds.len() + f] = (sera, mse);
        }
    }

    let all: Vec<CvResult> = grid
        .iter()
        .enumerate()
        .map(|(w, params)| {
            let cell = &scores[w * folds.len()..(w + 1) * folds.len()];
            let fold_scores_sera: Vec<f64> = cell.iter().map(|s| s.0).collect();
            let fold_scores_mse: Vec<f64> = cell.iter().map(|s| s.1).collect();
            CvResult {
                workflow: Workflow {
                    model_tag: model_tag.to_owned(),
                    objective,
                    params: *params,
                },
                mean_sera: mean(&fold_scores_sera),
                mean_mse: mean(&fold_scores_mse),
                fold_scores_sera,
                fold_scores_mse,
            }
        })
        .collect();

    let key = |r: &CvResult| {
        let p = r.workflow.params;
        (r.mean_sera, p.nrounds as f64, p.max_depth as f64, p.eta)
    };
    let mut best = 0;
    for (i, r) in all.iter().enumerate().skip(1) {
        let (a, b) = (key(r), key(&all[best]));
        let ord = a
            .0
            .total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3));
        if ord.is_lt() {
            best = i;
        }
    }
    Ok(SearchOutcome {
        best: all[best].clone(),
        all,
    })
}
