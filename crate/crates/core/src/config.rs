//! Experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boosting::{Hyperparams, ObjectiveKind};
use crate::error::{Error, Result};
use crate::evaluation::PosteriorConvention;
use crate::relevance::ExtremeType;
use crate::sera::{RelevanceGrid, DEFAULT_STEPS};

/// Settings for a full tune / refit / score run. Every field has a default,
/// so `{}` is a valid configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target_column: Option<String>,
    #[serde(deserialize_with = "deserialize_grid")]
    pub grid: Vec<Hyperparams>,
    pub folds: usize,
    pub train_fraction: f64,
    pub steps: usize,
    pub rope: f64,
    pub bayes_samples: usize,
    pub posterior: PosteriorConvention,
    pub seed: u64,
    pub extreme_type_override: Option<ExtremeType>,
    pub objectives: Vec<ObjectiveKind>,
    /// Worker threads for grid-search cells; 0 runs sequentially.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            target_column: None,
            grid: Hyperparams::default_grid(),
            folds: 10,
            train_fraction: 0.8,
            steps: DEFAULT_STEPS,
            rope: 0.01,
            bayes_samples: 50_000,
            posterior: PosteriorConvention::default(),
            seed: 0,
            extreme_type_override: None,
            objectives: vec![ObjectiveKind::Mse, ObjectiveKind::Sera],
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn relevance_grid(&self) -> Result<RelevanceGrid> {
        RelevanceGrid::new(self.steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("hyperparameter grid is empty"));
        }
        for p in &self.grid {
            p.validate()?;
        }
        if self.folds < 2 {
            return Err(Error::invalid("need at least 2 folds"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction must lie in (0, 1)"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be positive"));
        }
        if !(self.rope >= 0.0 && self.rope.is_finite()) {
            return Err(Error::invalid("rope must be finite and >= 0"));
        }
        if self.objectives.is_empty() {
            return Err(Error::invalid("no objectives selected"));
        }
        Ok(())
    }
}

/// A grid file is either an explicit list of parameter sets or an object of
/// value lists whose cross product is taken.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<Hyperparams>),
    Product {
        nrounds: Vec<usize>,
        max_depth: Vec<usize>,
        eta: Vec<f64>,
    },
}

impl GridSpec {
    pub fn expand(self) -> Vec<Hyperparams> {
        match self {
            GridSpec::List(v) => v,
            GridSpec::Product {
                nrounds,
                max_depth,
                eta,
            } => {
                let mut out = Vec::new();
                for &n in &nrounds {
                    for &d in &max_depth {
                        for &e in &eta {
                            out.push(Hyperparams::new(n, d, e));
                        }
                    }
                }
                out
            }
        }
    }
}

fn deserialize_grid<'de, D>(deserializer: D) -> std::result::Result<Vec<Hyperparams>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    GridSpec::deserialize(deserializer).map(GridSpec::expand)
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<Vec<Hyperparams>> {
    let text = std::fs::read_to_string(path)?;
    let spec: GridSpec = serde_json::from_str(&text)?;
    let grid = spec.expand();
    if grid.is_empty() {
        return Err(Error::invalid("hyperparameter grid is empty"));
    }
    for p in &grid {
        p.validate()?;
    }
    Ok(grid)
}
