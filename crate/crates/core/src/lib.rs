//! Imbalanced regression with the Squared Error Relevance Area (SERA).
//!
//! The crate is organised bottom-up:
//!
//! * [`relevance`] builds the automatic relevance function from the adjusted
//!   boxplot of a target sample (medcouple, fences, monotone Hermite curve).
//! * [`sera`] evaluates `SER_t`, SERA and its closed-form first and second
//!   derivatives on a uniform cutoff grid.
//! * [`boosting`] is a second-order gradient-boosted tree learner with a
//!   pluggable objective; squared error and SERA are provided.
//! * [`evaluation`] holds the experimental protocol: holdout split, relevance
//!   stratified k-fold grid search, the Bayesian sign test, ranks, SERA curves
//!   and turning points.
//! * [`data`] and [`config`] cover CSV ingestion, one-hot encoding and the
//!   JSON configuration and output files.

pub mod boosting;
pub mod config;
pub mod data;
mod error;
pub mod evaluation;
pub mod output;
pub mod relevance;
pub mod sera;

pub use error::{Error, Result};
