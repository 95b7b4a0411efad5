//! `sera`: profiling, relevance curves, tuning, experiments, model
//! comparison and derivative checks for imbalanced regression.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sera_core::boosting::{Hyperparams, ObjectiveKind};
use sera_core::config::{load_grid, ExperimentConfig};
use sera_core::data::{load_csv, Dataset, OnMissing};
use sera_core::evaluation::{
    bayes_sign_test, derivative_check, grid_search, model_name, profile, run_experiment,
    write_experiment, CvSettings, ExperimentRecord, Metric, PosteriorConvention,
};
use sera_core::output::{relevance_csv, write_atomic};
use sera_core::relevance::{build_relevance, ExtremeType};
use sera_core::sera::{RelevanceGrid, DEFAULT_STEPS};

#[derive(Parser)]
#[command(name = "sera", version, about = "SERA loss tools for imbalanced regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print size, column mix and imbalance of a dataset as JSON.
    Profile {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Sample the relevance function into a `y,phi` CSV.
    Relevance {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated grid search for one objective; prints the best result.
    Tune {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        objective: ObjectiveKind,
        /// JSON grid: a list of parameter sets or `{nrounds, max_depth, eta}` lists.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Tune, refit and score both objectives; writes a record and its files.
    Experiment {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bayes sign test over the normalised differences of several records.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        records: Vec<PathBuf>,
        #[arg(long, default_value = "sera")]
        metric: Metric,
        #[arg(long, default_value_t = 0.01)]
        rope: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Convention::Winner)]
        convention: Convention,
    },
    /// Compare closed-form SERA derivatives with the trapezoidal rule and
    /// finite differences on a fitted model's predictions.
    DerivCheck {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Instances checked by finite differences.
        #[arg(long, default_value_t = 50)]
        probes: usize,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    /// Force the extreme type instead of inferring it.
    #[arg(long = "type")]
    extreme_type: Option<ExtremeType>,
    #[arg(long, default_value = "error")]
    on_missing: OnMissing,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Convention {
    Winner,
    MeanMass,
}

impl From<Convention> for PosteriorConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Winner => PosteriorConvention::Winner,
            Convention::MeanMass => PosteriorConvention::MeanMass,
        }
    }
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let loaded = load_csv(&self.data, &self.target, self.on_missing)
            .with_context(|| format!("cannot load {}", self.data.display()))?;
        if loaded.dropped_rows > 0 {
            eprintln!("warning: dropped {} rows with missing values", loaded.dropped_rows);
        }
        Ok(loaded.dataset)
    }

    fn name(&self) -> String {
        self.data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".to_owned())
    }
}

/// Worker cap from `SERA_THREADS`; unset or 0 means sequential.
fn env_threads() -> Result<usize> {
    match std::env::var("SERA_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .with_context(|| format!("SERA_THREADS must be a non-negative integer, got `{v}`")),
        _ => Ok(0),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read_record(path: &Path) -> Result<ExperimentRecord> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not an experiment record", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Profile { data } => {
            let ds = data.load()?;
            let phi = build_relevance(ds.target(), data.extreme_type)?;
            print_json(&profile(&ds, &phi))
        }
        Command::Relevance { data, points, out } => {
            if points < 2 {
                bail!("--points must be at least 2");
            }
            let ds = data.load()?;
            let phi = build_relevance(ds.target(), data.extreme_type)?;
            let y = ds.target();
            let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (start, end) = (lo - 0.1 * (hi - lo), hi + 0.1 * (hi - lo));
            let curve = (0..points)
                .map(|i| {
                    let v = start + (end - start) * i as f64 / (points - 1) as f64;
                    Ok((v, phi.evaluate(v)?))
                })
                .collect::<Result<Vec<_>>>()?;
            write_atomic(&out, relevance_csv(&curve).as_bytes())?;
            Ok(())
        }
        Command::Tune {
            data,
            objective,
            grid,
            folds,
            seed,
            steps,
        } => {
            let ds = data.load()?;
            let phi = build_relevance(ds.target(), data.extreme_type)?;
            let grid = match grid {
                Some(path) => load_grid(&path).with_context(|| format!("cannot load grid {}", path.display()))?,
                None => Hyperparams::default_grid(),
            };
            let settings = CvSettings {
                folds,
                grid: RelevanceGrid::new(steps)?,
                threads: env_threads()?,
            };
            let search = grid_search(&ds, &model_name(objective), objective, &grid, &phi, &settings, seed)?;
            print_json(&search.best)
        }
        Command::Experiment {
            data,
            config,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json_file(&path)
                    .with_context(|| format!("cannot load config {}", path.display()))?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if data.extreme_type.is_some() {
                cfg.extreme_type_override = data.extreme_type;
            }
            cfg.target_column = Some(data.target.clone());
            cfg.threads = env_threads()?;
            let ds = data.load()?;
            let outcome = run_experiment(&ds, &data.name(), &cfg)?;
            write_experiment(&outcome, &out)?;
            print_json(&outcome.record.oos)
        }
        Command::Compare {
            records,
            metric,
            rope,
            seed,
            samples,
            convention,
        } => {
            let priors = records
                .iter()
                .map(|p| {
                    let record = read_record(p)?;
                    record.prior(metric).with_context(|| format!("no prior for {}", p.display()))
                })
                .collect::<Result<Vec<f64>>>()?;
            print_json(&bayes_sign_test(&priors, rope, samples, seed, convention.into())?)
        }
        Command::DerivCheck {
            data,
            seed,
            steps,
            probes,
        } => {
            let ds = data.load()?;
            print_json(&derivative_check(&ds, data.extreme_type, RelevanceGrid::new(steps)?, seed, probes)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
