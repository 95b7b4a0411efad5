//! Runs the full tune / refit / score protocol on the synthetic log-normal
//! benchmark and prints the out-of-sample scores of both objectives.
//!
//! ```text
//! cargo run --release -p sera-core --example synthetic_experiment -- [seed] [rows]
//! ```

use std::time::Instant;

use sera_core::config::ExperimentConfig;
use sera_core::evaluation::{run_experiment, synthetic::lognormal_benchmark};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let rows: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000);

    let data = lognormal_benchmark(rows, seed);
    let config = ExperimentConfig {
        seed,
        ..Default::default()
    };
    let start = Instant::now();
    let out = run_experiment(&data, "synthetic", &config)?;
    let rec = &out.record;
    println!("rows={rows} seed={seed} elapsed={:.1}s", start.elapsed().as_secs_f64());
    println!("profile: {:?}", rec.profile);
    for (objective, best) in &rec.best {
        println!("best[{objective}]: {:?} cv_sera={:.4e}", best.params, best.cv_scores.mean_sera);
    }
    for (model, s) in &rec.oos {
        println!("{model}: oos mse={:.6e} sera={:.6e}", s.mse, s.sera);
    }
    println!("turning point: {:?}", rec.turning_point);
    Ok(())
}
