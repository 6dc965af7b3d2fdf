//! Estimates on a θ-grid are only proportional to the reference prior. This
//! fits the constant that minimizes the average relative error and scores
//! the fit.
//!
//! ```bash
//! cargo run --example constant_fitting
//! ```

use refprior::config::{ExperimentConfig, ThetaGrid};
use refprior::experiments::{fit_and_score, reference_for, run_grid};
use refprior::{Estimator, Model};

fn main() -> refprior::Result<()> {
    let cfg = ExperimentConfig {
        theta_grid: ThetaGrid::Explicit(vec![2.0, 5.0, 8.0, 11.0, 14.0, 17.0]),
        theta0: 1.0,
        estimators: vec![Estimator::Fk, Estimator::F],
        master_seed: 5,
        ..ExperimentConfig::new(Model::Unif0Theta)
    };
    let records = run_grid(&cfg, 5, 0)?;
    let scores = fit_and_score(&records, reference_for(cfg.model)?)?;

    for s in &scores {
        println!(
            "{}: constant {:.4} (split index {}), EARP {:.4}",
            s.estimator, s.fit.a_hat, s.fit.s_hat, s.earp
        );
        println!("  {:>6} {:>10} {:>10}", "theta", "estimate", "c * f");
        for e in s.grid.entries() {
            println!("  {:>6} {:>10.4} {:>10.4}", e.theta, e.estimate, e.scaled_ref);
        }
    }
    Ok(())
}
