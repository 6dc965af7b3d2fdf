//! Delta-method intervals and how their coverage and width behave as the
//! sample size grows, for the exponential model.
//!
//! ```bash
//! cargo run --release --example intervals_and_coverage
//! ```

use refprior::config::{ExperimentConfig, ThetaGrid};
use refprior::estimators::{fk_hat, half_width_fk};
use refprior::experiments::k_sweep;
use refprior::{uniform_matrix, Estimator, Model, QuadratureSettings, StreamKey};

fn main() -> refprior::Result<()> {
    let u = uniform_matrix(&StreamKey::new(3, vec![0]), 40, 40);
    let est = fk_hat(Model::ExpRate, 2.0, &u, &QuadratureSettings::default())?;
    for alpha in [0.2, 0.1, 0.05, 0.01] {
        let iv = half_width_fk(&est, alpha)?;
        println!("alpha = {alpha:<4}  f_k(2) = {:.4} ± {:.4}", iv.center, iv.half_width);
    }

    let cfg = ExperimentConfig {
        theta_grid: ThetaGrid::parse("log(100, 0.1, 10)")?,
        k_values: vec![5, 10, 20, 50],
        estimators: vec![Estimator::Fk, Estimator::F],
        replications: 10,
        master_seed: 3,
        ..ExperimentConfig::new(Model::ExpRate)
    };
    let out = k_sweep(&cfg)?;
    println!("\n{:>4} {:>5} {:>7} {:>7} {:>7}", "k", "est", "CE", "AMRP", "EARP");
    for r in &out.summary.rows {
        println!("{:>4} {:>5} {:>7.3} {:>7.3} {:>7.3}", r.k, r.estimator, r.ce, r.amrp, r.earp);
    }
    println!("nominal coverage {:.2}", 1.0 - cfg.alpha);
    Ok(())
}
