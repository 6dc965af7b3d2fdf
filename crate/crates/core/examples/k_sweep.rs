//! A full sweep from one of the shipped config files, with overrides, writing
//! `records.csv` and `summary.csv`.
//!
//! ```bash
//! cargo run --release --example k_sweep -- configs/unif_sq_sweep.conf /tmp/unif_sq
//! ```

use std::path::PathBuf;

use refprior::config::ExperimentConfig;
use refprior::experiments::{k_sweep, write_sweep};

fn main() -> refprior::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("configs/unif_sq_sweep.conf"));
    let out_dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("refprior_k_sweep"));

    let overrides = [("replications".to_string(), "5".to_string())];
    let cfg = ExperimentConfig::load(&config, &overrides)?;
    let out = k_sweep(&cfg)?;
    write_sweep(&out_dir, &out, None)?;

    println!("{} records written to {}", out.records.len(), out_dir.display());
    println!("{:>4} {:>5} {:>7} {:>7} {:>7} {:>10}", "k", "est", "CE", "AMRP", "EARP", "constant");
    for r in &out.summary.rows {
        println!(
            "{:>4} {:>5} {:>7.3} {:>7.3} {:>7.3} {:>10.4}",
            r.k, r.estimator, r.ce, r.amrp, r.earp, r.a_hat
        );
    }
    Ok(())
}
