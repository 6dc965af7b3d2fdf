//! Command-line front end. Data goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 usage or configuration
//! error, 3 numerical failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use refprior::config::{parse_override, ExperimentConfig, MPolicy, ThetaGrid};
use refprior::estimators::{f_hat_from_samples, fk_hat_from_samples, half_width_f, half_width_fk, Estimator};
use refprior::experiments::{
    attach_scaled_ref, fit_and_score, k_sweep, read_records, reference_for, run_grid, write_records, write_summary,
    write_sweep, EstimateRecord,
};
use refprior::fixture::Fixture;
use refprior::sampling::crn_samples;
use refprior::selftest::{run_checks, GoldenTables};
use refprior::{Error, Model, Result};

#[derive(Parser)]
#[command(name = "refprior", version, about = "Monte Carlo reference prior estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the reference prior at a single θ.
    Estimate(EstimateArgs),
    /// Run one (k, replication) cell of a config and print its records.
    Grid(GridArgs),
    /// Fit constants and score a records CSV.
    Fit(FitArgs),
    /// Run a full k-sweep and write records.csv and summary.csv.
    Sweep(SweepArgs),
    /// Run the built-in golden and oracle checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    model: Model,
    #[arg(long)]
    theta: f64,
    /// Anchor point; defaults to the model's interior default.
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Replicate count; defaults to k.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "fk")]
    estimator: Estimator,
    #[arg(long, env = "REFPRIOR_SEED", default_value_t = 0)]
    seed: u64,
    /// Use the samples in this file instead of simulating.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Also print the record as CSV (header and one row).
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file (`key = value` lines).
    config: PathBuf,
    /// Override a config key, e.g. `--set alpha=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, env = "REFPRIOR_SEED")]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        if !self.config.is_file() {
            return Err(Error::Config(format!("config file {} not found", self.config.display())));
        }
        let mut overrides = self
            .overrides
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(seed) = self.seed {
            overrides.push(("master_seed".into(), seed.to_string()));
        }
        ExperimentConfig::load(&self.config, &overrides)
    }
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Sample size; defaults to the first of `k_values`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    replication: u64,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    records: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory; overrides `output_path`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Omit the `# generated_unix=` line so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct SelftestArgs {
    /// Replace the worked-example samples with the θ = 5 and θ = 1 blocks of
    /// this fixture.
    #[arg(long)]
    fixture: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn stdout_csv(records: &[EstimateRecord]) -> Result<()> {
    write_records(std::io::stdout().lock(), records, None)
}

fn cmd_estimate(a: EstimateArgs) -> Result<ExitCode> {
    let theta0 = a.theta0.unwrap_or_else(|| a.model.default_theta0());
    let record = match &a.fixture {
        Some(path) => estimate_from_fixture(&a, theta0, path)?,
        None => {
            let cfg = ExperimentConfig {
                theta_grid: ThetaGrid::Explicit(vec![a.theta]),
                theta0,
                k_values: vec![a.k],
                m_policy: a.m.map_or(MPolicy::EqualK, MPolicy::Fixed),
                alpha: a.alpha,
                estimators: vec![a.estimator],
                master_seed: a.seed,
                ..ExperimentConfig::new(a.model)
            };
            let mut recs = run_grid(&cfg, a.k, 0)?;
            let rec = recs.remove(0);
            if !rec.is_ok() {
                return Err(Error::Quadrature(rec.status));
            }
            rec
        }
    };
    let show = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    println!(
        "model={} estimator={} theta={} theta0={} k={} m={} alpha={} value={} half_width={} lo={} hi={}",
        record.model,
        record.estimator,
        record.theta,
        show(record.theta0),
        record.k,
        record.m,
        record.alpha,
        show(record.value),
        show(record.half_width),
        show(record.lo),
        show(record.hi),
    );
    if a.csv {
        stdout_csv(std::slice::from_ref(&record))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn estimate_from_fixture(a: &EstimateArgs, theta0: f64, path: &Path) -> Result<EstimateRecord> {
    let fixture = Fixture::load(path)?;
    let quad = Default::default();
    let samples = fixture.samples_at(a.theta)?;
    match a.estimator {
        Estimator::Fk => {
            let est = fk_hat_from_samples(a.model, a.theta, samples, &quad)?;
            Ok(EstimateRecord::from_fk(a.model, &est, &half_width_fk(&est, a.alpha)?, 0))
        }
        Estimator::F => {
            let s0 = fixture.samples_at(theta0)?;
            let est = f_hat_from_samples(a.model, a.theta, theta0, samples, s0, false, &quad)?;
            Ok(EstimateRecord::from_ratio(a.model, &est, &half_width_f(&est, a.alpha)?, 0))
        }
        Estimator::Fnac => {
            let s0 = crn_samples(a.model, samples, a.theta, theta0)?;
            let est = f_hat_from_samples(a.model, a.theta, theta0, samples, &s0, true, &quad)?;
            Ok(EstimateRecord::from_ratio(a.model, &est, &half_width_f(&est, a.alpha)?, 0))
        }
    }
}

fn warn_conjecture(model: Model) {
    if reference_for(model).map(|r| r.is_conjecture()).unwrap_or(false) {
        eprintln!("warning: {model} is scored against a conjectured reference prior");
    }
}

fn cmd_grid(a: GridArgs) -> Result<ExitCode> {
    let cfg = a.config.load()?;
    let k = a.k.unwrap_or(cfg.k_values[0]);
    let mut records = run_grid(&cfg, k, a.replication)?;
    let reference = reference_for(cfg.model)?;
    let scores = fit_and_score(&records, reference)?;
    attach_scaled_ref(&mut records, &scores, reference);
    warn_conjecture(cfg.model);
    stdout_csv(&records)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(a: FitArgs) -> Result<ExitCode> {
    let file = std::fs::File::open(&a.records)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", a.records.display())))?;
    let records = read_records(file)?;
    let mut cells: BTreeMap<(String, usize, u64), Vec<EstimateRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.model.clone(), r.k, r.replication)).or_default().push(r);
    }
    println!("model,estimator,k,replication,CE,AMRP,EARP,a_hat,s_hat,excluded");
    for ((model_id, k, rep), recs) in &cells {
        let model: Model = model_id.parse()?;
        warn_conjecture(model);
        for s in fit_and_score(recs, reference_for(model)?)? {
            println!(
                "{model_id},{},{k},{rep},{},{},{},{},{},{}",
                s.estimator, s.ce, s.amrp, s.earp, s.fit.a_hat, s.fit.s_hat, s.excluded
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode> {
    let cfg = a.config.load()?;
    let dir = a
        .output
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from("refprior_out"));
    warn_conjecture(cfg.model);
    let out = k_sweep(&cfg)?;
    let timestamp = if a.no_timestamp {
        None
    } else {
        Some(SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
    };
    write_sweep(&dir, &out, timestamp)?;
    eprintln!("wrote {} records to {}", out.records.len(), dir.display());
    write_summary(std::io::stdout().lock(), &out.summary.rows, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(a: SelftestArgs) -> Result<ExitCode> {
    let mut golden = GoldenTables::published();
    if let Some(path) = &a.fixture {
        let fixture = Fixture::load(path)?;
        let rows = |t: f64| -> Result<Vec<Vec<f64>>> {
            Ok(fixture.samples_at(t)?.iter().map(|s| s.values().to_vec()).collect())
        };
        golden.samples_theta = rows(golden.theta)?;
        golden.samples_theta0 = rows(golden.theta0)?;
    }
    let checks = run_checks(&golden);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{c}");
    }
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
