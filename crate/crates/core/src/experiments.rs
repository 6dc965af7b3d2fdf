//! Grid runs, constant fitting and k-sweeps over an [`ExperimentConfig`].
//!
//! Stream layout for replication `r` and grid index `i`: `[r, i, 0]` drives
//! the samples at θ for every estimator, `[r, i, 1]` the independent θ₀
//! samples of `f`. `fnac` carries the `[r, i, 0]` samples to θ₀ instead, so
//! all three estimators at one grid point share their θ-side draws.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimators::{
    fit_constant_earp, half_width_f, half_width_fk, log_ratios, EarpFit, Estimator, FkEstimate, Interval,
    RatioEstimate,
};
use crate::metrics::{amrp, coverage, earp, GridEntry, GridEvaluation};
use crate::models::{KnownPrior, Model, Sample};
use crate::quadrature::QuadratureSettings;
use crate::sampling::{crn_samples, sample_matrix, uniform_matrix, StreamKey};
use crate::special::normal_quantile;

/// One row of the records CSV. Optional columns are empty on error rows and
/// where an estimator has no such quantity (e.g. `mu2_hat` for `fk`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub model: String,
    pub estimator: String,
    pub theta: f64,
    pub theta0: Option<f64>,
    pub k: usize,
    pub m: usize,
    pub alpha: f64,
    pub replication: u64,
    pub value: Option<f64>,
    pub mu1_hat: Option<f64>,
    pub mu2_hat: Option<f64>,
    pub sigma1_sq: Option<f64>,
    pub sigma2_sq: Option<f64>,
    pub sigma12: Option<f64>,
    pub half_width: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub scaled_ref: Option<f64>,
    pub seed_path: String,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";

impl EstimateRecord {
    fn base(model: Model, estimator: Estimator, theta: f64, k: usize, m: usize, alpha: f64, rep: u64) -> Self {
        Self {
            model: model.id().to_string(),
            estimator: estimator.id().to_string(),
            theta,
            theta0: None,
            k,
            m,
            alpha,
            replication: rep,
            value: None,
            mu1_hat: None,
            mu2_hat: None,
            sigma1_sq: None,
            sigma2_sq: None,
            sigma12: None,
            half_width: None,
            lo: None,
            hi: None,
            scaled_ref: None,
            seed_path: String::new(),
            status: STATUS_OK.to_string(),
        }
    }

    pub fn from_fk(model: Model, est: &FkEstimate, iv: &Interval, rep: u64) -> Self {
        Self {
            value: Some(est.value),
            mu1_hat: Some(est.mu1_hat),
            sigma1_sq: Some(est.sigma1_hat * est.sigma1_hat),
            half_width: Some(iv.half_width),
            lo: Some(iv.lo),
            hi: Some(iv.hi),
            ..Self::base(model, Estimator::Fk, est.theta, est.k, est.m, iv.alpha, rep)
        }
    }

    pub fn from_ratio(model: Model, est: &RatioEstimate, iv: &Interval, rep: u64) -> Self {
        let estimator = if est.crn { Estimator::Fnac } else { Estimator::F };
        Self {
            theta0: Some(est.theta0),
            value: Some(est.value),
            mu1_hat: Some(est.mu1_hat),
            mu2_hat: Some(est.mu2_hat),
            sigma1_sq: Some(est.sigma1_sq),
            sigma2_sq: Some(est.sigma2_sq),
            sigma12: Some(est.sigma12),
            half_width: Some(iv.half_width),
            lo: Some(iv.lo),
            hi: Some(iv.hi),
            ..Self::base(model, estimator, est.theta, est.k, est.m, iv.alpha, rep)
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK && self.value.is_some()
    }

    pub fn estimator(&self) -> Result<Estimator> {
        self.estimator.parse()
    }

    /// Rebuilds the interval at another α from the stored summaries.
    pub fn interval(&self, alpha: f64) -> Result<Interval> {
        let (Some(value), Some(s11)) = (self.value, self.sigma1_sq) else {
            return Err(Error::domain("record has no estimate"));
        };
        let z = normal_quantile(1.0 - alpha / 2.0)?;
        let var = match (self.sigma2_sq, self.sigma12) {
            (Some(s22), Some(s12)) => (s11 + s22 - 2.0 * s12).max(0.0),
            _ => s11,
        };
        Ok(Interval::new(value, z * value * var.sqrt() / (self.m as f64).sqrt(), alpha))
    }
}

/// Which estimators need which draws at one grid point.
struct PointPlan<'a> {
    model: Model,
    theta: f64,
    theta0: f64,
    k: usize,
    m: usize,
    alpha: f64,
    rep: u64,
    key: StreamKey,
    estimators: &'a [Estimator],
    quad: &'a QuadratureSettings,
}

impl PointPlan<'_> {
    fn error_row(&self, estimator: Estimator, err: &Error) -> EstimateRecord {
        let mut rec = EstimateRecord::base(self.model, estimator, self.theta, self.k, self.m, self.alpha, self.rep);
        if estimator != Estimator::Fk {
            rec.theta0 = Some(self.theta0);
        }
        rec.seed_path = self.key.label();
        rec.status = format!("error: {err}");
        rec
    }

    fn ratios(&self, theta: f64, samples: &[Sample]) -> Result<Vec<f64>> {
        log_ratios(self.model, theta, samples, self.quad)
    }

    fn run(&self) -> Result<Vec<EstimateRecord>> {
        let u = uniform_matrix(&self.key.child(0), self.m, self.k);
        let samples = sample_matrix(self.model, &u, self.theta)?;
        let r1 = match self.ratios(self.theta, &samples) {
            Ok(r) => r,
            Err(e) if recoverable(&e) => {
                return Ok(self.estimators.iter().map(|&est| self.error_row(est, &e)).collect());
            }
            Err(e) => return Err(e),
        };
        let mut out = Vec::with_capacity(self.estimators.len());
        for &est in self.estimators {
            let rec = match est {
                Estimator::Fk => {
                    let fk = FkEstimate::from_log_ratios(self.theta, self.k, &r1)?;
                    Ok(EstimateRecord::from_fk(self.model, &fk, &half_width_fk(&fk, self.alpha)?, self.rep))
                }
                Estimator::F => {
                    let u0 = uniform_matrix(&self.key.child(1), self.m, self.k);
                    sample_matrix(self.model, &u0, self.theta0)
                        .and_then(|s0| self.ratios(self.theta0, &s0))
                        .and_then(|r2| self.ratio_record(&r1, &r2, false))
                }
                Estimator::Fnac => crn_samples(self.model, &samples, self.theta, self.theta0)
                    .and_then(|s0| self.ratios(self.theta0, &s0))
                    .and_then(|r2| self.ratio_record(&r1, &r2, true)),
            };
            match rec {
                Ok(mut r) => {
                    r.seed_path = self.key.label();
                    out.push(r);
                }
                Err(e) if recoverable(&e) => out.push(self.error_row(est, &e)),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    fn ratio_record(&self, r1: &[f64], r2: &[f64], crn: bool) -> Result<EstimateRecord> {
        let est = RatioEstimate::from_log_ratios(self.theta, self.theta0, self.k, r1, r2, crn)?;
        Ok(EstimateRecord::from_ratio(self.model, &est, &half_width_f(&est, self.alpha)?, self.rep))
    }
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::Quadrature(_) | Error::NanIntegrand { .. })
}

/// Runs every configured estimator at every grid point for one (k,
/// replication) cell. Records are sorted by θ, then estimator.
pub fn run_grid(config: &ExperimentConfig, k: usize, replication: u64) -> Result<Vec<EstimateRecord>> {
    config.validate()?;
    if k < 2 {
        return Err(Error::Config(format!("k = {k} is below 2")));
    }
    let m = config.m_policy.m_for(k);
    let thetas = config.grid_points();
    let per_point: Vec<Vec<EstimateRecord>> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            PointPlan {
                model: config.model,
                theta,
                theta0: config.theta0,
                k,
                m,
                alpha: config.alpha,
                rep: replication,
                key: StreamKey::new(config.master_seed, vec![replication, i as u64]),
                estimators: &config.estimators,
                quad: &config.quad,
            }
            .run()
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<EstimateRecord> = per_point.into_iter().flatten().collect();
    records.sort_by(|a, b| {
        a.theta
            .total_cmp(&b.theta)
            .then_with(|| rank(&a.estimator).cmp(&rank(&b.estimator)))
    });
    Ok(records)
}

fn rank(id: &str) -> usize {
    Estimator::ALL.iter().position(|e| e.id() == id).unwrap_or(usize::MAX)
}

/// Fit and metrics for one estimator over one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorScore {
    pub estimator: Estimator,
    pub fit: EarpFit,
    pub grid: GridEvaluation,
    pub ce: f64,
    pub amrp: f64,
    pub earp: f64,
    /// Error rows left out of the fit and metrics.
    pub excluded: usize,
    pub reference_is_conjecture: bool,
}

/// The reference prior a model is scored against.
pub fn reference_for(model: Model) -> Result<KnownPrior> {
    model
        .known_prior()
        .ok_or_else(|| Error::MissingReference(model.id().to_string()))
}

/// Fits one constant per estimator present in `records` and scores the grid
/// against `constant · f(θ)`. Estimators appear in fk, f, fnac order;
/// an estimator whose rows all failed is skipped.
pub fn fit_and_score(records: &[EstimateRecord], reference: KnownPrior) -> Result<Vec<EstimatorScore>> {
    let mut scores = Vec::new();
    for est in Estimator::ALL {
        let rows: Vec<&EstimateRecord> = records.iter().filter(|r| r.estimator == est.id()).collect();
        if rows.is_empty() {
            continue;
        }
        let ok: Vec<&EstimateRecord> = rows.iter().copied().filter(|r| r.is_ok()).collect();
        let excluded = rows.len() - ok.len();
        if ok.is_empty() {
            continue;
        }
        let points: Vec<(f64, f64)> = ok.iter().map(|r| (r.theta, r.value.unwrap_or(f64::NAN))).collect();
        let fit = fit_constant_earp(&points, |t| reference.evaluate(t))?;
        let entries = ok
            .iter()
            .map(|r| GridEntry {
                theta: r.theta,
                estimate: r.value.unwrap_or(f64::NAN),
                half_width: r.half_width.unwrap_or(0.0),
                scaled_ref: fit.a_hat * reference.evaluate(r.theta),
            })
            .collect();
        let grid = GridEvaluation::new(entries)?;
        scores.push(EstimatorScore {
            estimator: est,
            ce: coverage(&grid),
            amrp: amrp(&grid),
            earp: earp(&grid),
            fit,
            grid,
            excluded,
            reference_is_conjecture: reference.is_conjecture(),
        });
    }
    Ok(scores)
}

/// Writes each score's fitted `scaled_ref` back onto the matching records.
pub fn attach_scaled_ref(records: &mut [EstimateRecord], scores: &[EstimatorScore], reference: KnownPrior) {
    for rec in records.iter_mut().filter(|r| r.is_ok()) {
        if let Some(s) = scores.iter().find(|s| s.estimator.id() == rec.estimator) {
            rec.scaled_ref = Some(s.fit.a_hat * reference.evaluate(rec.theta));
        }
    }
}

/// Metrics of one (k, replication, estimator) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScore {
    pub k: usize,
    pub replication: u64,
    pub estimator: Estimator,
    pub ce: f64,
    pub amrp: f64,
    pub earp: f64,
    pub a_hat: f64,
    pub excluded: usize,
}

/// One row of the summary CSV: metrics averaged over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub estimator: String,
    pub k: usize,
    pub replications: u64,
    #[serde(rename = "CE")]
    pub ce: f64,
    #[serde(rename = "AMRP")]
    pub amrp: f64,
    #[serde(rename = "EARP")]
    pub earp: f64,
    pub a_hat: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SummaryRow>,
    pub cells: Vec<CellScore>,
}

impl SweepSummary {
    pub fn row(&self, estimator: Estimator, k: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.estimator == estimator.id() && r.k == k)
    }

    pub fn cells_for(&self, estimator: Estimator, k: usize) -> impl Iterator<Item = &CellScore> {
        self.cells.iter().filter(move |c| c.estimator == estimator && c.k == k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<EstimateRecord>,
    pub summary: SweepSummary,
}

/// Runs every (k, replication) cell, fits and scores each, and averages the
/// metrics over replications.
pub fn k_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    let reference = reference_for(config.model)?;
    let cells: Vec<(usize, u64)> = config
        .k_values
        .iter()
        .flat_map(|&k| (0..config.replications).map(move |r| (k, r)))
        .collect();
    let results: Vec<(Vec<EstimateRecord>, Vec<CellScore>)> = cells
        .par_iter()
        .map(|&(k, rep)| {
            let mut records = run_grid(config, k, rep)?;
            let scores = fit_and_score(&records, reference)?;
            attach_scaled_ref(&mut records, &scores, reference);
            let mut cell_scores: Vec<CellScore> = scores
                .iter()
                .map(|s| CellScore {
                    k,
                    replication: rep,
                    estimator: s.estimator,
                    ce: s.ce,
                    amrp: s.amrp,
                    earp: s.earp,
                    a_hat: s.fit.a_hat,
                    excluded: s.excluded,
                })
                .collect();
            // estimators whose every row failed still get a cell, with NaN metrics
            for &est in &config.estimators {
                if !cell_scores.iter().any(|c| c.estimator == est) {
                    let excluded = records.iter().filter(|r| r.estimator == est.id()).count();
                    cell_scores.push(CellScore {
                        k,
                        replication: rep,
                        estimator: est,
                        ce: f64::NAN,
                        amrp: f64::NAN,
                        earp: f64::NAN,
                        a_hat: f64::NAN,
                        excluded,
                    });
                }
            }
            Ok((records, cell_scores))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut cell_scores = Vec::new();
    for (r, c) in results {
        records.extend(r);
        cell_scores.extend(c);
    }
    let mut rows = Vec::new();
    for &k in &config.k_values {
        for est in Estimator::ALL.into_iter().filter(|e| config.estimators.contains(e)) {
            let cs: Vec<&CellScore> = cell_scores.iter().filter(|c| c.k == k && c.estimator == est).collect();
            let n = cs.len() as f64;
            let avg = |f: fn(&CellScore) -> f64| cs.iter().map(|c| f(c)).sum::<f64>() / n;
            rows.push(SummaryRow {
                model: config.model.id().to_string(),
                estimator: est.id().to_string(),
                k,
                replications: config.replications,
                ce: avg(|c| c.ce),
                amrp: avg(|c| c.amrp),
                earp: avg(|c| c.earp),
                a_hat: avg(|c| c.a_hat),
                excluded: cs.iter().map(|c| c.excluded).sum(),
            });
        }
    }
    Ok(SweepOutput {
        records,
        summary: SweepSummary {
            rows,
            cells: cell_scores,
        },
    })
}

fn write_csv<T: Serialize, W: Write>(mut w: W, rows: &[T], timestamp: Option<u64>) -> Result<()> {
    if let Some(t) = timestamp {
        writeln!(w, "# generated_unix={t}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes records in the CSV layout, optionally preceded by a
/// `# generated_unix=` comment line.
pub fn write_records<W: Write>(w: W, records: &[EstimateRecord], timestamp: Option<u64>) -> Result<()> {
    if records.is_empty() {
        return write_header::<W, EstimateRecord>(w, timestamp);
    }
    write_csv(w, records, timestamp)
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow], timestamp: Option<u64>) -> Result<()> {
    if rows.is_empty() {
        return write_header::<W, SummaryRow>(w, timestamp);
    }
    write_csv(w, rows, timestamp)
}

pub const RECORD_COLUMNS: &str = "model,estimator,theta,theta0,k,m,alpha,replication,value,mu1_hat,mu2_hat,\
sigma1_sq,sigma2_sq,sigma12,half_width,lo,hi,scaled_ref,seed_path,status";
pub const SUMMARY_COLUMNS: &str = "model,estimator,k,replications,CE,AMRP,EARP,a_hat,excluded";

fn write_header<W: Write, T>(mut w: W, timestamp: Option<u64>) -> Result<()> {
    if let Some(t) = timestamp {
        writeln!(w, "# generated_unix={t}")?;
    }
    let header = if std::any::type_name::<T>().ends_with("SummaryRow") {
        SUMMARY_COLUMNS
    } else {
        RECORD_COLUMNS
    };
    writeln!(w, "{header}")?;
    Ok(())
}

/// Reads a records CSV, skipping `#` comment lines.
pub fn read_records<R: Read>(r: R) -> Result<Vec<EstimateRecord>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `records.csv` and `summary.csv` into `dir`, creating it if needed.
pub fn write_sweep(dir: &Path, output: &SweepOutput, timestamp: Option<u64>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let records = std::fs::File::create(dir.join("records.csv"))?;
    write_records(std::io::BufWriter::new(records), &output.records, timestamp)?;
    let summary = std::fs::File::create(dir.join("summary.csv"))?;
    write_summary(std::io::BufWriter::new(summary), &output.summary.rows, timestamp)?;
    Ok(())
}
