//! Monte Carlo estimators of the reference prior and their delta-method
//! error intervals.
//!
//! * `f̂_k(θ) = exp(mean_j r_j(θ))` over m replicate samples of size k;
//! * `f̂(θ) = f̂_k(θ) / f̂_k(θ₀)` from independent streams;
//! * `f̂_NAC(θ)`, the same ratio with both sides driven by one uniform matrix.
//!
//! The summaries μ̂ and σ̂ kept on each estimate are enough to rebuild its
//! interval at any α without simulating again.

use crate::error::{Error, Result};
use crate::models::{Model, Sample};
use crate::quadrature::QuadratureSettings;
use crate::sampling::{crn_samples, sample_matrix, UniformMatrix};
use crate::special::normal_quantile;

/// Which estimator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Fk,
    F,
    Fnac,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Fk, Estimator::F, Estimator::Fnac];

    pub fn id(self) -> &'static str {
        match self {
            Estimator::Fk => "fk",
            Estimator::F => "f",
            Estimator::Fnac => "fnac",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fk" => Ok(Estimator::Fk),
            "f" => Ok(Estimator::F),
            "fnac" | "crn" => Ok(Estimator::Fnac),
            other => Err(Error::Config(format!(
                "unknown estimator `{other}` (expected fk, f or fnac)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkEstimate {
    pub theta: f64,
    /// exp(mu1_hat)
    pub value: f64,
    pub mu1_hat: f64,
    pub sigma1_hat: f64,
    pub m: usize,
    pub k: usize,
}

impl FkEstimate {
    /// Builds the estimate from the per-replicate statistics r_j(θ).
    pub fn from_log_ratios(theta: f64, k: usize, r: &[f64]) -> Result<Self> {
        let m = r.len();
        if m < 2 {
            return Err(Error::domain(format!("need at least two replicates, got {m}")));
        }
        let mu = mean(r);
        let var = r.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (m as f64 - 1.0);
        Ok(Self {
            theta,
            value: mu.exp(),
            mu1_hat: mu,
            sigma1_hat: var.sqrt(),
            m,
            k,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub theta: f64,
    pub theta0: f64,
    /// exp(mu1_hat − mu2_hat)
    pub value: f64,
    pub mu1_hat: f64,
    pub mu2_hat: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma12: f64,
    pub m: usize,
    pub k: usize,
    pub crn: bool,
}

const VARIANCE_SLACK: f64 = 1e-12;

impl RatioEstimate {
    /// Builds the ratio estimate from r_j(θ) and r_j(θ₀); row j of each side
    /// is paired for the covariance.
    pub fn from_log_ratios(
        theta: f64,
        theta0: f64,
        k: usize,
        r_theta: &[f64],
        r_theta0: &[f64],
        crn: bool,
    ) -> Result<Self> {
        let m = r_theta.len();
        if r_theta0.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "{m} numerator replicates vs {} denominator replicates",
                r_theta0.len()
            )));
        }
        if m < 2 {
            return Err(Error::domain(format!("need at least two replicates, got {m}")));
        }
        let mu1 = mean(r_theta);
        let mu2 = mean(r_theta0);
        let denom = m as f64 - 1.0;
        let mut s11 = 0.0;
        let mut s22 = 0.0;
        let mut s12 = 0.0;
        for (a, b) in r_theta.iter().zip(r_theta0) {
            let (da, db) = (a - mu1, b - mu2);
            s11 += da * da;
            s22 += db * db;
            s12 += da * db;
        }
        let est = Self {
            theta,
            theta0,
            value: (mu1 - mu2).exp(),
            mu1_hat: mu1,
            mu2_hat: mu2,
            sigma1_sq: s11 / denom,
            sigma2_sq: s22 / denom,
            sigma12: s12 / denom,
            m,
            k,
            crn,
        };
        est.combined_variance()?;
        Ok(est)
    }

    /// σ̂₁² + σ̂₂² − 2σ̂₁₂, with rounding-level negatives clamped to zero.
    pub fn combined_variance(&self) -> Result<f64> {
        let v = self.sigma1_sq + self.sigma2_sq - 2.0 * self.sigma12;
        let slack = VARIANCE_SLACK * (1.0 + self.sigma1_sq + self.sigma2_sq);
        if v < -slack {
            return Err(Error::Internal(format!("negative combined variance {v}")));
        }
        Ok(v.max(0.0))
    }
}

/// A symmetric interval `center ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
}

impl Interval {
    pub fn new(center: f64, half_width: f64, alpha: f64) -> Self {
        Self {
            center,
            half_width,
            lo: center - half_width,
            hi: center + half_width,
            alpha,
        }
    }

    /// Strict containment, matching an open interval.
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// r_j(θ) for every sample. A −∞ here means a sample was evaluated at a θ it
/// could not have come from, which the estimators never do.
pub fn log_ratios(model: Model, theta: f64, samples: &[Sample], quad: &QuadratureSettings) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| {
            let r = model.r_statistic(s, theta, quad)?;
            if r.is_finite() {
                Ok(r)
            } else {
                Err(Error::Internal(format!(
                    "r statistic is {r} for a sample drawn at theta = {theta}"
                )))
            }
        })
        .collect()
}

fn sample_size(samples: &[Sample]) -> Result<usize> {
    let k = samples.first().map(Sample::len).unwrap_or(0);
    if k == 0 {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|s| s.len() != k) {
        return Err(Error::ShapeMismatch("samples have different sizes".into()));
    }
    Ok(k)
}

/// f̂_k(θ) from samples already drawn at θ.
pub fn fk_hat_from_samples(
    model: Model,
    theta: f64,
    samples: &[Sample],
    quad: &QuadratureSettings,
) -> Result<FkEstimate> {
    model.check_theta(theta)?;
    let k = sample_size(samples)?;
    let r = log_ratios(model, theta, samples, quad)?;
    FkEstimate::from_log_ratios(theta, k, &r)
}

/// f̂_k(θ) with samples drawn from `u` by inverse transform.
pub fn fk_hat(model: Model, theta: f64, u: &UniformMatrix, quad: &QuadratureSettings) -> Result<FkEstimate> {
    let samples = sample_matrix(model, u, theta)?;
    fk_hat_from_samples(model, theta, &samples, quad)
}

/// f̂(θ) = f̂_k(θ)/f̂_k(θ₀) from samples drawn at θ and θ₀.
pub fn f_hat_from_samples(
    model: Model,
    theta: f64,
    theta0: f64,
    samples_theta: &[Sample],
    samples_theta0: &[Sample],
    crn: bool,
    quad: &QuadratureSettings,
) -> Result<RatioEstimate> {
    model.check_theta(theta)?;
    model.check_theta(theta0)?;
    let k = sample_size(samples_theta)?;
    if sample_size(samples_theta0)? != k || samples_theta0.len() != samples_theta.len() {
        return Err(Error::ShapeMismatch(
            "numerator and denominator sample sets differ in shape".into(),
        ));
    }
    let r1 = log_ratios(model, theta, samples_theta, quad)?;
    let r2 = log_ratios(model, theta0, samples_theta0, quad)?;
    RatioEstimate::from_log_ratios(theta, theta0, k, &r1, &r2, crn)
}

/// f̂(θ) from two uniform matrices. Passing the same matrix twice gives a
/// common-random-numbers estimate (`crn = true`).
pub fn f_hat(
    model: Model,
    theta: f64,
    theta0: f64,
    u_theta: &UniformMatrix,
    u_theta0: &UniformMatrix,
    quad: &QuadratureSettings,
) -> Result<RatioEstimate> {
    if u_theta.shape() != u_theta0.shape() {
        return Err(Error::ShapeMismatch(format!(
            "uniform matrices {:?} and {:?}",
            u_theta.shape(),
            u_theta0.shape()
        )));
    }
    let crn = u_theta == u_theta0;
    let s1 = sample_matrix(model, u_theta, theta)?;
    let s2 = sample_matrix(model, u_theta0, theta0)?;
    f_hat_from_samples(model, theta, theta0, &s1, &s2, crn, quad)
}

/// f̂_NAC(θ): samples are drawn at θ from `u` and carried to θ₀ with the
/// model's CRN transform, so both sides share every uniform.
pub fn fnac_hat(
    model: Model,
    theta: f64,
    theta0: f64,
    u: &UniformMatrix,
    quad: &QuadratureSettings,
) -> Result<RatioEstimate> {
    let samples = sample_matrix(model, u, theta)?;
    let samples0 = crn_samples(model, &samples, theta, theta0)?;
    f_hat_from_samples(model, theta, theta0, &samples, &samples0, true, quad)
}

/// Value f̂_NAC takes for the exponential model whatever the draw: θ₀/θ.
pub fn fnac_exp_closed_form(theta: f64, theta0: f64) -> Result<f64> {
    if !(theta > 0.0) || !(theta0 > 0.0) {
        return Err(Error::domain(format!(
            "theta and theta0 must be positive, got {theta} and {theta0}"
        )));
    }
    Ok(theta0 / theta)
}

fn z_for(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    normal_quantile(1.0 - alpha / 2.0)
}

/// `z_{1−α/2} · m^{−1/2} · e^{μ̂₁} · σ̂₁` around f̂_k(θ).
pub fn half_width_fk(est: &FkEstimate, alpha: f64) -> Result<Interval> {
    let z = z_for(alpha)?;
    if est.m < 2 {
        return Err(Error::domain("interval needs m >= 2"));
    }
    let hw = z * est.value * est.sigma1_hat / (est.m as f64).sqrt();
    Ok(Interval::new(est.value, hw, alpha))
}

/// `z_{1−α/2} · m^{−1/2} · e^{μ̂₁−μ̂₂} · √(σ̂₁² + σ̂₂² − 2σ̂₁₂)` around f̂(θ).
pub fn half_width_f(est: &RatioEstimate, alpha: f64) -> Result<Interval> {
    let z = z_for(alpha)?;
    if est.m < 2 {
        return Err(Error::domain("interval needs m >= 2"));
    }
    let sd = est.combined_variance()?.sqrt();
    let hw = z * est.value * sd / (est.m as f64).sqrt();
    Ok(Interval::new(est.value, hw, alpha))
}

/// Result of fitting the proportionality constant between an estimator and a
/// reference prior.
#[derive(Debug, Clone, PartialEq)]
pub struct EarpFit {
    pub a_hat: f64,
    /// Number of ratios lying below the fitted constant, in `0..=R`.
    pub s_hat: usize,
    pub earp_min: f64,
    pub ratios_sorted: Vec<f64>,
}

/// EARP of `estimate / a` against the reference, written on the ratios
/// `estimate / reference`: mean |1 − ratio/a|.
pub fn earp_at(ratios: &[f64], a: f64) -> f64 {
    ratios.iter().map(|r| (1.0 - r / a).abs()).sum::<f64>() / ratios.len() as f64
}

/// Finds the constant `a` minimizing the EARP of `estimate / a` against
/// `reference`.
///
/// With the ratios sorted, EARP as a function of `a` is piecewise with one
/// candidate per split index `s` (the number of ratios below `a`): the
/// smallest ratio for `s = 0`, the `(s+1)`-th for `0 < s < R`, the largest
/// for `s = R`. Each candidate is scored by the closed-form piecewise
/// expression and the best is kept; near-ties go to the smaller `s`.
pub fn fit_constant_earp<F: Fn(f64) -> f64>(estimates: &[(f64, f64)], reference: F) -> Result<EarpFit> {
    if estimates.is_empty() {
        return Err(Error::domain("constant fit needs at least one grid point"));
    }
    let mut ratios = Vec::with_capacity(estimates.len());
    for &(theta, est) in estimates {
        let f = reference(theta);
        if !(est > 0.0 && est.is_finite()) || !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(format!(
                "nonpositive estimate {est} or reference {f} at theta = {theta}"
            )));
        }
        ratios.push(est / f);
    }
    ratios.sort_by(f64::total_cmp);

    let r = ratios.len();
    let rf = r as f64;
    let total: f64 = ratios.iter().sum();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut lower = 0.0;
    for s in 0..=r {
        let (a, e) = if s == 0 {
            let a = ratios[0];
            (a, total / (a * rf) - 1.0)
        } else if s < r {
            lower += ratios[s - 1];
            let a = ratios[s];
            (a, 2.0 * s as f64 / rf - 1.0 + ((total - lower) - lower) / (a * rf))
        } else {
            let a = ratios[r - 1];
            (a, 1.0 - total / (a * rf))
        };
        let e = e.max(0.0);
        let better = match best {
            None => true,
            Some((_, _, be)) => e < be - 1e-12 * (1.0 + be),
        };
        if better {
            best = Some((s, a, e));
        }
    }
    let (s_hat, a_hat, earp_min) = best.expect("R >= 1");
    Ok(EarpFit {
        a_hat,
        s_hat,
        earp_min,
        ratios_sorted: ratios,
    })
}
