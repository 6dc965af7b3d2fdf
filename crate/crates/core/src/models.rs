//! The four one-parameter families and everything the estimators need from
//! them: log likelihoods, marginal constants under a flat initial prior,
//! inverse CDFs, common-random-number maps and the known reference priors.
//!
//! All likelihood arithmetic stays on the log scale. A likelihood that is
//! zero because θ is incompatible with the sample (support-dependent models)
//! is reported as `f64::NEG_INFINITY`, not as an error.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::{log_integrate, log_sum_exp, QuadratureSettings};
use crate::special::{digamma, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    /// Exponential with rate θ: p(y|θ) = θ e^{−θy}, θ ∈ (0, ∞).
    ExpRate,
    /// Uniform on (0, θ), θ ∈ (0, ∞).
    Unif0Theta,
    /// Uniform on (θ, θ²), θ ∈ (1, ∞).
    UnifThetaThetaSq,
    /// Triangular on (0, 1) with mode θ ∈ (0, 1).
    Triangular01,
}

pub const ALL_MODELS: [Model; 4] = [
    Model::ExpRate,
    Model::Unif0Theta,
    Model::UnifThetaThetaSq,
    Model::Triangular01,
];

impl Model {
    pub fn id(self) -> &'static str {
        match self {
            Model::ExpRate => "exp",
            Model::Unif0Theta => "unif0",
            Model::UnifThetaThetaSq => "unif_sq",
            Model::Triangular01 => "triangular",
        }
    }

    /// Open parameter interval.
    pub fn theta_domain(self) -> (f64, f64) {
        match self {
            Model::ExpRate | Model::Unif0Theta => (0.0, f64::INFINITY),
            Model::UnifThetaThetaSq => (1.0, f64::INFINITY),
            Model::Triangular01 => (0.0, 1.0),
        }
    }

    pub fn in_domain(self, theta: f64) -> bool {
        let (lo, hi) = self.theta_domain();
        theta > lo && theta < hi && theta.is_finite()
    }

    pub fn check_theta(self, theta: f64) -> Result<()> {
        if self.in_domain(theta) {
            Ok(())
        } else {
            let (lo, hi) = self.theta_domain();
            Err(Error::domain(format!(
                "theta = {theta} outside ({lo}, {hi}) for model {self}"
            )))
        }
    }

    /// Anchor θ₀ used by the ratio estimators unless overridden.
    pub fn default_theta0(self) -> f64 {
        match self {
            Model::ExpRate | Model::Unif0Theta => 1.0,
            Model::UnifThetaThetaSq => 1.001,
            Model::Triangular01 => 0.5,
        }
    }

    /// Closed support `[lo, hi]` of p(·|θ).
    pub fn support(self, theta: f64) -> (f64, f64) {
        match self {
            Model::ExpRate => (0.0, f64::INFINITY),
            Model::Unif0Theta => (0.0, theta),
            Model::UnifThetaThetaSq => (theta, theta * theta),
            Model::Triangular01 => (0.0, 1.0),
        }
    }

    /// ln p(y|θ); −∞ outside the support.
    pub fn log_density(self, y: f64, theta: f64) -> f64 {
        match self {
            Model::ExpRate => {
                if y < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    theta.ln() - theta * y
                }
            }
            Model::Unif0Theta => {
                if y < 0.0 || y > theta {
                    f64::NEG_INFINITY
                } else {
                    -theta.ln()
                }
            }
            Model::UnifThetaThetaSq => {
                if y < theta || y > theta * theta {
                    f64::NEG_INFINITY
                } else {
                    -theta.ln() - (theta - 1.0).ln()
                }
            }
            Model::Triangular01 => {
                if y <= 0.0 || y >= 1.0 {
                    f64::NEG_INFINITY
                } else if y <= theta {
                    (2.0 * y / theta).ln()
                } else {
                    (2.0 * (1.0 - y) / (1.0 - theta)).ln()
                }
            }
        }
    }

    pub fn cdf(self, y: f64, theta: f64) -> f64 {
        let (lo, hi) = self.support(theta);
        if y <= lo {
            return 0.0;
        }
        if y >= hi {
            return 1.0;
        }
        match self {
            Model::ExpRate => -(-theta * y).exp_m1(),
            Model::Unif0Theta => y / theta,
            Model::UnifThetaThetaSq => (y - theta) / (theta * (theta - 1.0)),
            Model::Triangular01 => {
                if y <= theta {
                    y * y / theta
                } else {
                    1.0 - (1.0 - y) * (1.0 - y) / (1.0 - theta)
                }
            }
        }
    }

    /// F⁻¹(u; θ) for u ∈ (0, 1).
    pub fn inverse_cdf(self, u: f64, theta: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("u = {u} outside (0, 1)")));
        }
        self.check_theta(theta)?;
        Ok(match self {
            Model::ExpRate => -(-u).ln_1p() / theta,
            Model::Unif0Theta => u * theta,
            Model::UnifThetaThetaSq => theta + u * theta * (theta - 1.0),
            Model::Triangular01 => {
                if u <= theta {
                    (u * theta).sqrt()
                } else {
                    1.0 - ((1.0 - u) * (1.0 - theta)).sqrt()
                }
            }
        })
    }

    /// Maps a value drawn at θ to the value the same uniform produces at θ₀,
    /// i.e. F⁻¹(F(y; θ); θ₀), via per-model closed forms.
    pub fn crn_transform(self, y: f64, theta: f64, theta0: f64) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_theta(theta0)?;
        let (lo, hi) = self.support(theta);
        if !(y >= lo && y <= hi) {
            return Err(Error::domain(format!(
                "y = {y} outside the support [{lo}, {hi}] at theta = {theta}"
            )));
        }
        if theta == theta0 {
            return Ok(y);
        }
        Ok(match self {
            Model::ExpRate => y * (theta / theta0),
            Model::Unif0Theta => y * (theta0 / theta),
            Model::UnifThetaThetaSq => {
                (y - theta) * (theta0 * (theta0 - 1.0) / (theta * (theta - 1.0))) + theta0
            }
            Model::Triangular01 => {
                if y <= theta {
                    let u = y * y / theta;
                    if u <= theta0 {
                        y * (theta0 / theta).sqrt()
                    } else {
                        1.0 - ((1.0 - theta0) * (1.0 - y * y / theta)).sqrt()
                    }
                } else {
                    let tail = (1.0 - y) * (1.0 - y) / (1.0 - theta);
                    let u = 1.0 - tail;
                    if u <= theta0 {
                        (theta0 * u).sqrt()
                    } else {
                        1.0 - (1.0 - y) * ((1.0 - theta0) / (1.0 - theta)).sqrt()
                    }
                }
            }
        })
    }

    /// Σᵢ ln p(yᵢ|θ). Returns −∞ when θ is incompatible with the sample.
    pub fn log_joint(self, sample: &Sample, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let k = sample.len() as f64;
        let neg_inf = f64::NEG_INFINITY;
        Ok(match self {
            Model::ExpRate => {
                if sample.min() < 0.0 {
                    neg_inf
                } else {
                    k * theta.ln() - theta * sample.sum()
                }
            }
            Model::Unif0Theta => {
                if sample.min() < 0.0 || theta < sample.max() {
                    neg_inf
                } else {
                    -k * theta.ln()
                }
            }
            Model::UnifThetaThetaSq => {
                if theta > sample.min() || theta * theta < sample.max() {
                    neg_inf
                } else {
                    -k * (theta.ln() + (theta - 1.0).ln())
                }
            }
            Model::Triangular01 => sample
                .values()
                .iter()
                .map(|&y| self.log_density(y, theta))
                .sum(),
        })
    }

    /// ln c where c = ∫ p(x|θ) dθ over the parameter space (flat initial prior).
    pub fn log_marginal_c(self, sample: &Sample, quad: &QuadratureSettings) -> Result<f64> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let k = sample.len();
        match self {
            Model::ExpRate => {
                let s = sample.sum();
                if !(s > 0.0) || sample.min() < 0.0 {
                    return Err(Error::DegenerateSample(format!(
                        "exponential sample must be positive (sum {s})"
                    )));
                }
                Ok(ln_factorial(k) - (k as f64 + 1.0) * s.ln())
            }
            Model::Unif0Theta => {
                require_k_at_least_two(self, k)?;
                let t = sample.max();
                if !(t > 0.0) || sample.min() < 0.0 {
                    return Err(Error::DegenerateSample(format!(
                        "uniform(0, theta) sample must be positive (max {t})"
                    )));
                }
                let km1 = k as f64 - 1.0;
                Ok(-km1 * t.ln() - km1.ln())
            }
            Model::UnifThetaThetaSq => {
                let lo = sample.max().sqrt();
                let hi = sample.min();
                if !(lo > 1.0 && lo < hi) {
                    return Err(Error::DegenerateSample(format!(
                        "empty theta range ({lo}, {hi}) for uniform(theta, theta^2) sample"
                    )));
                }
                let kf = k as f64;
                log_integrate(|th| -kf * (th.ln() + (th - 1.0).ln()), lo, hi, quad)
            }
            Model::Triangular01 => {
                require_k_at_least_two(self, k)?;
                triangular_log_c(sample.sorted(), quad)
            }
        }
    }

    /// r(θ) = ln p(x|θ) − ln c; −∞ when the likelihood vanishes.
    pub fn r_statistic(self, sample: &Sample, theta: f64, quad: &QuadratureSettings) -> Result<f64> {
        let lj = self.log_joint(sample, theta)?;
        let lc = self.log_marginal_c(sample, quad)?;
        if lj == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(lj - lc)
    }

    pub fn known_prior(self) -> Option<KnownPrior> {
        Some(match self {
            Model::ExpRate | Model::Unif0Theta => KnownPrior::InvTheta,
            Model::UnifThetaThetaSq => KnownPrior::UnifThetaSqForm,
            Model::Triangular01 => KnownPrior::TriangularConjecture,
        })
    }
}

fn require_k_at_least_two(model: Model, k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::domain(format!(
            "model {model} needs samples of size k >= 2 for a finite marginal constant"
        )))
    } else {
        Ok(())
    }
}

/// ln ∫ θ^{−n} dθ over (t, 1), i.e. ln((t^{1−n} − 1)/(n − 1)); ln(−ln t) for n = 1.
fn log_power_tail(n: usize, t: f64) -> f64 {
    let ln_t = t.ln();
    if n == 1 {
        return (-ln_t).ln();
    }
    let nm1 = n as f64 - 1.0;
    // (t^{1-n} − 1)/(n−1) = t^{1-n} (1 − t^{n-1}) / (n−1)
    -nm1 * ln_t + (-(nm1 * ln_t).exp_m1()).ln() - nm1.ln()
}

/// Segment-by-segment ln c for the triangular model.
///
/// Between consecutive order statistics t_(q) < θ < t_(q+1) the likelihood is
/// 2ᵏ Π_{i≤q} t_(i) Π_{i>q} (1 − t_(i)) θ^{−q} (1 − θ)^{−(k−q)}. The two
/// outer segments integrate in closed form, the interior ones by quadrature;
/// everything is accumulated with log-sum-exp.
pub(crate) fn triangular_log_c(sorted: &[f64], quad: &QuadratureSettings) -> Result<f64> {
    let k = sorted.len();
    if sorted[0] <= 0.0 || sorted[k - 1] >= 1.0 {
        return Err(Error::DegenerateSample(
            "triangular sample must lie strictly inside (0, 1)".into(),
        ));
    }
    // prefix[q] = Σ_{i<q} ln t_i, suffix[q] = Σ_{i≥q} ln(1 − t_i) (0-indexed)
    let mut prefix = vec![0.0; k + 1];
    let mut suffix = vec![0.0; k + 1];
    for i in 0..k {
        prefix[i + 1] = prefix[i] + sorted[i].ln();
    }
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + (-sorted[i]).ln_1p();
    }
    let mut terms = Vec::with_capacity(k + 1);
    // θ ∈ (0, t_(1)): every observation lies above the mode
    terms.push(suffix[0] + log_power_tail(k, 1.0 - sorted[0]));
    for q in 1..k {
        let (lo, hi) = (sorted[q - 1], sorted[q]);
        if hi <= lo {
            continue;
        }
        let (qf, rest) = (q as f64, (k - q) as f64);
        let seg = log_integrate(|th| -qf * th.ln() - rest * (-th).ln_1p(), lo, hi, quad)?;
        terms.push(prefix[q] + suffix[q] + seg);
    }
    // θ ∈ (t_(k), 1): every observation lies below the mode
    terms.push(prefix[k] + log_power_tail(k, sorted[k - 1]));
    Ok(k as f64 * std::f64::consts::LN_2 + log_sum_exp(terms))
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(Model::ExpRate),
            "unif0" | "unif_0_theta" => Ok(Model::Unif0Theta),
            "unif_sq" | "unif_theta_theta_sq" => Ok(Model::UnifThetaThetaSq),
            "triangular" | "trian" => Ok(Model::Triangular01),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected exp, unif0, unif_sq or triangular)"
            ))),
        }
    }
}

/// Closed-form reference prior (up to a constant) for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnownPrior {
    /// θ⁻¹
    InvTheta,
    /// (2θ − 1)/(θ(θ − 1)) · exp(ψ(2θ/(2θ − 1)) − 1)
    UnifThetaSqForm,
    /// θ^{−1/2}(1 − θ)^{−1/2}; conjectured, not proven.
    TriangularConjecture,
}

impl KnownPrior {
    pub fn evaluate(self, theta: f64) -> f64 {
        match self {
            KnownPrior::InvTheta => 1.0 / theta,
            KnownPrior::UnifThetaSqForm => {
                let s = 2.0 * theta - 1.0;
                let psi = digamma(2.0 * theta / s).expect("argument is positive for theta > 1");
                s / (theta * (theta - 1.0)) * (psi - 1.0).exp()
            }
            KnownPrior::TriangularConjecture => 1.0 / (theta * (1.0 - theta)).sqrt(),
        }
    }

    pub fn is_conjecture(self) -> bool {
        matches!(self, KnownPrior::TriangularConjecture)
    }
}

/// f(θ) for a model, up to proportionality.
pub fn known_prior(model: Model, theta: f64) -> Result<Option<f64>> {
    model.check_theta(theta)?;
    Ok(model.known_prior().map(|p| p.evaluate(theta)))
}

/// One simulated sample with its order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Self { values, sorted }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Order statistics t_(1) ≤ … ≤ t_(k).
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl From<Vec<f64>> for Sample {
    fn from(values: Vec<f64>) -> Self {
        Sample::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn log_joint_examples() {
        let s = Sample::new(vec![1.0, 2.0]);
        assert!((Model::ExpRate.log_joint(&s, 1.0).unwrap() + 3.0).abs() < 1e-15);
        let s = Sample::new(vec![0.5, 1.0]);
        let v = Model::Unif0Theta.log_joint(&s, 2.0).unwrap();
        assert!((v - 0.25f64.ln()).abs() < 1e-12);
        assert_eq!(Model::Unif0Theta.log_joint(&s, 0.9).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn log_joint_errors() {
        let s = Sample::new(vec![0.5]);
        assert!(matches!(Model::ExpRate.log_joint(&s, -1.0), Err(Error::Domain(_))));
        assert!(matches!(Model::UnifThetaThetaSq.log_joint(&s, 1.0), Err(Error::Domain(_))));
        assert!(matches!(
            Model::ExpRate.log_joint(&Sample::new(vec![]), 1.0),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn unif_sq_support_indicator() {
        // sample in (2, 4) and (1.9, 3.61): θ must satisfy √max ≤ θ ≤ min
        let s = Sample::new(vec![2.2, 3.0]);
        let m = Model::UnifThetaThetaSq;
        assert!(m.log_joint(&s, 2.0).unwrap().is_finite());
        assert_eq!(m.log_joint(&s, 2.3).unwrap(), f64::NEG_INFINITY);
        assert_eq!(m.log_joint(&s, 1.7).unwrap(), f64::NEG_INFINITY);
        assert_eq!(m.r_statistic(&s, 2.3, &quad()).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn marginal_constant_closed_forms() {
        let c = Model::ExpRate
            .log_marginal_c(&Sample::new(vec![1.0, 1.0]), &quad())
            .unwrap();
        assert!((c - 0.25f64.ln()).abs() < 1e-14);
        // worked example, first row: c ≈ 0.000459
        let s = Sample::new(vec![2.643036, 2.525562, 0.960058, 4.832099, 4.272201]);
        let c = Model::Unif0Theta.log_marginal_c(&s, &quad()).unwrap().exp();
        assert!((c - 0.000459).abs() / 0.000459 < 1e-3);
    }

    #[test]
    fn marginal_constant_preconditions() {
        let one = Sample::new(vec![0.4]);
        assert!(Model::Unif0Theta.log_marginal_c(&one, &quad()).is_err());
        assert!(Model::Triangular01.log_marginal_c(&one, &quad()).is_err());
        // √max ≥ min leaves no admissible θ
        let bad = Sample::new(vec![1.5, 3.5]);
        assert!(matches!(
            Model::UnifThetaThetaSq.log_marginal_c(&bad, &quad()),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn triangular_single_point_matches_analytic() {
        // k = 1: c = −2(1−t)ln(1−t) − 2t ln t, via the segment routine with the
        // logarithmic form of the outer segments
        for &t in &[0.5f64, 0.2, 0.9] {
            let want: f64 = -2.0 * (1.0 - t) * (1.0 - t).ln() - 2.0 * t * t.ln();
            let got = triangular_log_c(&[t], &quad()).unwrap().exp();
            assert!((got - want).abs() < 1e-12, "t={t}: {got} vs {want}");
        }
        let c = triangular_log_c(&[0.5], &quad()).unwrap().exp();
        assert!((c - 1.386294).abs() < 1e-6);
    }

    #[test]
    fn r_statistic_examples() {
        let r = Model::ExpRate
            .r_statistic(&Sample::new(vec![1.0]), 1.0, &quad())
            .unwrap();
        assert!((r + 1.0).abs() < 1e-14);
        let r = Model::Unif0Theta
            .r_statistic(&Sample::new(vec![0.5, 1.0]), 2.0, &quad())
            .unwrap();
        assert!((r - 0.25f64.ln()).abs() < 1e-12);
        let s = Sample::new(vec![2.643036, 2.525562, 0.960058, 4.832099, 4.272201]);
        let r = Model::Unif0Theta.r_statistic(&s, 5.0, &quad()).unwrap();
        assert!((r + 0.359772).abs() < 1e-3);
    }

    #[test]
    fn inverse_cdf_examples() {
        assert!((Model::ExpRate.inverse_cdf(0.5, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(Model::UnifThetaThetaSq.inverse_cdf(0.5, 2.0).unwrap(), 3.0);
        assert!((Model::Triangular01.inverse_cdf(0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(Model::ExpRate.inverse_cdf(0.0, 1.0).is_err());
        assert!(Model::ExpRate.inverse_cdf(1.0, 1.0).is_err());
        assert!(Model::Triangular01.inverse_cdf(0.5, 1.0).is_err());
    }

    #[test]
    fn crn_examples() {
        assert_eq!(Model::ExpRate.crn_transform(3.0, 2.0, 1.0).unwrap(), 6.0);
        assert_eq!(Model::Triangular01.crn_transform(0.25, 0.5, 0.5).unwrap(), 0.25);
        for m in ALL_MODELS {
            let theta = m.default_theta0() + 0.3;
            let y = m.inverse_cdf(0.37, theta).unwrap();
            assert_eq!(m.crn_transform(y, theta, theta).unwrap(), y);
        }
        assert!(Model::Unif0Theta.crn_transform(3.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn known_prior_examples() {
        assert_eq!(known_prior(Model::ExpRate, 2.0).unwrap(), Some(0.5));
        assert!((known_prior(Model::Unif0Theta, 5.0).unwrap().unwrap() - 0.2).abs() < 1e-15);
        assert!((known_prior(Model::Triangular01, 0.5).unwrap().unwrap() - 2.0).abs() < 1e-15);
        // mpmath: (2θ−1)/(θ(θ−1)) e^{ψ(2θ/(2θ−1))−1} at θ = 2
        let v = known_prior(Model::UnifThetaThetaSq, 2.0).unwrap().unwrap();
        assert!((v - 0.483_565_418_192_351_65).abs() < 1e-10);
        assert!(KnownPrior::TriangularConjecture.is_conjecture());
        assert!(!KnownPrior::InvTheta.is_conjecture());
    }

    #[test]
    fn model_ids_round_trip() {
        for m in ALL_MODELS {
            assert_eq!(m.id().parse::<Model>().unwrap(), m);
        }
        assert!("gamma".parse::<Model>().is_err());
    }
}
