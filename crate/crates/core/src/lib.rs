//! Monte Carlo estimation of one-parameter reference priors.
//!
//! The reference prior of a model is approximated on a grid of parameter
//! values by simulating replicate samples, integrating each sample's
//! likelihood over the parameter with a flat initial prior, and averaging the
//! resulting log ratios. Three estimators are provided: the unnormalized
//! `f̂_k`, the anchored ratio `f̂ = f̂_k(θ)/f̂_k(θ₀)`, and the same ratio under
//! common random numbers, which removes most of its Monte Carlo noise.
//!
//! Every estimate carries the summaries needed for a delta-method interval,
//! and [`metrics`] scores a grid of estimates against the known (or
//! conjectured) prior after fitting the unknown proportionality constant.
//!
//! # Examples
//!
//! Each capability has a runnable example:
//!
//! - `worked_example`: the estimators applied by hand to five fixed samples
//! - `marginal_constants`: the per-sample constant for every model, checked
//!   against brute-force integration
//! - `quadrature`: the adaptive integrator on singular, infinite and
//!   log-scale integrands
//! - `constant_fitting`: fitting the proportionality constant on a grid
//! - `intervals_and_coverage`: delta-method intervals and their coverage as
//!   `k` grows
//! - `common_random_numbers`: exact and variance-reduced ratio estimates
//! - `k_sweep`: a full sweep from a config file, written to CSV
//!
//! ```bash
//! cargo run --release --example k_sweep
//! ```

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod fixture;
pub mod metrics;
pub mod models;
pub mod quadrature;
pub mod sampling;
pub mod selftest;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{
    f_hat, fit_constant_earp, fk_hat, fnac_hat, half_width_f, half_width_fk, EarpFit, Estimator, FkEstimate,
    Interval, RatioEstimate,
};
pub use metrics::{amrp, coverage, earp, GridEntry, GridEvaluation};
pub use models::{known_prior, KnownPrior, Model, Sample, ALL_MODELS};
pub use quadrature::{QuadratureSettings, TailTransform};
pub use sampling::{sample_matrix, uniform_matrix, StreamKey, UniformMatrix};
