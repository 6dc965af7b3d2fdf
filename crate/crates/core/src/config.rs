//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! model = unif_sq
//! theta_grid = linear(100, 1.05, 3)
//! k_values = 5, 10, 20
//! estimators = fk, f, fnac
//! ```
//!
//! `theta_grid` is either a comma-separated list of values or one of
//! `linear(R, low, high)`, `log(R, low, high)` and `random(R, low, high)`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::models::Model;
use crate::quadrature::{QuadratureSettings, TailTransform};
use crate::sampling::{stream_uniform, StreamKey};

/// Path reserved for the stream that draws random θ-grids.
pub const GRID_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaGrid {
    Explicit(Vec<f64>),
    Spaced {
        count: usize,
        low: f64,
        high: f64,
        spacing: Spacing,
    },
    /// `count` uniform draws from (low, high), fixed by the master seed and
    /// shared by every replication and k.
    Random { count: usize, low: f64, high: f64 },
}

impl ThetaGrid {
    pub fn points(&self, master_seed: u64) -> Vec<f64> {
        match *self {
            ThetaGrid::Explicit(ref v) => v.clone(),
            ThetaGrid::Spaced {
                count,
                low,
                high,
                spacing,
            } => (0..count)
                .map(|i| {
                    let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
                    match spacing {
                        Spacing::Linear => low + t * (high - low),
                        Spacing::Log => (low.ln() + t * (high.ln() - low.ln())).exp(),
                    }
                })
                .collect(),
            ThetaGrid::Random { count, low, high } => {
                let key = StreamKey::new(master_seed, vec![GRID_STREAM]);
                let mut v: Vec<f64> = (0..count as u64)
                    .map(|i| low + stream_uniform(&key, i) * (high - low))
                    .collect();
                v.sort_by(f64::total_cmp);
                v
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(open) = s.find('(') {
            let name = s[..open].trim();
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unclosed parenthesis in theta_grid `{s}`")))?;
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!("`{name}(...)` takes (count, low, high), got `{inner}`")));
            }
            let count = parse_usize("theta_grid count", parts[0])?;
            let low = parse_f64("theta_grid low", parts[1])?;
            let high = parse_f64("theta_grid high", parts[2])?;
            if count == 0 || !(low < high) {
                return Err(Error::Config(format!(
                    "theta_grid needs count >= 1 and low < high, got `{s}`"
                )));
            }
            return match name {
                "linear" => Ok(ThetaGrid::Spaced {
                    count,
                    low,
                    high,
                    spacing: Spacing::Linear,
                }),
                "log" => {
                    if !(low > 0.0) {
                        return Err(Error::Config("log spacing needs a positive lower end".into()));
                    }
                    Ok(ThetaGrid::Spaced {
                        count,
                        low,
                        high,
                        spacing: Spacing::Log,
                    })
                }
                "random" => Ok(ThetaGrid::Random { count, low, high }),
                other => Err(Error::Config(format!(
                    "unknown grid kind `{other}` (expected linear, log or random)"
                ))),
            };
        }
        let values = parse_list(s, |x| parse_f64("theta_grid", x))?;
        if values.is_empty() {
            return Err(Error::Config("theta_grid is empty".into()));
        }
        Ok(ThetaGrid::Explicit(values))
    }
}

impl fmt::Display for ThetaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaGrid::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(", "))
            }
            ThetaGrid::Spaced {
                count,
                low,
                high,
                spacing,
            } => {
                let name = match spacing {
                    Spacing::Linear => "linear",
                    Spacing::Log => "log",
                };
                write!(f, "{name}({count}, {low}, {high})")
            }
            ThetaGrid::Random { count, low, high } => write!(f, "random({count}, {low}, {high})"),
        }
    }
}

/// Number of replicate samples m as a function of the sample size k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MPolicy {
    EqualK,
    Fixed(usize),
}

impl MPolicy {
    pub fn m_for(self, k: usize) -> usize {
        match self {
            MPolicy::EqualK => k,
            MPolicy::Fixed(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub theta_grid: ThetaGrid,
    pub theta0: f64,
    pub k_values: Vec<usize>,
    pub m_policy: MPolicy,
    pub alpha: f64,
    pub estimators: Vec<Estimator>,
    pub replications: u64,
    pub master_seed: u64,
    pub quad: QuadratureSettings,
    /// Directory receiving `records.csv` and `summary.csv`.
    pub output_path: Option<PathBuf>,
}

/// Grid used when a configuration does not name one.
pub fn default_grid(model: Model) -> ThetaGrid {
    let (low, high, spacing) = match model {
        Model::ExpRate => (0.1, 10.0, Spacing::Log),
        Model::Unif0Theta => (2.0, 899.0, Spacing::Linear),
        Model::UnifThetaThetaSq => (1.05, 3.0, Spacing::Linear),
        Model::Triangular01 => (0.05, 0.95, Spacing::Linear),
    };
    ThetaGrid::Spaced {
        count: 100,
        low,
        high,
        spacing,
    }
}

impl ExperimentConfig {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            theta_grid: default_grid(model),
            theta0: model.default_theta0(),
            k_values: vec![5, 10, 20, 35, 50],
            m_policy: MPolicy::EqualK,
            alpha: 0.05,
            estimators: vec![Estimator::Fk, Estimator::F],
            replications: 1,
            master_seed: 0,
            quad: QuadratureSettings::default(),
            output_path: None,
        }
    }

    pub fn grid_points(&self) -> Vec<f64> {
        self.theta_grid.points(self.master_seed)
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.model;
        for &t in &self.grid_points() {
            if !model.in_domain(t) {
                return Err(Error::Config(format!("grid point {t} outside the domain of {model}")));
            }
        }
        if !model.in_domain(self.theta0) {
            return Err(Error::Config(format!(
                "theta0 = {} outside the domain of {model}",
                self.theta0
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        if self.k_values.is_empty() {
            return Err(Error::Config("k_values is empty".into()));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k < 2) {
            return Err(Error::Config(format!("k = {k} is below 2")));
        }
        if let MPolicy::Fixed(m) = self.m_policy {
            if m < 2 {
                return Err(Error::Config(format!("m = {m} is below 2")));
            }
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators selected".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        self.quad.validate()
    }

    /// Builds a configuration from parsed key-value pairs. `model` is
    /// required; everything else falls back to [`ExperimentConfig::new`].
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let model: Model = map
            .get("model")
            .ok_or_else(|| Error::Config("missing required key `model`".into()))?
            .parse()?;
        let mut cfg = Self::new(model);
        for (key, value) in map.iter() {
            let v = value.as_str();
            match key.as_str() {
                "model" => {}
                "theta_grid" => cfg.theta_grid = ThetaGrid::parse(v)?,
                "theta0" => cfg.theta0 = parse_f64(key, v)?,
                "k_values" => cfg.k_values = parse_list(v, |x| parse_usize(key, x))?,
                "m" => {
                    cfg.m_policy = if v == "equal_k" {
                        MPolicy::EqualK
                    } else {
                        MPolicy::Fixed(parse_usize(key, v)?)
                    }
                }
                "alpha" => cfg.alpha = parse_f64(key, v)?,
                "estimators" => cfg.estimators = parse_list(v, str::parse)?,
                "replications" => cfg.replications = parse_u64(key, v)?,
                "master_seed" | "seed" => cfg.master_seed = parse_u64(key, v)?,
                "quad_rel_tol" => cfg.quad.rel_tol = parse_f64(key, v)?,
                "quad_abs_tol" => cfg.quad.abs_tol = parse_f64(key, v)?,
                "quad_max_subdivisions" => cfg.quad.max_subdivisions = parse_usize(key, v)?,
                "quad_tail_transform" => cfg.quad.infinite_tail_transform = TailTransform::parse(v)?,
                "output_path" => cfg.output_path = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        let mut seen = Vec::new();
        cfg.estimators.retain(|e| {
            let fresh = !seen.contains(e);
            seen.push(*e);
            fresh
        });
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `overrides` on top of it.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut map = ConfigMap::parse(&text)?;
        for (k, v) in overrides {
            map.set(k, v)?;
        }
        Self::from_map(&map)
    }
}

pub const KNOWN_KEYS: &[&str] = &[
    "model",
    "theta_grid",
    "theta0",
    "k_values",
    "m",
    "alpha",
    "estimators",
    "replications",
    "master_seed",
    "seed",
    "quad_rel_tol",
    "quad_abs_tol",
    "quad_max_subdivisions",
    "quad_tail_transform",
    "output_path",
];

/// Raw key-value pairs from a config file, keys checked against
/// [`KNOWN_KEYS`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            if map.entries.contains_key(k) {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
            map.set(k, v.trim())?;
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.entries.iter()
    }
}

/// Splits `key=value` as given on a command line.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(f)
        .collect()
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("`{key}`: `{v}` is not a finite number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a nonnegative integer")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{v}` is not a nonnegative integer")))
}
