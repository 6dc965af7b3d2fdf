//! Sample fixtures: fixed samples fed through the estimators in place of
//! simulated draws.
//!
//! ```text
//! # optional comments
//! theta = 5
//! 2.643036 2.525562 0.960058 4.832099 4.272201
//! 2.174483 2.483448 1.491607 4.914156 0.174570
//! theta = 1
//! 0.302285 0.423168 0.138452 0.616580 0.575441
//! 0.307996 0.862337 0.886713 0.442853 0.799809
//! ```
//!
//! Each row is one sample; values are separated by whitespace or commas.

use std::path::Path;

use crate::error::{Error, Result};
use crate::models::Sample;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureBlock {
    pub theta: f64,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fixture {
    pub blocks: Vec<FixtureBlock>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks: Vec<FixtureBlock> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if key.trim() != "theta" {
                    return Err(Error::Config(format!("fixture line {}: unknown key `{}`", n + 1, key.trim())));
                }
                let theta = value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("fixture line {}: bad theta `{}`", n + 1, value.trim())))?;
                if blocks.iter().any(|b| b.theta == theta) {
                    return Err(Error::Config(format!("fixture line {}: theta {theta} repeated", n + 1)));
                }
                blocks.push(FixtureBlock {
                    theta,
                    samples: Vec::new(),
                });
                continue;
            }
            let block = blocks
                .last_mut()
                .ok_or_else(|| Error::Config(format!("fixture line {}: sample before any `theta =`", n + 1)))?;
            let values = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("fixture line {}: bad number `{s}`", n + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            if let Some(first) = block.samples.first() {
                if first.len() != values.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "fixture line {}: {} values, expected {}",
                        n + 1,
                        values.len(),
                        first.len()
                    )));
                }
            }
            block.samples.push(Sample::new(values));
        }
        if blocks.is_empty() {
            return Err(Error::Config("fixture has no `theta =` block".into()));
        }
        Ok(Self { blocks })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read fixture {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Samples recorded for θ (exact match).
    pub fn samples_at(&self, theta: f64) -> Result<&[Sample]> {
        self.blocks
            .iter()
            .find(|b| b.theta == theta)
            .map(|b| b.samples.as_slice())
            .ok_or_else(|| Error::Config(format!("fixture has no samples for theta = {theta}")))
    }
}
