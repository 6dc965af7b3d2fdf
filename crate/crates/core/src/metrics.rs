//! Grid-level accuracy measures: EARP, AMRP and empirical coverage.
//!
//! Each entry carries the reference prior already multiplied by the fitted
//! constant, so all three measures are plain averages of per-point ratios.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEntry {
    pub theta: f64,
    pub estimate: f64,
    pub half_width: f64,
    /// constant · f(θ)
    pub scaled_ref: f64,
}

impl GridEntry {
    pub fn lo(&self) -> f64 {
        self.estimate - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.estimate + self.half_width
    }

    /// Strict containment: a reference on the boundary is not covered.
    pub fn covers(&self) -> bool {
        self.lo() < self.scaled_ref && self.scaled_ref < self.hi()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEvaluation {
    entries: Vec<GridEntry>,
}

impl GridEvaluation {
    pub fn new(entries: Vec<GridEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("grid evaluation needs at least one point"));
        }
        if let Some(e) = entries.iter().find(|e| !(e.scaled_ref > 0.0 && e.scaled_ref.is_finite())) {
            return Err(Error::domain(format!(
                "scaled reference {} at theta = {} must be positive",
                e.scaled_ref, e.theta
            )));
        }
        if let Some(e) = entries.iter().find(|e| !(e.half_width >= 0.0)) {
            return Err(Error::domain(format!(
                "half width {} at theta = {} must be nonnegative",
                e.half_width, e.theta
            )));
        }
        Ok(Self { entries })
    }

    /// Builds entries from parallel slices of θ, estimates, half-widths and
    /// unscaled reference values, scaling the latter by `constant`.
    pub fn from_parts(
        thetas: &[f64],
        estimates: &[f64],
        half_widths: &[f64],
        reference: &[f64],
        constant: f64,
    ) -> Result<Self> {
        let r = thetas.len();
        if estimates.len() != r || half_widths.len() != r || reference.len() != r {
            return Err(Error::ShapeMismatch("grid columns differ in length".into()));
        }
        let entries = (0..r)
            .map(|l| GridEntry {
                theta: thetas[l],
                estimate: estimates[l],
                half_width: half_widths[l],
                scaled_ref: constant * reference[l],
            })
            .collect();
        Self::new(entries)
    }

    pub fn entries(&self) -> &[GridEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn average(&self, f: impl Fn(&GridEntry) -> f64) -> f64 {
        self.entries.iter().map(f).sum::<f64>() / self.entries.len() as f64
    }
}

/// Mean of |scaled_ref − estimate| / scaled_ref.
pub fn earp(grid: &GridEvaluation) -> f64 {
    grid.average(|e| (e.scaled_ref - e.estimate).abs() / e.scaled_ref)
}

/// Mean of half_width / scaled_ref.
pub fn amrp(grid: &GridEvaluation) -> f64 {
    grid.average(|e| e.half_width / e.scaled_ref)
}

/// Fraction of points whose open interval contains scaled_ref.
pub fn coverage(grid: &GridEvaluation) -> f64 {
    grid.entries.iter().filter(|e| e.covers()).count() as f64 / grid.entries.len() as f64
}
