//! Deterministic uniform streams and inverse-transform sample matrices.
//!
//! Every uniform is a pure function of `(master_seed, path, counter)`, so any
//! substream can be regenerated on its own and in any order. Reusing one
//! [`UniformMatrix`] at two parameter values is exactly what common random
//! numbers means here.

use crate::error::{Error, Result};
use crate::models::{Model, Sample};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one substream: a master seed plus a hierarchical path such as
/// `[replication, theta_index, stream]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub path: Vec<u64>,
}

impl StreamKey {
    pub fn new(master_seed: u64, path: impl Into<Vec<u64>>) -> Self {
        Self {
            master_seed,
            path: path.into(),
        }
    }

    /// Extends the path by one level.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    fn digest(&self) -> u64 {
        let mut h = mix64(self.master_seed);
        for (depth, &p) in self.path.iter().enumerate() {
            h = mix64(h ^ mix64(p ^ ((depth as u64 + 1).wrapping_mul(GOLDEN))));
        }
        mix64(h ^ self.path.len() as u64)
    }

    /// `seed:p0/p1/...`
    pub fn label(&self) -> String {
        let path: Vec<String> = self.path.iter().map(u64::to_string).collect();
        format!("{}:{}", self.master_seed, path.join("/"))
    }
}

const U_MIN: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
const U_MAX: f64 = 1.0 - U_MIN;

#[inline]
fn to_unit(bits: u64) -> f64 {
    let u = ((bits >> 11) as f64 + 0.5) * U_MIN;
    u.clamp(U_MIN, U_MAX)
}

/// The `counter`-th uniform of a stream.
pub fn stream_uniform(key: &StreamKey, counter: u64) -> f64 {
    let h = key.digest();
    to_unit(mix64(mix64(counter ^ h) ^ h.rotate_left(32)))
}

/// m × k matrix of uniforms in the open unit interval, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformMatrix {
    u: Vec<f64>,
    rows: usize,
    cols: usize,
    key: Option<StreamKey>,
}

impl UniformMatrix {
    /// Builds a matrix from explicit rows, e.g. to force a particular draw.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::ShapeMismatch("uniform matrix needs at least one row".into()));
        }
        let k = rows[0].len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::ShapeMismatch("uniform matrix rows must share a nonzero length".into()));
        }
        let u: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(bad) = u.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::domain(format!("uniform entry {bad} outside (0, 1)")));
        }
        Ok(Self {
            u,
            rows: m,
            cols: k,
            key: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn key(&self) -> Option<&StreamKey> {
        self.key.as_ref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.u[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.u[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }
}

/// Deterministic m × k uniform matrix for a stream key.
pub fn uniform_matrix(key: &StreamKey, m: usize, k: usize) -> UniformMatrix {
    let h = key.digest();
    let hr = h.rotate_left(32);
    let u = (0..(m * k) as u64)
        .map(|c| to_unit(mix64(mix64(c ^ h) ^ hr)))
        .collect();
    UniformMatrix {
        u,
        rows: m,
        cols: k,
        key: Some(key.clone()),
    }
}

/// Row j of the result is the sample F⁻¹(U[j, ·]; θ).
pub fn sample_matrix(model: Model, u: &UniformMatrix, theta: f64) -> Result<Vec<Sample>> {
    model.check_theta(theta)?;
    (0..u.rows())
        .map(|j| {
            let values = u
                .row(j)
                .iter()
                .map(|&x| model.inverse_cdf(x, theta))
                .collect::<Result<Vec<_>>>()?;
            Ok(Sample::new(values))
        })
        .collect()
}

/// Maps samples drawn at θ to θ₀ through the model's CRN transform.
pub fn crn_samples(model: Model, samples: &[Sample], theta: f64, theta0: f64) -> Result<Vec<Sample>> {
    samples
        .iter()
        .map(|s| {
            let values = s
                .values()
                .iter()
                .map(|&y| model.crn_transform(y, theta, theta0))
                .collect::<Result<Vec<_>>>()?;
            Ok(Sample::new(values))
        })
        .collect()
}
