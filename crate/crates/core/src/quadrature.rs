//! Adaptive one-dimensional quadrature.
//!
//! Globally adaptive bisection driven by the 15-point Gauss–Kronrod rule with
//! its embedded 7-point Gauss rule as error estimate. Semi-infinite ranges are
//! mapped onto (0, 1) before integrating. [`log_integrate`] works on log
//! integrands and never exponentiates anything that could overflow or
//! underflow as a whole.

use crate::error::{Error, Result};

/// How a range `(a, +∞)` is mapped onto `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailTransform {
    /// θ = a + x / (1 − x)
    #[default]
    OneOverX,
    /// θ = a − ln(1 − x)
    ExpDecay,
}

impl TailTransform {
    fn map(self, a: f64, x: f64) -> (f64, f64) {
        match self {
            TailTransform::OneOverX => {
                let one_minus = 1.0 - x;
                (a + x / one_minus, 1.0 / (one_minus * one_minus))
            }
            TailTransform::ExpDecay => (a - (-x).ln_1p(), 1.0 / (1.0 - x)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TailTransform::OneOverX => "one_over_x",
            TailTransform::ExpDecay => "exp_decay",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "one_over_x" | "OneOverX" => Ok(TailTransform::OneOverX),
            "exp_decay" | "ExpDecay" => Ok(TailTransform::ExpDecay),
            other => Err(Error::Config(format!("unknown tail transform `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub infinite_tail_transform: TailTransform,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            infinite_tail_transform: TailTransform::OneOverX,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Config("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 10 {
            return Err(Error::Config("max_subdivisions must be at least 10".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub subdivisions_used: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes, last entry is the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn check(v: f64, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NanIntegrand { at })
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = check(f(center), center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let f1 = check(f(x1), x1)?;
        let f2 = check(f(x2), x2)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;

    // QUADPACK error rescaling
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, err })
}

fn adaptive_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<QuadResult> {
    let first = gk15(f, a, b)?;
    let mut segments = vec![first];
    let mut total = first.value;
    let mut total_err = first.err;
    let tolerance = |total: f64| settings.abs_tol.max(settings.rel_tol * total.abs());

    while total_err > tolerance(total) {
        if segments.len() >= settings.max_subdivisions {
            return Err(Error::Quadrature(format!(
                "error estimate {total_err:.3e} above tolerance after {} subdivisions on [{a}, {b}]",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        let left = gk15(f, seg.a, mid)?;
        let right = gk15(f, mid, seg.b)?;
        total += left.value + right.value - seg.value;
        segments.push(left);
        segments.push(right);
        // Recompute rather than update incrementally so the estimate cannot drift.
        total_err = segments.iter().map(|s| s.err).sum();
    }
    // Final value summed in interval order for reproducibility.
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    Ok(QuadResult {
        value,
        err_estimate: total_err,
        subdivisions_used: segments.len(),
    })
}

/// Integrates `f` over `(a, b)`; `b` may be `f64::INFINITY`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are allowed.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<QuadResult> {
    settings.validate()?;
    if !a.is_finite() || b.is_nan() || !(a < b) {
        return Err(Error::domain(format!("invalid integration range ({a}, {b})")));
    }
    if b.is_finite() {
        adaptive_finite(&f, a, b, settings)
    } else {
        let transform = settings.infinite_tail_transform;
        let g = |x: f64| {
            let (theta, jac) = transform.map(a, x);
            let v = f(theta);
            // exact zero stays zero even where the jacobian blows up
            if v == 0.0 {
                0.0
            } else {
                v * jac
            }
        };
        adaptive_finite(&g, 0.0, 1.0, settings)
    }
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], …`, which lets the
/// rule see every kink or jump the caller knows about. The last point may be
/// `+∞`. Empty pieces are skipped.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    settings: &QuadratureSettings,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::domain("need at least two breakpoints"));
    }
    let mut out = QuadResult {
        value: 0.0,
        err_estimate: 0.0,
        subdivisions_used: 0,
    };
    for w in points.windows(2) {
        if w[1] < w[0] {
            return Err(Error::domain("breakpoints must be nondecreasing"));
        }
        if w[1] == w[0] {
            continue;
        }
        let piece = integrate_adaptive(&f, w[0], w[1], settings)?;
        out.value += piece.value;
        out.err_estimate += piece.err_estimate;
        out.subdivisions_used += piece.subdivisions_used;
    }
    Ok(out)
}

/// ln Σ exp(vᵢ), with −∞ for an empty or all −∞ input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

const PROBE_POINTS: usize = 33;
const DENSE_PROBE_POINTS: usize = 1025;

fn probe_max<F: Fn(f64) -> f64>(logf: &F, a: f64, b: f64, n: usize, tail: TailTransform) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut consider = |v: f64| {
        if v.is_finite() && v > best {
            best = v;
        }
    };
    consider(logf(a));
    if b.is_finite() {
        consider(logf(b));
        for i in 1..=n {
            consider(logf(a + (b - a) * i as f64 / (n + 1) as f64));
        }
    } else {
        for i in 1..=n {
            let (theta, _) = tail.map(a, i as f64 / (n + 1) as f64);
            consider(logf(theta));
        }
    }
    best
}

/// Returns ln ∫ₐᵇ exp(logf(θ)) dθ.
///
/// `logf` may return −∞ (zero integrand). The integrand is shifted by its
/// maximum over a probe grid before exponentiation, so the result is finite
/// whenever the integral is representable on the log scale.
pub fn log_integrate<F: Fn(f64) -> f64>(
    logf: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    settings.validate()?;
    if !a.is_finite() || b.is_nan() || !(a < b) {
        return Err(Error::domain(format!("invalid integration range ({a}, {b})")));
    }
    let tail = settings.infinite_tail_transform;
    let mut shift = probe_max(&logf, a, b, PROBE_POINTS, tail);
    if shift == f64::NEG_INFINITY {
        shift = probe_max(&logf, a, b, DENSE_PROBE_POINTS, tail);
        if shift == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let result = integrate_adaptive(|t| (logf(t) - shift).exp(), a, b, settings)?;
    if result.value > 0.0 {
        Ok(result.value.ln() + shift)
    } else {
        Ok(f64::NEG_INFINITY)
    }
}
