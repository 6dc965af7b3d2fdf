//! Built-in golden checks: the published worked example for Unif(0, θ), the
//! constant fits and coverage/width summaries derived from it, plus a few
//! structural oracles (CRN exactness, inverse-CDF round trips).
//!
//! The golden numbers live in [`GoldenTables`] so a test can hand in a
//! corrupted copy and watch the report fail.

use crate::estimators::{fit_constant_earp, fk_hat_from_samples, fnac_hat, f_hat_from_samples};
use crate::metrics::{amrp, coverage, earp, GridEntry, GridEvaluation};
use crate::models::{Model, Sample, ALL_MODELS};
use crate::quadrature::{log_integrate, QuadratureSettings};
use crate::sampling::{uniform_matrix, StreamKey};

/// Constant fit against the reference 1/θ.
#[derive(Debug, Clone, PartialEq)]
pub struct FitCase {
    pub thetas: Vec<f64>,
    /// estimate / f(θ) at each grid point
    pub ratios: Vec<f64>,
    pub a_hat: f64,
    pub s_hat: usize,
    pub earp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenTables {
    pub theta: f64,
    pub theta0: f64,
    pub samples_theta: Vec<Vec<f64>>,
    pub samples_theta0: Vec<Vec<f64>>,
    pub c_theta: Vec<f64>,
    pub c_theta0: Vec<f64>,
    pub r_theta: Vec<f64>,
    pub fk_theta: f64,
    pub fk_theta0: f64,
    pub f_ratio: f64,
    pub fit_fk: FitCase,
    pub fit_f: FitCase,
    /// Estimates at the fit grid, used to recompute EARP after scaling.
    pub fk_values: Vec<f64>,
    pub f_values: Vec<f64>,
    /// Normalized intervals (center, half-width) compared against 1/θ.
    pub intervals_fk: Vec<(f64, f64)>,
    pub coverage_fk: f64,
    /// Relative half-widths of the two estimators and their averages.
    pub rel_widths_fk: Vec<f64>,
    pub rel_widths_f: Vec<f64>,
    pub amrp_fk: f64,
    pub amrp_f: f64,
}

impl GoldenTables {
    /// The published worked example: k = m = 5, θ = 5, θ₀ = 1.
    pub fn published() -> Self {
        let thetas = vec![2.0, 5.0, 8.0, 11.0, 14.0, 17.0];
        Self {
            theta: 5.0,
            theta0: 1.0,
            samples_theta: vec![
                vec![2.643036, 2.525562, 0.960058, 4.832099, 4.272201],
                vec![2.174483, 2.483448, 1.491607, 4.914156, 0.174570],
                vec![1.941754, 1.177051, 1.256304, 4.244871, 2.803651],
                vec![0.451879, 2.500297, 4.722214, 4.968808, 2.783378],
                vec![3.850290, 1.067490, 3.773885, 1.241600, 1.111622],
            ],
            samples_theta0: vec![
                vec![0.302285, 0.423168, 0.138452, 0.616580, 0.575441],
                vec![0.307996, 0.862337, 0.886713, 0.442853, 0.799809],
                vec![0.011259, 0.539374, 0.939005, 0.709738, 0.193020],
                vec![0.947076, 0.498836, 0.251442, 0.152291, 0.045622],
                vec![0.364147, 0.260889, 0.536815, 0.514442, 0.604568],
            ],
            c_theta: vec![0.000459, 0.000429, 0.000770, 0.000410, 0.001138],
            c_theta0: vec![1.729750, 0.404397, 0.321565, 0.310743, 1.871367],
            r_theta: vec![-0.359772, -0.292415, -0.878049, -0.248175, -1.268302],
            fk_theta: 0.5437,
            fk_theta0: 1.5020,
            f_ratio: 0.3619,
            fit_fk: FitCase {
                thetas: thetas.clone(),
                ratios: vec![19.883, 20.233, 15.260, 15.366, 20.365, 18.622],
                a_hat: 19.883,
                s_hat: 3,
                earp: 0.094,
            },
            fit_f: FitCase {
                thetas,
                ratios: vec![1.126, 0.991, 0.784, 0.683, 1.153, 0.943],
                a_hat: 0.991,
                s_hat: 3,
                earp: 0.145,
            },
            fk_values: vec![9.941, 4.047, 1.907, 1.397, 1.455, 1.095],
            f_values: vec![0.563, 0.198, 0.098, 0.062, 0.082, 0.055],
            intervals_fk: vec![
                (0.103, 0.133),
                (0.229, 0.049),
                (0.115, 0.042),
                (0.036, 0.047),
                (0.043, 0.030),
                (0.040, 0.032),
            ],
            coverage_fk: 4.0 / 6.0,
            rel_widths_fk: vec![0.187, 0.197, 0.184, 0.244, 0.216, 0.282],
            rel_widths_f: vec![0.249, 0.252, 0.272, 0.248, 0.305, 0.359],
            amrp_fk: 0.218,
            amrp_f: 0.281,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {}  ({})", self.name, self.detail)
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Check {
    Check {
        name: name.to_string(),
        passed: (got - want).abs() <= tol,
        detail: format!("got {got:.6}, expected {want} ± {tol:e}"),
    }
}

fn flag(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    flag(name, false, format!("error: {e}"))
}

fn samples(rows: &[Vec<f64>]) -> Vec<Sample> {
    rows.iter().cloned().map(Sample::new).collect()
}

/// Runs every check against `golden`.
pub fn run_checks(golden: &GoldenTables) -> Vec<Check> {
    let quad = QuadratureSettings::default();
    let model = Model::Unif0Theta;
    let st = samples(&golden.samples_theta);
    let st0 = samples(&golden.samples_theta0);
    let mut checks = Vec::new();

    match fk_hat_from_samples(model, golden.theta, &st, &quad) {
        Ok(e) => checks.push(close("fk_hat worked example theta = 5", e.value, golden.fk_theta, 5e-4)),
        Err(e) => checks.push(failed("fk_hat worked example theta = 5", e)),
    }
    match fk_hat_from_samples(model, golden.theta0, &st0, &quad) {
        Ok(e) => checks.push(close("fk_hat worked example theta0 = 1", e.value, golden.fk_theta0, 5e-4)),
        Err(e) => checks.push(failed("fk_hat worked example theta0 = 1", e)),
    }
    match f_hat_from_samples(model, golden.theta, golden.theta0, &st, &st0, false, &quad) {
        Ok(e) => checks.push(close("f_hat worked example ratio", e.value, golden.f_ratio, 1e-3)),
        Err(e) => checks.push(failed("f_hat worked example ratio", e)),
    }

    // marginal constants: closed form vs table and vs quadrature
    let mut worst_table = 0.0f64;
    let mut worst_quad = 0.0f64;
    let mut quad_err = None;
    for (s, &table) in st.iter().chain(&st0).zip(golden.c_theta.iter().chain(&golden.c_theta0)) {
        let Ok(lc) = model.log_marginal_c(s, &quad) else {
            quad_err = Some("closed form failed".to_string());
            continue;
        };
        worst_table = worst_table.max(((lc.exp() - table) / table).abs());
        let k = s.len() as f64;
        match log_integrate(|t| -k * t.ln(), s.max(), f64::INFINITY, &quad) {
            Ok(q) => worst_quad = worst_quad.max(((q - lc).exp() - 1.0).abs()),
            Err(e) => quad_err = Some(e.to_string()),
        }
    }
    checks.push(match quad_err {
        Some(e) => failed("marginal constants c_j", e),
        None => flag(
            "marginal constants c_j",
            worst_table <= 1e-3 && worst_quad <= 1e-9,
            format!("max rel diff vs table {worst_table:.2e}, vs quadrature {worst_quad:.2e}"),
        ),
    });

    let mut worst_r = 0.0f64;
    for (s, &want) in st.iter().zip(&golden.r_theta) {
        match model.r_statistic(s, golden.theta, &quad) {
            Ok(r) => worst_r = worst_r.max((r - want).abs()),
            Err(_) => worst_r = f64::INFINITY,
        }
    }
    checks.push(flag(
        "r statistics worked example",
        worst_r <= 1e-3,
        format!("max abs diff {worst_r:.2e}"),
    ));

    for (label, case, values) in [
        ("fk", &golden.fit_fk, &golden.fk_values),
        ("f", &golden.fit_f, &golden.f_values),
    ] {
        let points: Vec<(f64, f64)> = case.thetas.iter().zip(&case.ratios).map(|(&t, &r)| (t, r / t)).collect();
        match fit_constant_earp(&points, |t| 1.0 / t) {
            Ok(fit) => {
                checks.push(close(&format!("constant fit {label}: a_hat"), fit.a_hat, case.a_hat, 1e-9));
                checks.push(flag(
                    &format!("constant fit {label}: s_hat"),
                    fit.s_hat == case.s_hat,
                    format!("got {}, expected {}", fit.s_hat, case.s_hat),
                ));
                checks.push(close(&format!("constant fit {label}: EARP"), fit.earp_min, case.earp, 1e-3));
                let grid = GridEvaluation::from_parts(
                    &case.thetas,
                    values,
                    &vec![0.0; values.len()],
                    &case.thetas.iter().map(|t| 1.0 / t).collect::<Vec<_>>(),
                    fit.a_hat,
                );
                match grid {
                    Ok(g) => checks.push(close(&format!("grid EARP {label}"), earp(&g), case.earp, 1e-3)),
                    Err(e) => checks.push(failed(&format!("grid EARP {label}"), e)),
                }
            }
            Err(e) => checks.push(failed(&format!("constant fit {label}"), e)),
        }
    }

    let entries: Vec<GridEntry> = golden
        .fit_fk
        .thetas
        .iter()
        .zip(&golden.intervals_fk)
        .map(|(&t, &(c, h))| GridEntry {
            theta: t,
            estimate: c,
            half_width: h,
            scaled_ref: 1.0 / t,
        })
        .collect();
    match GridEvaluation::new(entries) {
        Ok(g) => checks.push(close("empirical coverage fk", coverage(&g), golden.coverage_fk, 1e-12)),
        Err(e) => checks.push(failed("empirical coverage fk", e)),
    }
    for (label, widths, want) in [
        ("fk", &golden.rel_widths_fk, golden.amrp_fk),
        ("f", &golden.rel_widths_f, golden.amrp_f),
    ] {
        let entries = widths
            .iter()
            .map(|&w| GridEntry {
                theta: 1.0,
                estimate: 1.0,
                half_width: w,
                scaled_ref: 1.0,
            })
            .collect();
        match GridEvaluation::new(entries) {
            Ok(g) => checks.push(close(&format!("AMRP {label}"), amrp(&g), want, 1e-3)),
            Err(e) => checks.push(failed(&format!("AMRP {label}"), e)),
        }
    }

    // CRN exactness for the exponential model
    let mut worst_nac = 0.0f64;
    for i in 0..20u64 {
        let theta = 0.2 + 0.37 * i as f64;
        let theta0 = 0.5 + 0.11 * i as f64;
        let u = uniform_matrix(&StreamKey::new(i, vec![7]), 5, 5);
        match fnac_hat(Model::ExpRate, theta, theta0, &u, &quad) {
            Ok(e) => worst_nac = worst_nac.max((e.value - theta0 / theta).abs()),
            Err(_) => worst_nac = f64::INFINITY,
        }
    }
    checks.push(flag(
        "exponential CRN estimate equals theta0/theta",
        worst_nac <= 1e-12,
        format!("max abs diff {worst_nac:.2e}"),
    ));

    // CRN transform agrees with the inverse-CDF definition
    let mut worst_crn = 0.0f64;
    for model in ALL_MODELS {
        let (theta, theta0) = match model {
            Model::UnifThetaThetaSq => (1.7, 1.2),
            Model::Triangular01 => (0.3, 0.65),
            _ => (2.5, 0.8),
        };
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let direct = model.inverse_cdf(u, theta0);
            let mapped = model
                .inverse_cdf(u, theta)
                .and_then(|y| model.crn_transform(y, theta, theta0));
            match (direct, mapped) {
                (Ok(a), Ok(b)) => worst_crn = worst_crn.max((a - b).abs()),
                _ => worst_crn = f64::INFINITY,
            }
        }
    }
    checks.push(flag(
        "CRN transform matches inverse CDF",
        worst_crn <= 1e-10,
        format!("max abs diff {worst_crn:.2e}"),
    ));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_tables_pass() {
        for c in run_checks(&GoldenTables::published()) {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn corrupted_tables_fail() {
        let mut g = GoldenTables::published();
        g.fk_theta = 0.6;
        let checks = run_checks(&g);
        assert!(checks.iter().any(|c| !c.passed && c.name.contains("theta = 5")));
        let mut g = GoldenTables::published();
        g.samples_theta[0][3] = 3.0;
        assert!(run_checks(&g).iter().any(|c| !c.passed));
    }
}
