//! The marginal constant c = ∫ p(x|θ) dθ for each model, computed by the
//! library and checked against a brute-force integral of the likelihood.
//!
//! ```bash
//! cargo run --example marginal_constants
//! ```

use refprior::quadrature::integrate_with_breakpoints;
use refprior::{sample_matrix, uniform_matrix, Model, QuadratureSettings, StreamKey, ALL_MODELS};

fn main() -> refprior::Result<()> {
    let quad = QuadratureSettings::default();
    let tight = QuadratureSettings {
        abs_tol: 1e-300,
        ..quad
    };
    for model in ALL_MODELS {
        let theta = match model {
            Model::ExpRate => 1.5,
            Model::Unif0Theta => 4.0,
            Model::UnifThetaThetaSq => 1.6,
            Model::Triangular01 => 0.3,
        };
        let u = uniform_matrix(&StreamKey::new(1, vec![0]), 1, 8);
        let s = sample_matrix(model, &u, theta)?.remove(0);
        let log_c = model.log_marginal_c(&s, &quad)?;

        // integrate the likelihood itself, split where it has kinks
        let mut points = match model {
            Model::ExpRate => vec![0.0, f64::INFINITY],
            Model::Unif0Theta => vec![s.max(), f64::INFINITY],
            Model::UnifThetaThetaSq => vec![s.max().sqrt(), s.min()],
            Model::Triangular01 => vec![0.0],
        };
        if model == Model::Triangular01 {
            points.extend_from_slice(s.sorted());
            points.push(1.0);
        }
        let brute = integrate_with_breakpoints(|t| model.log_joint(&s, t).unwrap().exp(), &points, &tight)?;
        println!(
            "{model:>10}  ln c = {log_c:>10.6}  c = {:.6e}  brute force = {:.6e}",
            log_c.exp(),
            brute.value
        );
    }

    // large samples stay on the log scale without overflow
    let u = uniform_matrix(&StreamKey::new(2, vec![0]), 1, 200);
    let s = sample_matrix(Model::Triangular01, &u, 0.4)?.remove(0);
    println!(
        "triangular, k = 200: ln c = {:.4}",
        Model::Triangular01.log_marginal_c(&s, &quad)?
    );
    Ok(())
}
