//! The adaptive integrator on its own: endpoint singularities, semi-infinite
//! ranges and log-scale integrands far outside double range.
//!
//! ```bash
//! cargo run --example quadrature
//! ```

use refprior::quadrature::{integrate_adaptive, log_integrate, TailTransform};
use refprior::QuadratureSettings;

fn main() -> refprior::Result<()> {
    let q = QuadratureSettings::default();

    let r = integrate_adaptive(|x| x.powi(-2), 1.0, 2.0, &q)?;
    println!("∫_1^2 x^-2 dx        = {:.12} ({} subintervals)", r.value, r.subdivisions_used);

    let r = integrate_adaptive(|x| x.powf(-0.5), 0.0, 1.0, &q)?;
    println!("∫_0^1 x^-1/2 dx      = {:.12} ({} subintervals)", r.value, r.subdivisions_used);

    for tail in [TailTransform::OneOverX, TailTransform::ExpDecay] {
        let qt = QuadratureSettings {
            infinite_tail_transform: tail,
            ..q
        };
        let r = integrate_adaptive(|x| x * x * (-2.0 * x).exp(), 0.0, f64::INFINITY, &qt)?;
        println!("∫_0^∞ x² e^-2x dx    = {:.12} ({})", r.value, tail.name());
    }

    // e^{-2000} underflows, its logarithm does not
    let l = log_integrate(|x| -2000.0 - x, 0.0, f64::INFINITY, &q)?;
    println!("ln ∫_0^∞ e^(-2000-x) = {l:.12}");
    Ok(())
}
