//! Driving the numerator and the anchor of the ratio estimator with the same
//! uniforms. For the exponential and Unif(0, θ) models this makes the
//! estimate exact; for Unif(θ, θ²) it shrinks the interval.
//!
//! ```bash
//! cargo run --example common_random_numbers
//! ```

use refprior::estimators::{f_hat, fnac_hat, half_width_f};
use refprior::{uniform_matrix, Model, QuadratureSettings, StreamKey};

fn main() -> refprior::Result<()> {
    let quad = QuadratureSettings::default();
    for model in [Model::ExpRate, Model::Unif0Theta] {
        let u = uniform_matrix(&StreamKey::new(7, vec![0]), 5, 5);
        let v = fnac_hat(model, 4.0, 1.0, &u, &quad)?.value;
        println!("{model}: CRN estimate at theta = 4 is {v:.15} (theta0/theta = 0.25)");
    }

    let model = Model::UnifThetaThetaSq;
    println!("\nunif_sq, theta0 = 1.001, k = m = 10");
    println!("{:>6} {:>18} {:>18}", "theta", "independent", "common");
    for i in 0..6u64 {
        let theta = 1.2 + 0.3 * i as f64;
        let key = StreamKey::new(8, vec![i]);
        let u = uniform_matrix(&key.child(0), 10, 10);
        let u0 = uniform_matrix(&key.child(1), 10, 10);
        let ind = half_width_f(&f_hat(model, theta, 1.001, &u, &u0, &quad)?, 0.1)?;
        let crn = half_width_f(&fnac_hat(model, theta, 1.001, &u, &quad)?, 0.1)?;
        println!(
            "{theta:>6.2} {:>9.4} ± {:<6.4} {:>9.4} ± {:<6.4}",
            ind.center, ind.half_width, crn.center, crn.half_width
        );
    }
    Ok(())
}
