//! Five samples of size five from Unif(0, θ), fed through the estimators by
//! hand instead of simulated.
//!
//! ```bash
//! cargo run --example worked_example
//! ```

use refprior::estimators::{f_hat_from_samples, fk_hat_from_samples, half_width_f};
use refprior::{Model, QuadratureSettings, Sample};

fn main() -> refprior::Result<()> {
    let at_5 = [
        [2.643036, 2.525562, 0.960058, 4.832099, 4.272201],
        [2.174483, 2.483448, 1.491607, 4.914156, 0.174570],
        [1.941754, 1.177051, 1.256304, 4.244871, 2.803651],
        [0.451879, 2.500297, 4.722214, 4.968808, 2.783378],
        [3.850290, 1.067490, 3.773885, 1.241600, 1.111622],
    ];
    let at_1 = [
        [0.302285, 0.423168, 0.138452, 0.616580, 0.575441],
        [0.307996, 0.862337, 0.886713, 0.442853, 0.799809],
        [0.011259, 0.539374, 0.939005, 0.709738, 0.193020],
        [0.947076, 0.498836, 0.251442, 0.152291, 0.045622],
        [0.364147, 0.260889, 0.536815, 0.514442, 0.604568],
    ];
    let to_samples = |rows: &[[f64; 5]]| rows.iter().map(|r| Sample::new(r.to_vec())).collect::<Vec<_>>();
    let (s5, s1) = (to_samples(&at_5), to_samples(&at_1));
    let model = Model::Unif0Theta;
    let quad = QuadratureSettings::default();

    println!("{:>3} {:>12} {:>12}", "j", "c_j", "r_j(5)");
    for (j, s) in s5.iter().enumerate() {
        let c = model.log_marginal_c(s, &quad)?.exp();
        let r = model.r_statistic(s, 5.0, &quad)?;
        println!("{:>3} {c:>12.6} {r:>12.6}", j + 1);
    }

    let fk5 = fk_hat_from_samples(model, 5.0, &s5, &quad)?;
    let fk1 = fk_hat_from_samples(model, 1.0, &s1, &quad)?;
    let ratio = f_hat_from_samples(model, 5.0, 1.0, &s5, &s1, false, &quad)?;
    let iv = half_width_f(&ratio, 0.05)?;
    println!("f_k(5) = {:.4}", fk5.value);
    println!("f_k(1) = {:.4}", fk1.value);
    println!("f(5)   = {:.4}  95% interval ({:.4}, {:.4})", ratio.value, iv.lo, iv.hi);
    println!("reference prior ratio f(5)/f(1) = {:.4}", 1.0 / 5.0);
    Ok(())
}
