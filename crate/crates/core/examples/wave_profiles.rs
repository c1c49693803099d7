//! Periodic wave profiles of both models, their first integrals and the
//! change of variables back to the physical coordinate.

use wavestab::profiles::{change_of_variables, cubic_profile, first_integral_residual, peakon_profile, quadratic_profile, CubicNormalization};
use wavestab::{Modulus, Result};

fn main() -> Result<()> {
    for k in [0.3, 0.6, 0.9] {
        let m = Modulus::interior(k)?;
        for p in [quadratic_profile(m)?, cubic_profile(m, CubicNormalization::Physical(1.0))?] {
            let cov = change_of_variables(&p)?;
            println!(
                "{:<9} k = {k}: c = {:.6}, period = {:.6}, roots = {:.4?}, first-integral residual = {:.1e}, margin = {:.4}",
                p.model.to_string(),
                p.c,
                p.period(),
                p.roots,
                first_integral_residual(&p, 1024)?,
                cov.monotonicity_margin,
            );
        }
    }

    let (peakon, cov) = peakon_profile(3.0)?;
    println!("\npeakon with L = 3: c = {}, Ξ(±20) = {:+.6} / {:+.6}", peakon.c, cov.xi(-20.0), cov.xi(20.0));
    Ok(())
}
