//! Spectra of the Hill operators: Lamé eigenvalues against their closed forms
//! and the kernel and signature of the linearization about each wave.

use wavestab::hillop::{kernel_check, lame_check};
use wavestab::profiles::{cubic_profile, quadratic_profile, CubicNormalization};
use wavestab::{Modulus, Result};

fn main() -> Result<()> {
    for k in [0.3, 0.5, 0.7, 0.9] {
        let r = lame_check(Modulus::interior(k)?, 256)?;
        println!("k = {k}: ν = {:.10?}  ε = {:.10?}  max relative error {:.1e}", r.nu, r.epsilon, r.max_rel_err);
    }
    println!();
    let m = Modulus::interior(0.5)?;
    for p in [quadratic_profile(m)?, cubic_profile(m, CubicNormalization::Canonical)?] {
        let r = kernel_check(&p, 256)?;
        println!(
            "{}: kernel residual {:.1e}, {} negative, {} zero, lowest {:.6?}",
            r.model, r.residual, r.n_negative, r.n_zero, r.lowest
        );
    }
    Ok(())
}
