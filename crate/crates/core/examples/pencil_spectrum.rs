//! Eigenvalues of the pencil L Z = μ Z′: all on the imaginary axis for both
//! periodic families.

use num_complex::Complex64;
use wavestab::linspec::{pencil_report, stability_margin_sweep};
use wavestab::profiles::Model;
use wavestab::{Modulus, Result};

fn main() -> Result<()> {
    for model in [Model::Quadratic, Model::Cubic] {
        let r = pencil_report(model, Modulus::interior(0.6)?, 128, Complex64::new(0.3, 0.0))?;
        println!(
            "{model} k = 0.6, n = 128: max |Re μ| = {:.1e}, zero modes = {}, symmetry error = {:.1e}, constraints passed = {}",
            r.max_re, r.zero_modes, r.symmetry_error, r.constraints.passed
        );
        let lowest: Vec<String> = r.mus.iter().take(6).map(|m| format!("{:+.3e}{:+.6}i", m.re, m.im)).collect();
        println!("  lowest: {}", lowest.join(", "));
    }
    let sweep = stability_margin_sweep(Model::Cubic, &[0.3, 0.6, 0.9], 128);
    for row in &sweep.rows {
        println!("cubic margin k = {}: max |Re μ| = {:.1e}", row.k, row.max_re);
    }
    Ok(())
}
