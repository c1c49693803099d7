//! The stability index of both models by the Green's-function route, checked
//! against the spectral pseudo-inverse, plus the cubic D-matrix.

use wavestab::greens::{d_matrix_cubic, index_sweep};
use wavestab::profiles::Model;
use wavestab::{Modulus, Result};

fn main() -> Result<()> {
    let ks: Vec<f64> = (0..8).map(|i| 0.05 + 0.135 * i as f64).collect();
    for model in [Model::Quadratic, Model::Cubic] {
        println!("{model} index:");
        for (k, r) in index_sweep(model, &ks, 256) {
            match r {
                Ok(r) => println!("  k = {k:.3}  greens = {:+.10}  spectral = {:+.10}  discrepancy = {:.1e}", r.value_greens, r.value_spectral, r.discrepancy),
                Err(e) => println!("  k = {k:.3}  error: {e}"),
            }
        }
    }
    let d = d_matrix_cubic(Modulus::interior(0.7)?)?;
    println!("\ncubic D-matrix at k = 0.7: [[{:.6e}, {:.6e}], [{:.6e}, {:.6e}]], negative definite: {}", d.d[0][0], d.d[0][1], d.d[1][0], d.d[1][1], d.negative_definite);
    Ok(())
}
