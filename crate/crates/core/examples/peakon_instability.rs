//! The explicit exponentially growing mode of the parabolic peakon.

use wavestab::linspec::{peakon_chain_check, peakon_mode, peakon_mode_check};
use wavestab::Result;

fn main() -> Result<()> {
    for l in [1.0, 3.0, 10.0] {
        let r = peakon_mode_check(l, 15.0, 3001)?;
        println!("L = {l}: μ₁ = {:.10}, growth rate μ = {:.10} (L/27 = {:.10}), residuals {:.1e} / {:.1e}", r.mu1, r.mu, l / 27.0, r.residual_q, r.residual_f);
    }
    let chain = peakon_chain_check(3.0)?;
    println!("chain of identities at L = 3 passed: {}", chain.passed());
    for x in [-5.0, -1.0, 0.0, 1.0, 5.0] {
        println!("f({x:+}) = {:+.8}", peakon_mode(x));
    }
    Ok(())
}
