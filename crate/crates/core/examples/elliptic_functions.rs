//! Jacobi elliptic functions and complete integrals across the modulus range.

use wavestab::{complete_e, complete_k, jacobi, Modulus, Result};

fn main() -> Result<()> {
    println!("{:>6} {:>18} {:>18}", "k", "K(k)", "E(k)");
    for k in [0.0, 0.3, 0.5, 0.9, 0.999] {
        let m = Modulus::new(k)?;
        println!("{k:>6} {:>18.15} {:>18.15}", complete_k(m)?, complete_e(m)?);
    }

    let m = Modulus::new(0.7)?;
    let quarter = complete_k(m)?;
    println!("\nsn, cn, dn at k = 0.7 over a quarter period:");
    for i in 0..=4 {
        let x = quarter * i as f64 / 4.0;
        let v = jacobi(x, m);
        let identity = (v.sn * v.sn + v.cn * v.cn - 1.0).abs();
        println!("x = {x:.6}  sn = {:+.12}  cn = {:+.12}  dn = {:.12}  |sn²+cn²−1| = {identity:.1e}", v.sn, v.cn, v.dn);
    }
    Ok(())
}
