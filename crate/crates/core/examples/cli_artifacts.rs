//! Run the full verification suite and write every artifact to a directory
//! (default `verify_out`).

use wavestab::cli::verify::run_verify;
use wavestab::Result;

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "verify_out".into());
    for r in run_verify(dir.as_ref())? {
        println!("{} {:>2} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name);
    }
    Ok(())
}
