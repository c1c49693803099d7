//! Positivity of a quadratic form on a constrained subspace: random checks of
//! both theorems and certificates for the Hill operators.

use wavestab::positivity::{certify_hill, codim_k_trials, codim_one_converse, codim_one_trials};
use wavestab::profiles::Model;
use wavestab::{Modulus, Result};

fn main() -> Result<()> {
    let one = codim_one_trials(200, 7);
    let many = codim_k_trials(200, 8);
    println!("codimension one: {} trials, {} conclusion failures", one.trials, one.conclusion_failures);
    println!("codimension k:   {} trials, {} conclusion failures", many.trials, many.conclusion_failures);
    println!("without the hypotheses: {} of 200 random instances fail the conclusion", codim_one_converse(200, 9));

    for model in [Model::Quadratic, Model::Cubic] {
        let (cert, _) = certify_hill(model, Modulus::interior(0.5)?, 128)?;
        println!(
            "{model} k = 0.5: {} negative, gap {:.3e}, G max eigenvalue {:.3e}, verdict {:?}",
            cert.hypotheses.n_neg, cert.hypotheses.gap, cert.hypotheses.g_max_eig, cert.verdict
        );
    }
    Ok(())
}
