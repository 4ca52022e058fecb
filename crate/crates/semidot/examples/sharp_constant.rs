//! The ε² coefficient of ⟨id, T^ε − T⁰⟩ is −(π²/24) Σ_{i<j} h_{ij}/‖y_i−y_j‖
//! over the facets; on the symmetric two-point instance this is −π²/96.
//! Compare the measured coefficient against the facet-integral prediction,
//! and both against the closed-form tanh oracle.

use semidot::experiments::{constant_check, oracle_tanh, tail_integral};
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = SourceMeasure::new(Domain::interval(-1.0, 1.0)?, Density::Uniform)?;
    let target = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None)?;

    println!("-pi^2/96 = {:.12}", -std::f64::consts::PI.powi(2) / 96.0);
    println!("tail integral of u(tanh 2u - 1): {:.12}", tail_integral(1.0)?);

    for eps in [1e-2, 1e-3] {
        let check = constant_check(&source, &target, eps)?;
        println!(
            "eps={eps:<6} measured/eps^2={:+.8} predicted={:+.8} rel_gap={:.3e}",
            check.measured, check.predicted, check.rel_gap
        );
        // closed form: the pairing equals the tanh oracle integral exactly
        let oracle = oracle_tanh(eps, 1.0)?;
        println!("         oracle/eps^2 = {:+.8}", oracle / (eps * eps));
    }
    Ok(())
}
