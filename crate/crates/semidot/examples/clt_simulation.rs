//! Resampling simulation of the entropic-map CLT: draw empirical targets
//! Q̂_n, solve their entropic problems at ε_n = n^(-0.3) and track
//! S = √n ⟨φ, T̂^{ε_n} − T⁰⟩ together with the regularization gap
//! √n ⟨φ, T̂^{ε_n} − T̂⁰⟩.

use semidot::experiments::{clt_sim, EpsRule};
use semidot::functionals::TestField;
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::Vec2;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = SourceMeasure::new(
        Domain::interval(-1.0, 1.0)?,
        Density::Gaussian {
            mean: Vec2::axis(-0.4),
            sigma: 0.6,
        },
    )?;
    let target = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[1.0 / 3.0, 2.0 / 3.0], None)?;

    let phi = TestField::new(Arc::new(|x: Vec2| x), 1.0, 2.0, "id")?;
    let rule = EpsRule { coeff: 1.0, beta: 0.3 };
    println!(
        "eps_n = n^-0.3, satisfies the CLT condition for alpha=1: {}",
        rule.satisfies_clt_condition(1.0)
    );

    let stats = clt_sim(&source, &target, &[100, 400, 1600], rule, &phi, 500, 0)?;
    println!(
        "{:>6} {:>8} {:>9} {:>9} {:>7} {:>7} {:>10}",
        "n", "eps_n", "mean", "variance", "skew", "kurt", "gap"
    );
    for s in &stats {
        println!(
            "{:>6} {:>8.4} {:>9.5} {:>9.5} {:>7.3} {:>7.3} {:>10.4e}",
            s.n, s.eps, s.mean, s.variance, s.skewness, s.excess_kurtosis, s.mean_abs_gap
        );
    }
    Ok(())
}
