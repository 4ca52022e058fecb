//! Lower-bound the dual Hölder norm of T^ε − T⁰ by maximizing the pairing
//! over a deterministic family of normalized test fields, and fit its ε rate.

use semidot::experiments::{geometric_grid, rate_sweep, FunctionalKind};
use semidot::functionals::make_test_family;
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = SourceMeasure::new(Domain::interval(-1.0, 1.0)?, Density::Uniform)?;
    let target = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None)?;

    let family = make_test_family(1.0, 32, 0, source.domain())?;
    // each field ships with a Monte Carlo certificate of its declared bound
    for f in family.iter().take(3) {
        let worst = f.certify(source.domain(), 2000, 7)?;
        println!("field {:<14} observed Holder ratio {:.4} <= 1", f.label, worst);
    }

    let grid = geometric_grid(1e-1, 1e-4, 16)?;
    let sweep = rate_sweep(&source, &target, &FunctionalKind::DualNorm(family), &grid)?;
    println!(
        "{}: slope={:.4} (alpha=1 rate is 2) r^2={:.6}",
        sweep.label, sweep.fit.slope, sweep.fit.r_squared
    );
    for row in sweep.rows.iter().step_by(3) {
        println!("  eps={:.4e} bound={:.6e}", row.eps, row.value);
    }
    Ok(())
}
