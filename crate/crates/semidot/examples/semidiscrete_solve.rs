//! Solve the unregularized semidual problem with the damped Newton method on
//! a 2D instance and verify that the Laguerre cell masses hit the target
//! weights.

use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::{geometry, sd_solver, Vec2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::polygon(vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(0.0, 1.0),
    ])?;
    let source = SourceMeasure::new(domain, Density::Uniform)?;
    let target = DiscreteMeasure::new(
        vec![
            Vec2::new(0.25, 0.25),
            Vec2::new(0.75, 0.3),
            Vec2::new(0.3, 0.75),
            Vec2::new(0.7, 0.7),
        ],
        vec![0.2, 0.3, 0.25, 0.25],
        2,
        None,
    )?;

    let tol = sd_solver::default_tol(2);
    let rep = sd_solver::solve_semidual(&source, &target, tol, sd_solver::DEFAULT_MAX_ITER)?;
    println!(
        "converged={} iterations={} residual={:.3e} objective={:.12}",
        rep.converged, rep.iterations, rep.residual, rep.objective
    );

    let diag = geometry::build_diagram(&source, &target, &rep.potential)?;
    let masses = geometry::cell_masses(&diag, &source)?;
    for (i, (m, q)) in masses.iter().zip(target.weights()).enumerate() {
        println!(
            "cell {i}: z={:+.8} mass={:.10} weight={:.10} gap={:.2e}",
            rep.potential.values()[i],
            m,
            q,
            (m - q).abs()
        );
    }
    Ok(())
}
