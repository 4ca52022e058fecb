//! Build Laguerre diagrams of an 8-site instance on the unit square: first
//! at z = 0, where most cells are empty because the sites have unequal
//! norms, then at the solved potential where every cell carries its target
//! weight.

use semidot::geometry::{self, PotentialKind, PotentialVector};
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::{sd_solver, Vec2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::polygon(vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(0.0, 1.0),
    ])?;
    let source = SourceMeasure::new(domain, Density::Uniform)?;
    let points = vec![
        Vec2::new(0.2015, 0.3549),
        Vec2::new(0.2879, 0.1281),
        Vec2::new(0.5553, 0.8976),
        Vec2::new(0.9048, 0.6768),
        Vec2::new(0.4398, 0.2881),
        Vec2::new(0.6184, 0.3836),
        Vec2::new(0.6068, 0.665),
        Vec2::new(0.7307, 0.2339),
    ];
    let n = points.len();
    let target = DiscreteMeasure::new(points, vec![1.0 / n as f64; n], 2, None)?;

    let z = PotentialVector::zeros(n, PotentialKind::Unregularized);
    let flat = geometry::build_diagram(&source, &target, &z)?;
    let empty = flat.cells().iter().filter(|c| c.is_empty()).count();
    println!("z = 0: {empty} of {n} cells are empty\n");

    let rep = sd_solver::solve_semidual(
        &source,
        &target,
        sd_solver::default_tol(2),
        sd_solver::DEFAULT_MAX_ITER,
    )?;
    let diag = geometry::build_diagram(&source, &target, &rep.potential)?;
    let masses = geometry::cell_masses(&diag, &source)?;
    println!("{}", diag.dump_text(Some(&masses)));
    println!("total mass {:.12}", masses.iter().sum::<f64>());
    Ok(())
}
