//! Warm-started ε-continuation: solve the entropic semidual along a
//! decreasing ε grid and watch the potential approach the unregularized one.

use semidot::experiments::geometric_grid;
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::{eot_solver, sd_solver, Vec2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = SourceMeasure::new(
        Domain::interval(-1.0, 1.0)?,
        Density::Gaussian {
            mean: Vec2::axis(-0.4),
            sigma: 0.6,
        },
    )?;
    let target = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[1.0 / 3.0, 2.0 / 3.0], None)?;

    let sd = sd_solver::solve_semidual(&source, &target, 1e-10, 100)?;
    println!("unregularized z0 = {:?}", sd.potential.values());

    let grid = geometric_grid(1e-1, 1e-3, 9)?;
    let reports = eot_solver::solve_entropic_path(&source, &target, &grid, 1e-10, 60)?;
    println!("{:>10}  {:>5}  {:>9}  {:>12}", "eps", "iters", "residual", "|z^eps-z0|");
    for rep in &reports {
        let gap: f64 = rep
            .potential
            .values()
            .iter()
            .zip(sd.potential.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        println!(
            "{:>10.4e}  {:>5}  {:>9.2e}  {:>12.4e}",
            rep.eps.unwrap(),
            rep.iterations,
            rep.residual,
            gap
        );
    }
    Ok(())
}
