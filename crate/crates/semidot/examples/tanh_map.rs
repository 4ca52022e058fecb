//! Closed-form check: for P = Unif[-1,1] and Q = (δ₋₁ + δ₁)/2 the entropic
//! map is exactly tanh(2x/ε) while the Brenier map is sign(x).

use semidot::geometry::{self, PotentialKind, PotentialVector};
use semidot::maps;
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::{eot_solver, Vec2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = SourceMeasure::new(Domain::interval(-1.0, 1.0)?, Density::Uniform)?;
    let target = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None)?;

    let z0 = PotentialVector::zeros(2, PotentialKind::Unregularized);
    let diag0 = geometry::build_diagram(&source, &target, &z0)?;

    for eps in [0.1, 0.01, 0.001] {
        let rep = eot_solver::solve_entropic(&source, &target, eps, 1e-12, 50)?;
        let znorm = rep
            .potential
            .values()
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));

        // by symmetry the potential is zero and T^ε(x) = tanh(2x/ε)
        let mut worst = 0.0f64;
        for k in 0..=1000 {
            let x = -1.0 + 2.0 * k as f64 / 1000.0;
            let t = maps::entropic_eval(&target, &rep.potential, Vec2::axis(x))?;
            worst = worst.max((t.x - (2.0 * x / eps).tanh()).abs());
        }
        println!("eps={eps:<6} |z|_inf={znorm:.2e}  max |T^eps - tanh(2x/eps)| = {worst:.2e}");
    }

    // the unregularized map is piecewise constant on the Laguerre cells
    for x in [-0.75, -0.1, 0.1, 0.75] {
        let b = maps::brenier_eval(&diag0, Vec2::axis(x))?;
        println!("T0({x:+.2}) = {:+.1}", b.x);
    }
    Ok(())
}
