//! ε sweeps of the weak-norm pairing ⟨φ, T^ε − T⁰⟩ for test fields of
//! different Hölder regularity, with fitted log-log decay rates. The expected
//! slopes are 1 + α for α-Hölder fields, 1 for bounded discontinuous ones and
//! 1 for the squared L² distance.

use semidot::experiments::{geometric_grid, rate_sweep, FunctionalKind};
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::Vec2;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = SourceMeasure::new(Domain::interval(-1.0, 1.0)?, Density::Uniform)?;
    let target = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None)?;
    let grid = geometric_grid(1e-1, 1e-4, 16)?;

    let sign_power = |alpha: f64| -> FunctionalKind {
        FunctionalKind::PairFn {
            field: Arc::new(move |x: Vec2| {
                Vec2::axis(x.x.signum() * x.x.abs().powf(alpha))
            }),
            label: format!("sign|x|^{alpha}"),
        }
    };
    let kinds: Vec<(FunctionalKind, f64)> = vec![
        (
            FunctionalKind::PairFn {
                field: Arc::new(|x: Vec2| x),
                label: "id".into(),
            },
            2.0,
        ),
        (sign_power(0.5), 1.5),
        (sign_power(0.25), 1.25),
        (
            FunctionalKind::PairFn {
                field: Arc::new(|x: Vec2| Vec2::axis(x.x.signum())),
                label: "sign".into(),
            },
            1.0,
        ),
        (FunctionalKind::L2, 1.0),
    ];

    println!("{:<22} {:>8} {:>10} {:>10}", "functional", "slope", "expected", "r^2");
    for (kind, expected) in kinds {
        let sweep = rate_sweep(&source, &target, &kind, &grid)?;
        println!(
            "{:<22} {:>8.4} {:>10.2} {:>10.6}",
            sweep.label, sweep.fit.slope, expected, sweep.fit.r_squared
        );
    }
    Ok(())
}
