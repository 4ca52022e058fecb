//! Randomized invariants, exercised with proptest on small 1D instances
//! where solves take microseconds.

use proptest::prelude::*;
use semidot::geometry::{self, PotentialKind, PotentialVector};
use semidot::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use semidot::{eot_solver, maps, sd_solver, Vec2};

fn uniform_interval() -> SourceMeasure {
    SourceMeasure::new(Domain::interval(-1.0, 1.0).unwrap(), Density::Uniform).unwrap()
}

/// Sites from consecutive gaps, recentered around the origin, with
/// normalized weights bounded away from zero.
fn instance(pairs: &[(f64, f64)], w0: f64) -> (Vec<f64>, Vec<f64>) {
    let mut pts = vec![0.0];
    for (gap, _) in pairs {
        pts.push(pts.last().unwrap() + gap);
    }
    let shift = (pts[0] + pts.last().unwrap()) / 2.0;
    for p in &mut pts {
        *p -= shift;
    }
    let mut ws: Vec<f64> = std::iter::once(w0).chain(pairs.iter().map(|p| p.1)).collect();
    let total: f64 = ws.iter().sum();
    for w in &mut ws {
        *w /= total;
    }
    (pts, ws)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // symmetric two-point instances have the closed form a*tanh(2ax/eps)
    #[test]
    fn symmetric_map_scales(a in 0.4..1.0f64, eps in 0.005..0.1f64) {
        let src = uniform_interval();
        let tgt = DiscreteMeasure::new_1d(&[-a, a], &[0.5, 0.5], None).unwrap();
        let rep = eot_solver::solve_entropic(&src, &tgt, eps, 1e-11, 50).unwrap();
        let znorm = rep.potential.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(znorm < 1e-9, "|z|_inf = {znorm:e}");
        for k in 0..50 {
            let x = -1.0 + 2.0 * k as f64 / 49.0;
            let t = maps::entropic_eval(&tgt, &rep.potential, Vec2::axis(x)).unwrap();
            let exact = a * (2.0 * a * x / eps).tanh();
            prop_assert!((t.x - exact).abs() < 1e-10);
        }
    }

    // the semidual solve hits the prescribed weights and yields a monotone map
    #[test]
    fn solved_masses_and_monotonicity(
        pairs in prop::collection::vec((0.25..0.6f64, 0.15..1.0f64), 1..4),
        w0 in 0.15..1.0f64,
    ) {
        let (pts, ws) = instance(&pairs, w0);
        let src = uniform_interval();
        let tgt = DiscreteMeasure::new_1d(&pts, &ws, None).unwrap();
        let rep = sd_solver::solve_semidual(&src, &tgt, 1e-10, 80).unwrap();
        prop_assert!(rep.converged);
        let sum: f64 = rep.potential.values().iter().sum();
        prop_assert!(sum.abs() < 1e-12, "potential sum {sum:e}");

        let diag = geometry::build_diagram(&src, &tgt, &rep.potential).unwrap();
        let masses = geometry::cell_masses(&diag, &src).unwrap();
        for (m, q) in masses.iter().zip(tgt.weights()) {
            prop_assert!((m - q).abs() < 1e-9, "mass {m} vs weight {q}");
        }

        // optimal 1D assignment is nondecreasing in x
        let mut last = 0usize;
        for k in 0..200 {
            let x = Vec2::axis(-1.0 + 2.0 * k as f64 / 199.0);
            let i = diag.locate(x).unwrap();
            prop_assert!(i >= last, "cell order {last} -> {i}");
            last = i;
        }
    }

    // potentials are normalized, so adding a constant changes nothing
    #[test]
    fn shift_invariance(c in -10.0..10.0f64, w0 in 0.2..1.0f64) {
        let src = uniform_interval();
        let ws = [w0 / (w0 + 1.0), 1.0 / (w0 + 1.0)];
        let tgt = DiscreteMeasure::new_1d(&[-0.5, 0.7], &ws, None).unwrap();
        let rep = sd_solver::solve_semidual(&src, &tgt, 1e-10, 80).unwrap();
        let shifted: Vec<f64> = rep.potential.values().iter().map(|v| v + c).collect();
        let zs = PotentialVector::new(shifted, PotentialKind::Unregularized).unwrap();
        prop_assert!(
            rep.potential
                .values()
                .iter()
                .zip(zs.values())
                .all(|(a, b)| (a - b).abs() < 1e-12)
        );
    }

    // locate agrees with the defining argmin of the Laguerre cells
    #[test]
    fn locate_is_argmin(
        pairs in prop::collection::vec((0.25..0.6f64, 0.15..1.0f64), 1..4),
        zraw in prop::collection::vec(-0.3..0.3f64, 4),
        x in -1.0..1.0f64,
    ) {
        let (pts, ws) = instance(&pairs, 0.5);
        let n = pts.len();
        let src = uniform_interval();
        let tgt = DiscreteMeasure::new_1d(&pts, &ws, None).unwrap();
        let z = PotentialVector::new(zraw[..n].to_vec(), PotentialKind::Unregularized).unwrap();
        let diag = geometry::build_diagram(&src, &tgt, &z).unwrap();
        let found = diag.locate(Vec2::axis(x)).unwrap();
        // cell i collects the points where x*y_i - z_i is largest
        let score = |i: usize| x * pts[i] - z.values()[i];
        let best = (0..n).max_by(|&a, &b| score(a).total_cmp(&score(b))).unwrap();
        // skip the measure-zero ties on cell boundaries
        if (score(found) - score(best)).abs() > 1e-12 {
            prop_assert_eq!(found, best);
        }
    }

    // the entropic map is a convex combination of the sites for any potential
    #[test]
    fn entropic_map_in_hull(
        zraw in prop::collection::vec(-0.5..0.5f64, 3),
        eps in 0.01..1.0f64,
        x in -1.0..1.0f64,
    ) {
        let pts = [-0.8, 0.1, 0.9];
        let tgt = DiscreteMeasure::new_1d(&pts, &[0.3, 0.3, 0.4], None).unwrap();
        let z = PotentialVector::new(zraw, PotentialKind::Entropic { eps }).unwrap();
        let t = maps::entropic_eval(&tgt, &z, Vec2::axis(x)).unwrap();
        prop_assert!(t.x >= pts[0] - 1e-12 && t.x <= pts[2] + 1e-12, "map value {}", t.x);
        prop_assert!(t.y.abs() < 1e-15);
    }

    // geometric grids are geometric: fixed ratio, exact endpoints
    #[test]
    fn geometric_grid_shape(hi in 0.01..1.0f64, ratio in 1e-4..0.9f64, count in 2..20usize) {
        let lo = hi * ratio;
        let grid = semidot::experiments::geometric_grid(hi, lo, count).unwrap();
        prop_assert_eq!(grid.len(), count);
        prop_assert!((grid[0] - hi).abs() < 1e-12 * hi);
        prop_assert!((grid[count - 1] - lo).abs() < 1e-9 * lo);
        let r = grid[1] / grid[0];
        for w in grid.windows(2) {
            prop_assert!((w[1] / w[0] - r).abs() < 1e-9);
        }
    }
}
