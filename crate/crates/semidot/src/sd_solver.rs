//! Damped Newton solver for the unregularized semidual problem: find the
//! potential whose Laguerre cell masses match the target weights.

use crate::error::{Error, Result};
use crate::geometry::{self, PotentialKind, PotentialVector};
use crate::measures::{DiscreteMeasure, SourceMeasure};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Outcome of a semidual solve (unregularized or entropic).
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub potential: PotentialVector,
    /// `‖P(Cᵢ(z)) − qᵢ‖_∞` (unregularized) or `‖G(ε, z)‖_∞` (entropic).
    pub residual: f64,
    pub iterations: usize,
    /// Semidual objective value at the returned potential.
    pub objective: f64,
    pub converged: bool,
    /// Regularization parameter for entropic solves.
    pub eps: Option<f64>,
}

/// Default residual tolerance by dimension.
pub fn default_tol(dim: usize) -> f64 {
    if dim == 1 {
        1e-10
    } else {
        1e-8
    }
}

pub const DEFAULT_MAX_ITER: usize = 100;

/// Solve the semidual problem from the zero initialization.
pub fn solve_semidual(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let z0 = PotentialVector::zeros(target.len(), PotentialKind::Unregularized);
    solve_semidual_from(source, target, &z0, tol, max_iter)
}

/// Solve from an explicit starting potential (used by the uniqueness checks).
pub fn solve_semidual_from(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z_init: &PotentialVector,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let q = DVector::from_column_slice(target.weights());
    let mut z = PotentialVector::new(z_init.values().to_vec(), PotentialKind::Unregularized)?;

    let mut diag = geometry::build_diagram(source, target, &z)?;
    let mut masses = DVector::from_vec(geometry::cell_masses(&diag, source)?);

    // Newton cannot move a cell that starts empty (its Jacobian row vanishes),
    // so fall back to the Voronoi potential zᵢ = ‖yᵢ‖²/2, whose cells are the
    // Voronoi regions of the sites and generically all carry mass.
    if masses.min() <= 0.0 {
        let voronoi: Vec<f64> = target.points().iter().map(|y| 0.5 * y.norm_sq()).collect();
        let zv = PotentialVector::new(voronoi, PotentialKind::Unregularized)?;
        let dv = geometry::build_diagram(source, target, &zv)?;
        let mv = DVector::from_vec(geometry::cell_masses(&dv, source)?);
        if mv.min() > masses.min() {
            log::debug!("empty cell at the requested init; restarting from the Voronoi potential");
            z = zv;
            diag = dv;
            masses = mv;
        }
    }
    let mut residual = (&masses - &q).amax();

    // Kitagawa–Mérigot damping floor: iterates must keep every cell mass
    // above half the worst-case starting mass / target weight.
    let floor = 0.5 * masses.min().min(q.min());

    let mut iterations = 0;
    let mut converged = residual <= tol;
    while !converged && iterations < max_iter {
        let jac = geometry::mass_jacobian(&diag, source)?;
        let step = solve_on_zero_sum(&jac, &(&q - &masses))?;
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..60 {
            let cand_vals: Vec<f64> = z
                .values()
                .iter()
                .zip(step.iter())
                .map(|(zi, di)| zi + t * di)
                .collect();
            let cand = PotentialVector::new(cand_vals, PotentialKind::Unregularized)?;
            let cand_diag = geometry::build_diagram(source, target, &cand)?;
            let cand_masses = DVector::from_vec(geometry::cell_masses(&cand_diag, source)?);
            let cand_residual = (&cand_masses - &q).amax();
            if cand_masses.min() >= floor && cand_residual < residual {
                z = cand;
                diag = cand_diag;
                masses = cand_masses;
                residual = cand_residual;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        converged = residual <= tol;
    }

    let objective = semidual_objective(source, target, &z)?;
    Ok(SolveReport {
        potential: z,
        residual,
        iterations,
        objective,
        converged,
        eps: None,
    })
}

/// Semidual objective `∫ maxᵢ(⟨x,yᵢ⟩ − zᵢ) dP + ⟨z, q⟩`, evaluated cellwise
/// over the Laguerre diagram of `z` so the integrand is smooth per panel.
pub fn semidual_objective(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z: &PotentialVector,
) -> Result<f64> {
    let diag = geometry::build_diagram(source, target, z)?;
    let mut total = 0.0;
    for (i, cell) in diag.cells().iter().enumerate() {
        let yi = diag.sites()[i];
        let zi = z.values()[i];
        let f = |x: crate::Vec2| x.dot(yi) - zi;
        total += match cell {
            geometry::CellGeom::Empty => 0.0,
            geometry::CellGeom::Interval { lo, hi } => {
                source.integrate_over_interval(*lo, *hi, f)?
            }
            geometry::CellGeom::Polygon(p) => source.integrate_over_polygon(p, f)?,
        };
    }
    let inner: f64 = z
        .values()
        .iter()
        .zip(target.weights())
        .map(|(zi, qi)| zi * qi)
        .sum();
    Ok(total + inner)
}

/// Solve `J·d = rhs` on the zero-sum subspace by appending the normalization
/// row `𝟙ᵀ d = 0` and taking the least-squares solution (SVD, relative
/// cutoff 1e-13).
pub(crate) fn solve_on_zero_sum(jac: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = jac.nrows();
    let mut aug = DMatrix::zeros(n + 1, n);
    aug.view_mut((0, 0), (n, n)).copy_from(jac);
    for c in 0..n {
        aug[(n, c)] = 1.0;
    }
    let mut b = DVector::zeros(n + 1);
    b.view_mut((0, 0), (n, 1)).copy_from(rhs);
    let svd = aug.svd(true, true);
    let max_sv = svd.singular_values.max();
    svd.solve(&b, 1e-13 * max_sv)
        .map_err(|e| Error::NoConvergence(format!("inner linear solve failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Density, Domain};
    use crate::Vec2;

    fn unif_1d() -> SourceMeasure {
        SourceMeasure::new(Domain::interval(-1.0, 1.0).unwrap(), Density::Uniform).unwrap()
    }

    #[test]
    fn symmetric_instance_solves_to_zero() {
        let src = unif_1d();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        let rep = solve_semidual(&src, &tgt, 1e-10, 100).unwrap();
        assert!(rep.converged);
        assert!(rep.potential.values().iter().all(|v| v.abs() < 1e-10));
        // objective at the optimum: ∫ |x| * 1/2 dx = 1/2
        assert!((rep.objective - 0.5).abs() < 1e-10);
    }

    #[test]
    fn asymmetric_instance_matches_closed_form() {
        let src = unif_1d();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[1.0 / 3.0, 2.0 / 3.0], None).unwrap();
        let rep = solve_semidual(&src, &tgt, 1e-12, 100).unwrap();
        assert!(rep.converged);
        let z = rep.potential.values();
        assert!((z[0] - 1.0 / 3.0).abs() < 1e-10, "z = {z:?}");
        assert!((z[1] + 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn four_site_square_symmetry() {
        let src = SourceMeasure::new(
            Domain::polygon(vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(0.0, 1.0),
            ])
            .unwrap(),
            Density::Uniform,
        )
        .unwrap();
        let tgt = DiscreteMeasure::new(
            vec![
                Vec2::new(0.25, 0.25),
                Vec2::new(0.75, 0.25),
                Vec2::new(0.25, 0.75),
                Vec2::new(0.75, 0.75),
            ],
            vec![0.25; 4],
            2,
            None,
        )
        .unwrap();
        let rep = solve_semidual(&src, &tgt, 1e-9, 100).unwrap();
        assert!(rep.converged, "residual {}", rep.residual);
        // optimal cells are the four quadrants; matching the cell boundaries
        // to the midlines gives z = (-1/4, 0, 0, 1/4)
        let z = rep.potential.values();
        let expect = [-0.25, 0.0, 0.0, 0.25];
        for (zi, ei) in z.iter().zip(expect) {
            assert!((zi - ei).abs() < 1e-8, "z = {z:?}");
        }
    }

    #[test]
    fn single_site_objective() {
        let src = unif_1d();
        let tgt = DiscreteMeasure::new_1d(&[0.7], &[1.0], None).unwrap();
        let z = PotentialVector::zeros(1, PotentialKind::Unregularized);
        // N=1: objective = <mean(P), y1> = 0
        let v = semidual_objective(&src, &tgt, &z).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn objective_shift_invariance() {
        // shifts are normalized away at construction, so objective(z + c1)
        // literally equals objective(z)
        let src = unif_1d();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.4, 0.6], None).unwrap();
        let a = PotentialVector::new(vec![0.2, -0.1], PotentialKind::Unregularized).unwrap();
        let b = PotentialVector::new(vec![0.2 + 5.0, -0.1 + 5.0], PotentialKind::Unregularized)
            .unwrap();
        let va = semidual_objective(&src, &tgt, &a).unwrap();
        let vb = semidual_objective(&src, &tgt, &b).unwrap();
        assert!((va - vb).abs() < 1e-12);
    }

    #[test]
    fn max_iter_exhaustion_reports_unconverged() {
        let src = unif_1d();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[1.0 / 3.0, 2.0 / 3.0], None).unwrap();
        let rep = solve_semidual(&src, &tgt, 1e-15, 0).unwrap();
        assert!(!rep.converged);
    }
}
