//! ε sweeps: solve the entropic problem along a decreasing grid and fit the
//! decay rate of a chosen functional.

use super::fit::RateFit;
use crate::error::{Error, Result};
use crate::eot_solver;
use crate::functionals::{self, TestField};
use crate::geometry::{self, LaguerreDiagram};
use crate::measures::{DiscreteMeasure, SourceMeasure};
use crate::sd_solver;
use crate::vec2::Vec2;
use serde::Serialize;
use std::sync::Arc;

/// Which scalar is tracked along the sweep.
#[derive(Clone)]
pub enum FunctionalKind {
    /// `⟨φ, T^ε − T⁰⟩` for a Hölder test field.
    Pair(TestField),
    /// Same pairing for a raw bounded field (may be discontinuous).
    PairFn {
        field: Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>,
        label: String,
    },
    /// `‖T^ε − T⁰‖²_{L²(P)}`.
    L2,
    /// `max_φ |⟨φ, T^ε − T⁰⟩|` over a normalized family.
    DualNorm(Vec<TestField>),
    /// `‖z^ε − z⁰‖₂`.
    PotentialGap,
}

impl FunctionalKind {
    pub fn label(&self) -> String {
        match self {
            FunctionalKind::Pair(f) => format!("pair({})", f.label),
            FunctionalKind::PairFn { label, .. } => format!("pair({label})"),
            FunctionalKind::L2 => "l2_sq".into(),
            FunctionalKind::DualNorm(fam) => format!("dual_norm({} fields)", fam.len()),
            FunctionalKind::PotentialGap => "potential_gap".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateSweep {
    pub label: String,
    pub fit: RateFit,
    pub rows: Vec<SweepRow>,
}

/// Run the sweep: solve `z⁰` once, then warm-start the entropic solves from
/// large to small ε and evaluate the functional at each point. Unconverged
/// points are kept in the table but excluded from the fit.
pub fn rate_sweep(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    kind: &FunctionalKind,
    eps_grid: &[f64],
) -> Result<RateSweep> {
    if eps_grid.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "epsilon grid needs at least 6 points, got {}",
            eps_grid.len()
        )));
    }
    if eps_grid.iter().any(|&e| !(0.0 < e && e < 1.0)) {
        return Err(Error::InvalidArgument(
            "epsilon grid must lie in (0, 1)".into(),
        ));
    }
    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let dim = source.dim();
    let sd_tol = sd_solver::default_tol(dim);
    let sd = sd_solver::solve_semidual(source, target, sd_tol, sd_solver::DEFAULT_MAX_ITER)?;
    if !sd.converged {
        return Err(Error::NoConvergence(format!(
            "unregularized solve stalled at residual {}",
            sd.residual
        )));
    }
    let diag0 = geometry::build_diagram(source, target, &sd.potential)?;

    let reports = eot_solver::solve_entropic_path(source, target, &grid, sd_tol, 60)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    for rep in &reports {
        let eps = rep.eps.expect("entropic report");
        let value = if rep.converged {
            evaluate(kind, &rep.potential, &sd.potential, &diag0, source)?
        } else {
            log::warn!("sweep point eps={eps} did not converge; excluded from the fit");
            f64::NAN
        };
        values.push(value);
        rows.push(SweepRow {
            eps,
            value,
            residual: rep.residual,
            iterations: rep.iterations,
            converged: rep.converged,
        });
    }

    let fit = RateFit::fit(&grid, &values, 2, noise_floor(kind, dim))?;
    Ok(RateSweep {
        label: kind.label(),
        fit,
        rows,
    })
}

fn evaluate(
    kind: &FunctionalKind,
    z_eps: &geometry::PotentialVector,
    z0: &geometry::PotentialVector,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
) -> Result<f64> {
    Ok(match kind {
        FunctionalKind::Pair(phi) => functionals::pair_difference(phi, z_eps, diag0, source)?,
        FunctionalKind::PairFn { field, .. } => functionals::pair_difference_fn(
            |x| field(x),
            z_eps,
            diag0,
            source,
            functionals::default_pair_tol(source.dim()),
        )?,
        FunctionalKind::L2 => functionals::l2_sq_distance(z_eps, diag0, source)?,
        FunctionalKind::DualNorm(family) => {
            functionals::dual_norm_lower_bound(z_eps, diag0, source, family)?
        }
        FunctionalKind::PotentialGap => z_eps
            .values()
            .iter()
            .zip(z0.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt(),
    })
}

fn noise_floor(kind: &FunctionalKind, dim: usize) -> f64 {
    match kind {
        FunctionalKind::PotentialGap => 20.0 * sd_solver::default_tol(dim),
        _ => 10.0 * functionals::default_pair_tol(dim),
    }
}

#[cfg(test)]
mod tests {
    use super::super::fit::geometric_grid;
    use super::*;
    use crate::measures::{Density, Domain};

    fn symmetric() -> (SourceMeasure, DiscreteMeasure) {
        let src =
            SourceMeasure::new(Domain::interval(-1.0, 1.0).unwrap(), Density::Uniform).unwrap();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        (src, tgt)
    }

    #[test]
    fn identity_pairing_has_quadratic_slope() {
        let (src, tgt) = symmetric();
        let grid = geometric_grid(1e-1, 1e-3, 8).unwrap();
        let kind = FunctionalKind::PairFn {
            field: Arc::new(|x| x),
            label: "id".into(),
        };
        let sweep = rate_sweep(&src, &tgt, &kind, &grid).unwrap();
        assert!((sweep.fit.slope - 2.0).abs() < 0.1, "slope {}", sweep.fit.slope);
        assert!(sweep.fit.r_squared > 0.99);
    }

    #[test]
    fn l2_has_linear_slope() {
        let (src, tgt) = symmetric();
        let grid = geometric_grid(1e-1, 1e-3, 8).unwrap();
        let sweep = rate_sweep(&src, &tgt, &FunctionalKind::L2, &grid).unwrap();
        assert!((sweep.fit.slope - 1.0).abs() < 0.1, "slope {}", sweep.fit.slope);
    }

    #[test]
    fn rejects_short_grid() {
        let (src, tgt) = symmetric();
        assert!(rate_sweep(&src, &tgt, &FunctionalKind::L2, &[0.1, 0.01]).is_err());
    }
}
