//! Sharp-constant check: measured `⟨id, T^ε − T⁰⟩/ε²` against the predicted
//! `−(π²/24) Σ_{i<j} ‖y_i−y_j‖⁻¹ ∫_{C_i∩C_j} ρ dH^{d−1}`.

use crate::error::{Error, Result};
use crate::eot_solver;
use crate::functionals;
use crate::geometry;
use crate::measures::{DiscreteMeasure, SourceMeasure};
use crate::sd_solver;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct ConstantCheck {
    pub eps: f64,
    pub measured: f64,
    pub predicted: f64,
    pub rel_gap: f64,
}

pub fn constant_check(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    eps: f64,
) -> Result<ConstantCheck> {
    if !(0.0 < eps && eps <= 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "constant check needs eps in (0, 1e-2], got {eps}"
        )));
    }
    let dim = source.dim();
    let sd = sd_solver::solve_semidual(
        source,
        target,
        sd_solver::default_tol(dim),
        sd_solver::DEFAULT_MAX_ITER,
    )?;
    if !sd.converged {
        return Err(Error::NoConvergence(format!(
            "unregularized solve stalled at residual {}",
            sd.residual
        )));
    }
    let diag0 = geometry::build_diagram(source, target, &sd.potential)?;

    let mut predicted = 0.0;
    for f in diag0.facets() {
        let mass = geometry::facet_integral(&diag0, source, f.i, f.j, None)?;
        let dist = diag0.sites()[f.i].dist(diag0.sites()[f.j]);
        predicted += mass / dist;
    }
    predicted *= -std::f64::consts::PI * std::f64::consts::PI / 24.0;

    let ent = eot_solver::solve_entropic(source, target, eps, sd_solver::default_tol(dim), 60)?;
    if !ent.converged {
        return Err(Error::NoConvergence(format!(
            "entropic solve stalled at residual {}",
            ent.residual
        )));
    }
    let pair = functionals::pair_difference_fn(
        |x| x,
        &ent.potential,
        &diag0,
        source,
        functionals::default_pair_tol(dim),
    )?;
    let measured = pair / (eps * eps);
    let rel_gap = if predicted == 0.0 {
        measured.abs()
    } else {
        ((measured - predicted) / predicted).abs()
    };
    Ok(ConstantCheck {
        eps,
        measured,
        predicted,
        rel_gap,
    })
}
