//! Newton solver for the entropic semidual. The residual is
//! `G_i(ε, z) = ∫ w_i(x) ρ(x) dx − q_i` with softmax weights `w` at
//! temperature `ε/2`, and the Jacobian is assembled in the same quadrature
//! pass as the residual.

use crate::error::{Error, Result};
use crate::geometry::{self, PotentialKind, PotentialVector};
use crate::maps::softmax_weights;
use crate::measures::{DiscreteMeasure, SourceMeasure};
use crate::quadrature;
use crate::sd_solver::{self, SolveReport};
use crate::vec2::Vec2;
use nalgebra::{DMatrix, DVector};

const MAX_DEPTH_1D: u32 = 44;
const MAX_DEPTH_2D: u32 = 26;

/// Quadrature tolerance used for a solve with residual tolerance `tol`.
fn quad_tol_for(tol: f64) -> f64 {
    (tol * 1e-3).max(1e-14)
}

/// Softmax cell-mass residual `G_i = ∫ w_i ρ − q_i`.
pub fn eval_g(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z: &PotentialVector,
    quad_tol: f64,
) -> Result<DVector<f64>> {
    let (g, _) = eval_g_inner(source, target, z, quad_tol, false)?;
    Ok(g)
}

/// Residual and its Jacobian `∂G_i/∂z_j = −(1/τ) ∫ (δ_ij w_i − w_i w_j) ρ`,
/// computed in a single adaptive pass. The Jacobian is symmetric negative
/// semidefinite with zero row sums.
pub fn eval_g_with_grad(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z: &PotentialVector,
    quad_tol: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (g, jac) = eval_g_inner(source, target, z, quad_tol, true)?;
    Ok((g, jac.expect("gradient requested")))
}

fn eval_g_inner(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z: &PotentialVector,
    quad_tol: f64,
    with_grad: bool,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
    let eps = z.eps().ok_or_else(|| {
        Error::InvalidArgument("entropic residual needs an entropic potential".into())
    })?;
    let n = target.len();
    if z.values().len() != n {
        return Err(Error::InvalidArgument(format!(
            "potential length {} does not match {} sites",
            z.values().len(),
            n
        )));
    }
    if source.dim() != target.dim() {
        return Err(Error::InvalidArgument(
            "source and target dimensions differ".into(),
        ));
    }
    let tau = 0.5 * eps;
    let sites = target.points();
    let zv = z.values();
    let len = if with_grad { n + n * n } else { n };

    let integrand = |x: Vec2, out: &mut [f64]| {
        let rho = source.density(x);
        softmax_weights(sites, zv, tau, x, &mut out[..n]);
        if with_grad {
            // store τ·∂G so every component is O(1); the 1/τ factor is put
            // back after integration, otherwise the shared tolerance forces
            // the Jacobian block to be resolved 1/τ times more finely
            for i in 0..n {
                let wi = out[i];
                for j in 0..n {
                    let kron = if i == j { wi } else { 0.0 };
                    out[n + i * n + j] = -(kron - wi * out[j]) * rho;
                }
            }
        }
        for v in out[..n].iter_mut() {
            *v *= rho;
        }
    };

    // integrate cellwise over the Laguerre diagram of z so the adaptive rule
    // only has to resolve one softmax boundary layer per region, with collar
    // panels so an O(eps)-wide layer cannot slip between quadrature nodes
    let diag = geometry::build_diagram(source, target, z)?;
    let regions =
        geometry::split_layer_regions(geometry::integration_regions(&diag, source), 20.0 * eps);
    let per_region = quad_tol / regions.len().max(1) as f64;
    let mut acc = vec![0.0; len];
    let mut buf = vec![0.0; len];
    for (_, r) in &regions {
        buf.iter_mut().for_each(|v| *v = 0.0);
        match r {
            geometry::Region::Interval(a, b) => quadrature::adaptive_interval_vec(
                &|x, o: &mut [f64]| integrand(Vec2::axis(x), o),
                *a,
                *b,
                per_region,
                MAX_DEPTH_1D,
                &mut buf,
            )?,
            geometry::Region::Triangle(t) => {
                quadrature::adaptive_triangle_vec(&integrand, t, per_region, MAX_DEPTH_2D, &mut buf)?
            }
        }
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b;
        }
    }

    let mut g = DVector::from_column_slice(&acc[..n]);
    for (gi, qi) in g.iter_mut().zip(target.weights()) {
        *gi -= qi;
    }
    let jac = with_grad.then(|| DMatrix::from_row_slice(n, n, &acc[n..]) / tau);
    Ok((g, jac))
}

/// Entropic semidual objective
/// `∫ τ log Σ_j exp((⟨x,y_j⟩ − z_j)/τ) ρ dx + ⟨z, q⟩` with `τ = ε/2`.
pub fn entropic_objective(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z: &PotentialVector,
    quad_tol: f64,
) -> Result<f64> {
    let eps = z.eps().ok_or_else(|| {
        Error::InvalidArgument("entropic objective needs an entropic potential".into())
    })?;
    let tau = 0.5 * eps;
    let sites = target.points();
    let zv = z.values();
    let smax = |x: Vec2| {
        let mut m = f64::NEG_INFINITY;
        for (y, zi) in sites.iter().zip(zv) {
            m = m.max((x.dot(*y) - zi) / tau);
        }
        let s: f64 = sites
            .iter()
            .zip(zv)
            .map(|(y, zi)| ((x.dot(*y) - zi) / tau - m).exp())
            .sum();
        tau * (m + s.ln())
    };
    let diag = geometry::build_diagram(source, target, z)?;
    let regions =
        geometry::split_layer_regions(geometry::integration_regions(&diag, source), 20.0 * eps);
    let per_region = quad_tol / regions.len().max(1) as f64;
    let mut total = 0.0;
    for (_, r) in &regions {
        total += match r {
            geometry::Region::Interval(a, b) => {
                let f = |x: f64| smax(Vec2::axis(x)) * source.density(Vec2::axis(x));
                quadrature::adaptive_interval(&f, *a, *b, per_region, MAX_DEPTH_1D)?
            }
            geometry::Region::Triangle(t) => {
                let f = |x: Vec2| smax(x) * source.density(x);
                quadrature::adaptive_triangle(&f, t, per_region, MAX_DEPTH_2D)?
            }
        };
    }
    let inner: f64 = zv.iter().zip(target.weights()).map(|(a, b)| a * b).sum();
    Ok(total + inner)
}

/// Solve `G(ε, z) = 0` by Newton with backtracking, starting from zero.
/// If the zero start stalls, retries once from the unregularized potential.
pub fn solve_entropic(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let z0 = PotentialVector::zeros(target.len(), PotentialKind::Entropic { eps });
    let rep = solve_entropic_from(source, target, eps, &z0, tol, max_iter)?;
    if rep.converged {
        return Ok(rep);
    }
    let sd = sd_solver::solve_semidual(source, target, sd_solver::default_tol(source.dim()), 100)?;
    let warm = PotentialVector::new(
        sd.potential.values().to_vec(),
        PotentialKind::Entropic { eps },
    )?;
    let retry = solve_entropic_from(source, target, eps, &warm, tol, max_iter)?;
    if retry.converged || retry.residual < rep.residual {
        Ok(retry)
    } else {
        Ok(rep)
    }
}

/// Newton iteration from an explicit starting potential.
pub fn solve_entropic_from(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    eps: f64,
    z_init: &PotentialVector,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "regularization must be positive and finite, got {eps}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let quad_tol = quad_tol_for(tol);
    let mut z = PotentialVector::new(z_init.values().to_vec(), PotentialKind::Entropic { eps })?;
    let (mut g, mut jac) = eval_g_with_grad(source, target, &z, quad_tol)?;
    let mut residual = g.amax();

    let mut iterations = 0;
    let mut converged = residual <= tol;
    while !converged && iterations < max_iter {
        let step = sd_solver::solve_on_zero_sum(&jac, &(-&g))?;
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..50 {
            let cand_vals: Vec<f64> = z
                .values()
                .iter()
                .zip(step.iter())
                .map(|(zi, di)| zi + t * di)
                .collect();
            let cand = PotentialVector::new(cand_vals, PotentialKind::Entropic { eps })?;
            let cand_g = eval_g(source, target, &cand, quad_tol)?;
            let cand_res = cand_g.amax();
            if cand_res < residual {
                z = cand;
                residual = cand_res;
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
        if !converged && iterations < max_iter {
            let pair = eval_g_with_grad(source, target, &z, quad_tol)?;
            g = pair.0;
            jac = pair.1;
        }
    }

    let objective = entropic_objective(source, target, &z, quad_tol.max(1e-12))?;
    Ok(SolveReport {
        potential: z,
        residual,
        iterations,
        objective,
        converged,
        eps: Some(eps),
    })
}

/// Continuation over a decreasing ε schedule: each solve warm-starts from the
/// previous one. The schedule is sorted in decreasing order internally; the
/// returned reports follow that order.
pub fn solve_entropic_path(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    eps_schedule: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SolveReport>> {
    if eps_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon schedule".into()));
    }
    let mut schedule = eps_schedule.to_vec();
    schedule.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut reports = Vec::with_capacity(schedule.len());
    let mut warm: Option<Vec<f64>> = None;
    for &eps in &schedule {
        let rep = match &warm {
            None => solve_entropic(source, target, eps, tol, max_iter)?,
            Some(w) => {
                let init = PotentialVector::new(w.clone(), PotentialKind::Entropic { eps })?;
                let r = solve_entropic_from(source, target, eps, &init, tol, max_iter)?;
                if r.converged {
                    r
                } else {
                    solve_entropic(source, target, eps, tol, max_iter)?
                }
            }
        };
        warm = Some(rep.potential.values().to_vec());
        reports.push(rep);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Density, Domain};

    fn unif_1d() -> SourceMeasure {
        SourceMeasure::new(Domain::interval(-1.0, 1.0).unwrap(), Density::Uniform).unwrap()
    }

    fn asymmetric() -> DiscreteMeasure {
        DiscreteMeasure::new_1d(&[-1.0, 1.0], &[1.0 / 3.0, 2.0 / 3.0], None).unwrap()
    }

    #[test]
    fn residual_at_zero_on_asymmetric_instance() {
        // at z = 0 the softmax masses are (1/2, 1/2) by symmetry of the
        // sites, so G = (1/2 - 1/3, 1/2 - 2/3) = (1/6, -1/6) for any eps
        let src = unif_1d();
        let tgt = asymmetric();
        for eps in [1.0, 0.25, 0.05] {
            let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps });
            let g = eval_g(&src, &tgt, &z, 1e-12).unwrap();
            assert!((g[0] - 1.0 / 6.0).abs() < 1e-11, "eps={eps} g={g:?}");
            assert!((g[1] + 1.0 / 6.0).abs() < 1e-11);
        }
    }

    #[test]
    fn residual_components_sum_to_zero() {
        let src = unif_1d();
        let tgt =
            DiscreteMeasure::new_1d(&[-0.8, 0.1, 0.9], &[0.2, 0.5, 0.3], None).unwrap();
        let z =
            PotentialVector::new(vec![0.1, -0.2, 0.1], PotentialKind::Entropic { eps: 0.3 })
                .unwrap();
        let g = eval_g(&src, &tgt, &z, 1e-12).unwrap();
        assert!(g.sum().abs() < 1e-11);
    }

    #[test]
    fn symmetric_solve_stays_at_zero() {
        let src = unif_1d();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        let rep = solve_entropic(&src, &tgt, 0.01, 1e-10, 50).unwrap();
        assert!(rep.converged);
        assert!(rep.potential.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn matches_scalar_bisection_oracle() {
        // two sites reduce to a scalar equation in s = z1 - z2: bisect
        // independently and compare with the Newton solve
        let src = unif_1d();
        let tgt = asymmetric();
        let eps = 0.1;
        let tau = 0.5 * eps;
        let mass0 = |s: f64| {
            quadrature::integrate_interval(
                &|x: f64| 0.5 / (1.0 + ((2.0 * x + s) / tau).exp()),
                -1.0,
                1.0,
                32,
                256,
            )
            .unwrap()
        };
        let (mut lo, mut hi) = (-2.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass0(mid) > 1.0 / 3.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        let rep = solve_entropic(&src, &tgt, eps, 1e-11, 50).unwrap();
        assert!(rep.converged);
        let z = rep.potential.values();
        assert!(((z[0] - z[1]) - s).abs() < 1e-9, "newton {} oracle {}", z[0] - z[1], s);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let src = unif_1d();
        let tgt =
            DiscreteMeasure::new_1d(&[-0.7, 0.2, 0.8], &[0.3, 0.4, 0.3], None).unwrap();
        let zv = vec![0.05, -0.1, 0.05];
        let kind = PotentialKind::Entropic { eps: 0.4 };
        let z = PotentialVector::new(zv.clone(), kind).unwrap();
        let (_, jac) = eval_g_with_grad(&src, &tgt, &z, 1e-12).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            // perturb along a zero-sum direction so the constructor's
            // normalization does not eat the step: e_j - (1/n) 1
            let mut plus = zv.clone();
            let mut minus = zv.clone();
            for k in 0..3 {
                let d = if k == j { h * (1.0 - 1.0 / 3.0) } else { -h / 3.0 };
                plus[k] += d;
                minus[k] -= d;
            }
            let gp = eval_g(&src, &tgt, &PotentialVector::new(plus, kind).unwrap(), 1e-12).unwrap();
            let gm =
                eval_g(&src, &tgt, &PotentialVector::new(minus, kind).unwrap(), 1e-12).unwrap();
            for i in 0..3 {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                // column j of J applied to the projected direction
                let mut expect = 0.0;
                for k in 0..3 {
                    let d = if k == j { 1.0 - 1.0 / 3.0 } else { -1.0 / 3.0 };
                    expect += jac[(i, k)] * d;
                }
                assert!((fd - expect).abs() < 1e-6, "i={i} j={j} fd={fd} J={expect}");
            }
        }
    }

    #[test]
    fn jacobian_is_negative_semidefinite() {
        let src = unif_1d();
        let tgt =
            DiscreteMeasure::new_1d(&[-0.7, 0.2, 0.8], &[0.3, 0.4, 0.3], None).unwrap();
        let z = PotentialVector::new(
            vec![0.02, -0.05, 0.03],
            PotentialKind::Entropic { eps: 0.2 },
        )
        .unwrap();
        let (_, jac) = eval_g_with_grad(&src, &tgt, &z, 1e-11).unwrap();
        let sym = 0.5 * (&jac + jac.transpose());
        let eig = sym.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l < 1e-9), "{:?}", eig.eigenvalues);
        // zero row sums: the all-ones vector is in the kernel
        for i in 0..3 {
            assert!(jac.row(i).sum().abs() < 1e-10);
        }
    }

    #[test]
    fn continuation_approaches_unregularized_potential() {
        let src = unif_1d();
        let tgt = asymmetric();
        let reports =
            solve_entropic_path(&src, &tgt, &[0.5, 0.1, 0.02, 0.004], 1e-10, 50).unwrap();
        assert!(reports.iter().all(|r| r.converged));
        let gaps: Vec<f64> = reports
            .iter()
            .map(|r| {
                let z = r.potential.values();
                ((z[0] - 1.0 / 3.0).powi(2) + (z[1] + 1.0 / 3.0).powi(2)).sqrt()
            })
            .collect();
        // for a uniform density the gap decays exponentially in 1/eps, so
        // the small-eps solves hit z0 to solver precision; only require
        // monotone (non-strict) decay past the largest eps
        assert!(gaps[2] <= gaps[1], "gaps {gaps:?}");
        assert!(gaps[3] <= gaps[2], "gaps {gaps:?}");
        assert!(gaps[3] < 1e-6, "gaps {gaps:?}");
    }

    #[test]
    fn two_dimensional_instance_converges() {
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
            vec![Vec2::new(0.25, 0.5), Vec2::new(0.75, 0.5)],
            vec![0.5, 0.5],
            2,
            None,
        )
        .unwrap();
        let rep = solve_entropic(&src, &tgt, 0.2, 1e-8, 50).unwrap();
        assert!(rep.converged, "residual {}", rep.residual);
        // equal weights and mirror-symmetric geometry force the boundary to
        // x1 = 1/2, i.e. z1 - z2 = <y1 - y2, (1/2, .)> = -1/4
        let z = rep.potential.values();
        assert!(((z[0] - z[1]) + 0.25).abs() < 1e-7, "z = {z:?}");
    }
}
