//! Transport maps: the piecewise-constant Brenier map read off a Laguerre
//! diagram, and the entropic map given by softmax-weighted site averages.

use crate::error::{Error, Result};
use crate::geometry::{LaguerreDiagram, PotentialKind, PotentialVector};
use crate::measures::DiscreteMeasure;
use crate::vec2::Vec2;

/// Exponent gap `δ_ij(x) = (⟨x, yᵢ⟩ − zᵢ) − (⟨x, yⱼ⟩ − zⱼ)`. Positive values
/// favor site `i` at `x`.
pub fn delta(target: &DiscreteMeasure, z: &PotentialVector, i: usize, j: usize, x: Vec2) -> Result<f64> {
    let n = target.len();
    if i >= n || j >= n {
        return Err(Error::InvalidArgument(format!(
            "site index out of range: ({i}, {j}) with {n} sites"
        )));
    }
    check_len(target, z)?;
    let (yi, yj) = (target.points()[i], target.points()[j]);
    let zv = z.values();
    Ok(x.dot(yi - yj) - (zv[i] - zv[j]))
}

/// Brenier map at `x`: the site of the Laguerre cell containing `x`.
/// Ties on cell boundaries go to the lowest cell index.
pub fn brenier_eval(diag: &LaguerreDiagram, x: Vec2) -> Result<Vec2> {
    Ok(diag.sites()[diag.locate(x)?])
}

pub fn brenier_eval_batch(diag: &LaguerreDiagram, xs: &[Vec2]) -> Result<Vec<Vec2>> {
    xs.iter().map(|&x| brenier_eval(diag, x)).collect()
}

/// Softmax weights of the entropic plan at `x`, with temperature `tau = ε/2`
/// on the linearized cost. Stabilized by subtracting the max exponent.
/// `out` must have length `sites.len()` and receives the weights.
pub(crate) fn softmax_weights(sites: &[Vec2], z: &[f64], tau: f64, x: Vec2, out: &mut [f64]) {
    debug_assert_eq!(out.len(), sites.len());
    let mut m = f64::NEG_INFINITY;
    for (o, (y, zi)) in out.iter_mut().zip(sites.iter().zip(z)) {
        *o = (x.dot(*y) - zi) / tau;
        m = m.max(*o);
    }
    let mut s = 0.0;
    for o in out.iter_mut() {
        *o = (*o - m).exp();
        s += *o;
    }
    for o in out.iter_mut() {
        *o /= s;
    }
}

/// Entropic map `T^ε(x) = Σᵢ wᵢ(x) yᵢ` with softmax weights at temperature
/// `ε/2`. Requires an entropic potential (its `ε` sets the temperature).
pub fn entropic_eval(target: &DiscreteMeasure, z: &PotentialVector, x: Vec2) -> Result<Vec2> {
    check_len(target, z)?;
    let eps = match z.kind() {
        PotentialKind::Entropic { eps } => eps,
        PotentialKind::Unregularized => {
            return Err(Error::InvalidArgument(
                "entropic_eval needs an entropic potential; got an unregularized one".into(),
            ))
        }
    };
    let mut w = vec![0.0; target.len()];
    softmax_weights(target.points(), z.values(), 0.5 * eps, x, &mut w);
    let mut t = Vec2::ZERO;
    for (wi, y) in w.iter().zip(target.points()) {
        t += *y * *wi;
    }
    Ok(t)
}

pub fn entropic_eval_batch(
    target: &DiscreteMeasure,
    z: &PotentialVector,
    xs: &[Vec2],
) -> Result<Vec<Vec2>> {
    xs.iter().map(|&x| entropic_eval(target, z, x)).collect()
}

fn check_len(target: &DiscreteMeasure, z: &PotentialVector) -> Result<()> {
    if target.len() != z.values().len() {
        return Err(Error::InvalidArgument(format!(
            "potential length {} does not match {} sites",
            z.values().len(),
            target.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_diagram;
    use crate::measures::{Density, Domain, SourceMeasure};

    fn symmetric() -> (SourceMeasure, DiscreteMeasure) {
        let src =
            SourceMeasure::new(Domain::interval(-1.0, 1.0).unwrap(), Density::Uniform).unwrap();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        (src, tgt)
    }

    #[test]
    fn entropic_map_is_tanh() {
        let (_, tgt) = symmetric();
        for eps in [0.5, 0.1, 0.01] {
            let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps });
            for &x in &[-0.9, -0.3, 0.0, 0.2, 0.77] {
                let t = entropic_eval(&tgt, &z, Vec2::axis(x)).unwrap();
                assert!((t.x - (2.0 * x / eps).tanh()).abs() < 1e-13, "eps={eps} x={x}");
                assert_eq!(t.y, 0.0);
            }
        }
    }

    #[test]
    fn brenier_tie_goes_to_lowest_index() {
        let (src, tgt) = symmetric();
        let z = PotentialVector::zeros(2, PotentialKind::Unregularized);
        let diag = build_diagram(&src, &tgt, &z).unwrap();
        let t = brenier_eval(&diag, Vec2::axis(0.0)).unwrap();
        assert_eq!(t.x, -1.0);
        assert_eq!(brenier_eval(&diag, Vec2::axis(0.5)).unwrap().x, 1.0);
        assert!(brenier_eval(&diag, Vec2::axis(2.0)).is_err());
    }

    #[test]
    fn single_site_maps_everything_to_it() {
        let tgt = DiscreteMeasure::new_1d(&[0.3], &[1.0], None).unwrap();
        let z = PotentialVector::zeros(1, PotentialKind::Entropic { eps: 0.2 });
        let t = entropic_eval(&tgt, &z, Vec2::axis(-0.8)).unwrap();
        assert_eq!(t.x, 0.3);
    }

    #[test]
    fn entropic_map_stays_in_convex_hull() {
        let tgt = DiscreteMeasure::new_1d(&[-1.0, -0.2, 0.9], &[0.3, 0.3, 0.4], None).unwrap();
        let z = PotentialVector::new(vec![0.05, -0.02, -0.03], PotentialKind::Entropic { eps: 0.3 })
            .unwrap();
        for &x in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
            let t = entropic_eval(&tgt, &z, Vec2::axis(x)).unwrap();
            assert!(t.x >= -1.0 && t.x <= 0.9);
        }
    }

    #[test]
    fn deep_cell_softmax_is_stable() {
        // far inside a cell the exponents differ by thousands; the weights
        // must neither overflow nor produce NaN
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps: 1e-3 });
        let t = entropic_eval(&tgt, &z, Vec2::axis(0.99)).unwrap();
        assert!((t.x - 1.0).abs() < 1e-12);
        let t = entropic_eval(&tgt, &z, Vec2::axis(-0.99)).unwrap();
        assert!((t.x + 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_antisymmetry_and_sign() {
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        let z = PotentialVector::new(vec![0.1, -0.1], PotentialKind::Unregularized).unwrap();
        let x = Vec2::axis(0.4);
        let d01 = delta(&tgt, &z, 0, 1, x).unwrap();
        let d10 = delta(&tgt, &z, 1, 0, x).unwrap();
        assert!((d01 + d10).abs() < 1e-15);
        // site 1 wins at x=0.4 under this potential: delta = -0.8 - 0.2
        assert!((d01 + 1.0).abs() < 1e-15);
        assert!(delta(&tgt, &z, 0, 5, x).is_err());
    }

    #[test]
    fn shift_invariance_of_entropic_map() {
        // shifts are removed by the zero-sum normalization at construction
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 0.5], &[0.5, 0.5], None).unwrap();
        let a = PotentialVector::new(vec![0.3, -0.1], PotentialKind::Entropic { eps: 0.2 }).unwrap();
        let b = PotentialVector::new(vec![7.3, 6.9], PotentialKind::Entropic { eps: 0.2 }).unwrap();
        let x = Vec2::axis(0.1);
        let ta = entropic_eval(&tgt, &a, x).unwrap();
        let tb = entropic_eval(&tgt, &b, x).unwrap();
        assert!((ta.x - tb.x).abs() < 1e-14);
    }
}
