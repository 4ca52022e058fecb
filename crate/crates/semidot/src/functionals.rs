//! Weak-norm functionals pairing the entropic-vs-Brenier map gap against
//! Hölder test fields, plus the L² distance and a dual-norm lower bound.

use crate::error::{Error, Result};
use crate::geometry::{self, LaguerreDiagram, PotentialKind, PotentialVector, Region};
use crate::maps;
use crate::measures::{Domain, SourceMeasure};
use crate::quadrature;
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const MAX_DEPTH_1D: u32 = 44;
const MAX_DEPTH_2D: u32 = 26;

/// Default absolute quadrature tolerance for pairings, by dimension.
pub fn default_pair_tol(dim: usize) -> f64 {
    if dim == 1 {
        1e-13
    } else {
        1e-10
    }
}

/// A vector-valued α-Hölder test field with a declared Hölder constant.
#[derive(Clone)]
pub struct TestField {
    eval: Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>,
    pub alpha: f64,
    pub holder_bound: f64,
    pub label: String,
}

impl std::fmt::Debug for TestField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestField")
            .field("alpha", &self.alpha)
            .field("holder_bound", &self.holder_bound)
            .field("label", &self.label)
            .finish()
    }
}

impl TestField {
    pub fn new(
        eval: Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>,
        alpha: f64,
        holder_bound: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(0.0 < alpha && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Hölder exponent must lie in (0, 1], got {alpha}"
            )));
        }
        if !(holder_bound > 0.0 && holder_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Hölder bound must be positive and finite, got {holder_bound}"
            )));
        }
        Ok(TestField {
            eval,
            alpha,
            holder_bound,
            label: label.into(),
        })
    }

    pub fn eval(&self, x: Vec2) -> Vec2 {
        (self.eval)(x)
    }

    /// Two-point Monte Carlo certificate: sample `n_pairs` point pairs in the
    /// domain and check `‖φ(x)−φ(x')‖ ≤ C·‖x−x'‖^α`. Returns the worst
    /// observed ratio; errors if it exceeds the declared bound.
    pub fn certify(&self, domain: &Domain, n_pairs: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = domain.bounding_box();
        let draw = |rng: &mut ChaCha8Rng| loop {
            let p = Vec2::new(
                rng.gen_range(lo.x..=hi.x),
                if domain.dim() == 1 {
                    0.0
                } else {
                    rng.gen_range(lo.y..=hi.y)
                },
            );
            if domain.contains(p, 0.0) {
                return p;
            }
        };
        let mut worst: f64 = 0.0;
        for _ in 0..n_pairs {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let d = a.dist(b);
            if d < 1e-12 {
                continue;
            }
            let ratio = (self.eval(a) - self.eval(b)).norm() / d.powf(self.alpha);
            worst = worst.max(ratio);
        }
        if worst > self.holder_bound * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "field '{}' violates its Hölder bound: observed ratio {worst} > {}",
                self.label, self.holder_bound
            )));
        }
        Ok(worst)
    }
}

/// `∫ ⟨φ(x), T^ε(x) − T⁰(x)⟩ dP`, integrated cell by cell over the
/// unregularized diagram `diag0` (where `T⁰` is constant).
pub fn pair_difference(
    phi: &TestField,
    z_eps: &PotentialVector,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
) -> Result<f64> {
    let e = phi.eval.clone();
    pair_difference_fn(
        move |x| e(x),
        z_eps,
        diag0,
        source,
        default_pair_tol(source.dim()),
    )
}

/// Same pairing for a raw (possibly discontinuous but bounded) field.
pub fn pair_difference_fn<F>(
    f: F,
    z_eps: &PotentialVector,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
    quad_tol: f64,
) -> Result<f64>
where
    F: Fn(Vec2) -> Vec2 + Sync,
{
    cellwise_integral(z_eps, diag0, source, quad_tol, |x, teps, yi| {
        f(x).dot(teps - yi)
    })
}

/// `∫ ‖T^ε(x) − T⁰(x)‖² dP`.
pub fn l2_sq_distance(
    z_eps: &PotentialVector,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
) -> Result<f64> {
    cellwise_integral(
        z_eps,
        diag0,
        source,
        default_pair_tol(source.dim()),
        |_, teps, yi| (teps - yi).norm_sq(),
    )
}

fn cellwise_integral<G>(
    z_eps: &PotentialVector,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
    quad_tol: f64,
    g: G,
) -> Result<f64>
where
    G: Fn(Vec2, Vec2, Vec2) -> f64 + Sync,
{
    let eps = z_eps.eps().ok_or_else(|| {
        Error::InvalidArgument("pairing needs an entropic potential for the map".into())
    })?;
    if z_eps.values().len() != diag0.len() {
        return Err(Error::InvalidArgument(format!(
            "entropic potential has {} entries but the diagram has {} cells",
            z_eps.values().len(),
            diag0.len()
        )));
    }
    if diag0.potential().kind() != PotentialKind::Unregularized {
        return Err(Error::InvalidArgument(
            "the reference diagram must come from an unregularized potential".into(),
        ));
    }
    let tau = 0.5 * eps;
    let sites = diag0.sites();
    let zv = z_eps.values();
    let n = sites.len();

    // collar panels around the cell boundaries so the eps-wide softmax layer
    // is always seen by the initial quadrature nodes
    let regions = geometry::split_layer_regions(
        geometry::integration_regions(diag0, source),
        20.0 * eps,
    );
    let per_region = quad_tol / regions.len().max(1) as f64;
    let mut total = 0.0;
    let mut w = vec![0.0; n];
    let integrand = |x: Vec2, cell: usize, w: &mut [f64]| -> f64 {
        maps::softmax_weights(sites, zv, tau, x, w);
        let mut teps = Vec2::ZERO;
        for (wi, y) in w.iter().zip(sites) {
            teps += *y * *wi;
        }
        g(x, teps, sites[cell]) * source.density(x)
    };
    for (cell, r) in &regions {
        total += match r {
            Region::Interval(a, b) => {
                let w = std::cell::RefCell::new(&mut w);
                quadrature::adaptive_interval(
                    &|x: f64| integrand(Vec2::axis(x), *cell, &mut w.borrow_mut()[..]),
                    *a,
                    *b,
                    per_region,
                    MAX_DEPTH_1D,
                )?
            }
            Region::Triangle(t) => {
                let w = std::cell::RefCell::new(&mut w);
                quadrature::adaptive_triangle(
                    &|x: Vec2| integrand(x, *cell, &mut w.borrow_mut()[..]),
                    t,
                    per_region,
                    MAX_DEPTH_2D,
                )?
            }
        };
    }
    Ok(total)
}

/// `∫ ⟨f(x), map(x) − T⁰(x)⟩ dP` for an arbitrary smooth map (e.g. the
/// entropic map of an *empirical* target whose site set differs from the
/// diagram's). `T⁰` is read off `diag0` cell by cell. `layer_eps` declares
/// the regularization scale of `map`, so boundary layers of that width get
/// dedicated collar panels; pass `None` for a layer-free map.
pub fn pair_with_map<F, M>(
    f: F,
    map: M,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
    quad_tol: f64,
    layer_eps: Option<f64>,
) -> Result<f64>
where
    F: Fn(Vec2) -> Vec2 + Sync,
    M: Fn(Vec2) -> Vec2 + Sync,
{
    if diag0.potential().kind() != PotentialKind::Unregularized {
        return Err(Error::InvalidArgument(
            "the reference diagram must come from an unregularized potential".into(),
        ));
    }
    let sites = diag0.sites();
    let regions = geometry::split_layer_regions(
        geometry::integration_regions(diag0, source),
        20.0 * layer_eps.unwrap_or(0.0),
    );
    let per_region = quad_tol / regions.len().max(1) as f64;
    let mut total = 0.0;
    for (cell, r) in &regions {
        let yi = sites[*cell];
        let g = |x: Vec2| f(x).dot(map(x) - yi) * source.density(x);
        total += match r {
            Region::Interval(a, b) => quadrature::adaptive_interval(
                &|x: f64| g(Vec2::axis(x)),
                *a,
                *b,
                per_region,
                MAX_DEPTH_1D,
            )?,
            Region::Triangle(t) => {
                quadrature::adaptive_triangle(&g, t, per_region, MAX_DEPTH_2D)?
            }
        };
    }
    Ok(total)
}

/// Deterministic family of normalized α-Hölder fields (`holder_bound = 1`):
/// centered linear fields, directional sign-power fields, and Gaussian bumps,
/// cycled until `count` fields are produced.
pub fn make_test_family(
    alpha: f64,
    count: usize,
    seed: u64,
    domain: &Domain,
) -> Result<Vec<TestField>> {
    if !(0.0 < alpha && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Hölder exponent must lie in (0, 1], got {alpha}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = domain.bounding_box();
    let diam = domain.diameter();
    let dim = domain.dim();
    let center = (lo + hi) * 0.5;

    let rand_point = |rng: &mut ChaCha8Rng| {
        Vec2::new(
            rng.gen_range(lo.x..=hi.x),
            if dim == 1 { 0.0 } else { rng.gen_range(lo.y..=hi.y) },
        )
    };
    let rand_dir = |rng: &mut ChaCha8Rng| {
        if dim == 1 {
            Vec2::axis(if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        } else {
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Vec2::new(t.cos(), t.sin())
        }
    };

    let mut fields = Vec::with_capacity(count);
    for k in 0..count {
        let field = match k % 3 {
            0 => {
                // centered linear field along a random direction; Lipschitz
                // constant 1, converted to an α-Hölder constant via diam^(1-α)
                let u = rand_dir(&mut rng);
                let scale = 1.0 / diam.powf(1.0 - alpha);
                TestField::new(
                    Arc::new(move |x: Vec2| u * (u.dot(x - center) * scale)),
                    alpha,
                    1.0,
                    format!("linear-{k}"),
                )?
            }
            1 => {
                // t ↦ sign(t)|t|^α has Hölder constant 2^(1-α)
                let u = rand_dir(&mut rng);
                let p = rand_point(&mut rng);
                let scale = 1.0 / 2f64.powf(1.0 - alpha);
                let a = alpha;
                TestField::new(
                    Arc::new(move |x: Vec2| {
                        let t = u.dot(x - p);
                        u * (t.signum() * t.abs().powf(a) * scale)
                    }),
                    alpha,
                    1.0,
                    format!("sign-power-{k}"),
                )?
            }
            _ => {
                // Gaussian bump: |f| ≤ 1, Lipschitz L = e^(-1/2)/w, so the
                // α-Hölder constant is at most L^α · 2^(1-α)
                let u = rand_dir(&mut rng);
                let p = rand_point(&mut rng);
                let w: f64 = rng.gen_range(0.1 * diam..=0.5 * diam);
                let lip = (-0.5f64).exp() / w;
                let scale = 1.0 / (lip.powf(alpha) * 2f64.powf(1.0 - alpha));
                TestField::new(
                    Arc::new(move |x: Vec2| {
                        u * ((-(x - p).norm_sq() / (2.0 * w * w)).exp() * scale)
                    }),
                    alpha,
                    1.0,
                    format!("bump-{k}"),
                )?
            }
        };
        fields.push(field);
    }
    Ok(fields)
}

/// `max_φ |⟨φ, T^ε − T⁰⟩| / C_φ` over the family: a lower bound for the dual
/// α-Hölder norm of the map difference.
pub fn dual_norm_lower_bound(
    z_eps: &PotentialVector,
    diag0: &LaguerreDiagram,
    source: &SourceMeasure,
    family: &[TestField],
) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty test family".into()));
    }
    let mut best: f64 = 0.0;
    for phi in family {
        let v = pair_difference(phi, z_eps, diag0, source)?;
        best = best.max(v.abs() / phi.holder_bound);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_diagram;
    use crate::measures::{Density, DiscreteMeasure};

    fn symmetric() -> (SourceMeasure, DiscreteMeasure, LaguerreDiagram) {
        let src =
            SourceMeasure::new(Domain::interval(-1.0, 1.0).unwrap(), Density::Uniform).unwrap();
        let tgt = DiscreteMeasure::new_1d(&[-1.0, 1.0], &[0.5, 0.5], None).unwrap();
        let z0 = PotentialVector::zeros(2, PotentialKind::Unregularized);
        let diag = build_diagram(&src, &tgt, &z0).unwrap();
        (src, tgt, diag)
    }

    fn identity_field() -> TestField {
        TestField::new(Arc::new(|x| x), 1.0, 1.0, "identity").unwrap()
    }

    #[test]
    fn identity_pairing_matches_closed_form() {
        let (src, _tgt, diag) = symmetric();
        for eps in [0.3, 0.05] {
            let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps });
            let got = pair_difference(&identity_field(), &z, &diag, &src).unwrap();
            // ∫ x (tanh(2x/ε) − sign x) ρ dx = ∫₀¹ x (tanh(2x/ε) − 1) dx
            let want = quadrature::adaptive_interval(
                &|x: f64| x * ((2.0 * x / eps).tanh() - 1.0),
                0.0,
                1.0,
                1e-14,
                44,
            )
            .unwrap();
            assert!((got - want).abs() < 1e-11, "eps={eps} got={got} want={want}");
        }
    }

    #[test]
    fn l2_distance_matches_closed_form() {
        let (src, _tgt, diag) = symmetric();
        let eps = 0.1;
        let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps });
        let got = l2_sq_distance(&z, &diag, &src).unwrap();
        let want = quadrature::adaptive_interval(
            &|x: f64| ((2.0 * x / eps).tanh() - 1.0).powi(2),
            0.0,
            1.0,
            1e-14,
            44,
        )
        .unwrap();
        assert!((got - want).abs() < 1e-11, "got={got} want={want}");
    }

    #[test]
    fn pairing_is_linear_in_the_field() {
        let (src, _tgt, diag) = symmetric();
        let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps: 0.2 });
        let tol = default_pair_tol(1);
        let pa = pair_difference_fn(|x| x, &z, &diag, &src, tol).unwrap();
        let pb =
            pair_difference_fn(|x: Vec2| Vec2::axis((3.0 * x.x).sin()), &z, &diag, &src, tol)
                .unwrap();
        let pc = pair_difference_fn(
            |x: Vec2| x * 2.0 + Vec2::axis((3.0 * x.x).sin()) * -0.5,
            &z,
            &diag,
            &src,
            tol,
        )
        .unwrap();
        assert!((pc - (2.0 * pa - 0.5 * pb)).abs() < 1e-11);
    }

    #[test]
    fn cauchy_schwarz_bound_holds() {
        let (src, _tgt, diag) = symmetric();
        let z = PotentialVector::zeros(2, PotentialKind::Entropic { eps: 0.2 });
        let phi = identity_field();
        let p = pair_difference(&phi, &z, &diag, &src).unwrap();
        let l2 = l2_sq_distance(&z, &diag, &src).unwrap();
        let phi_l2 = src.integrate(|x| phi.eval(x).norm_sq()).unwrap();
        assert!(p * p <= l2 * phi_l2 * (1.0 + 1e-10));
    }

    #[test]
    fn family_fields_pass_their_certificates() {
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        for alpha in [0.5, 1.0] {
            for f in make_test_family(alpha, 6, 42, &domain).unwrap() {
                let worst = f.certify(&domain, 2000, 7).unwrap();
                assert!(worst <= 1.0 + 1e-9, "{} ratio {worst}", f.label);
            }
        }
        let sq = Domain::polygon(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        for f in make_test_family(0.75, 6, 1, &sq).unwrap() {
            f.certify(&sq, 2000, 7).unwrap();
        }
    }

    #[test]
    fn certificate_rejects_a_mislabeled_field() {
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        // claims Hölder-1/2 with constant 1 but is the raw identity
        let bad = TestField::new(Arc::new(|x| x), 0.5, 1.0, "bad").unwrap();
        assert!(bad.certify(&domain, 2000, 3).is_err());
    }

    #[test]
    fn family_is_deterministic_in_the_seed() {
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let a = make_test_family(0.5, 5, 9, &domain).unwrap();
        let b = make_test_family(0.5, 5, 9, &domain).unwrap();
        let probe = Vec2::axis(0.37);
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.label, fb.label);
            assert_eq!(fa.eval(probe).x, fb.eval(probe).x);
        }
    }

    #[test]
    fn dual_norm_bound_is_nonnegative_and_seesaws_with_eps() {
        let (src, _tgt, diag) = symmetric();
        let domain = Domain::interval(-1.0, 1.0).unwrap();
        let family = make_test_family(1.0, 4, 11, &domain).unwrap();
        let big = dual_norm_lower_bound(
            &PotentialVector::zeros(2, PotentialKind::Entropic { eps: 0.4 }),
            &diag,
            &src,
            &family,
        )
        .unwrap();
        let small = dual_norm_lower_bound(
            &PotentialVector::zeros(2, PotentialKind::Entropic { eps: 0.05 }),
            &diag,
            &src,
            &family,
        )
        .unwrap();
        assert!(big > small && small > 0.0, "big={big} small={small}");
    }
}
