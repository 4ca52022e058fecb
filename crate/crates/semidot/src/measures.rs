//! The marginals: an absolutely continuous source on a compact convex domain
//! and a finitely supported discrete target, plus the quadrature and sampling
//! services every solver builds on.

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::quadrature;
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Compact convex support: an interval on the line or a convex polygon.
/// Dimensions three and up are rejected at construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Polygon(ConvexPolygon),
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidMeasure(format!(
                "interval [{lo}, {hi}] is empty or unbounded"
            )));
        }
        Ok(Domain::Interval { lo, hi })
    }

    pub fn polygon(verts: Vec<Vec2>) -> Result<Self> {
        Ok(Domain::Polygon(ConvexPolygon::new(verts)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Polygon(_) => 2,
        }
    }

    /// Lebesgue measure (length or area).
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Polygon(p) => p.area(),
        }
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        match self {
            Domain::Interval { lo, hi } => p.x >= lo - tol && p.x <= hi + tol,
            Domain::Polygon(poly) => poly.contains(p, tol),
        }
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match self {
            Domain::Interval { lo, hi } => (Vec2::axis(*lo), Vec2::axis(*hi)),
            Domain::Polygon(p) => p.bounding_box(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Polygon(p) => p.diameter(),
        }
    }
}

/// Density families shipped with the crate. Each carries an analytic
/// Lipschitz bound; values are unnormalized and scaled at construction so the
/// total mass is one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Density {
    Uniform,
    /// Isotropic Gaussian truncated to the domain and renormalized.
    Gaussian { mean: Vec2, sigma: f64 },
    /// Positive piecewise-linear density on an interval domain (1D only).
    /// Knots must cover the domain and values must be strictly positive.
    Spline { knots: Vec<f64>, values: Vec<f64> },
}

impl Density {
    fn raw(&self, x: Vec2) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::Gaussian { mean, sigma } => {
                let r2 = (x - *mean).norm_sq();
                (-0.5 * r2 / (sigma * sigma)).exp()
            }
            Density::Spline { knots, values } => piecewise_linear(knots, values, x.x),
        }
    }

    /// x-coordinates where the density is not smooth (panel boundaries for
    /// 1D quadrature).
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Spline { knots, .. } => knots.clone(),
            _ => Vec::new(),
        }
    }
}

fn piecewise_linear(knots: &[f64], values: &[f64], x: f64) -> f64 {
    if x <= knots[0] {
        return values[0];
    }
    if x >= *knots.last().unwrap() {
        return *values.last().unwrap();
    }
    let k = knots.partition_point(|&t| t <= x) - 1;
    let (t0, t1) = (knots[k], knots[k + 1]);
    let w = (x - t0) / (t1 - t0);
    values[k] * (1.0 - w) + values[k + 1] * w
}

/// Quadrature configuration used by all `integrate` calls on a source.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Gauss–Legendre order per 1D panel.
    pub order: usize,
    /// Panels per smooth 1D segment (capped at 256).
    pub panels: usize,
    /// Points per direction of the collapsed triangle rule (5 = degree 8).
    pub tri_order: usize,
    /// Uniform subdivision levels per fan triangle.
    pub tri_subdiv: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order: 32,
            panels: 64,
            tri_order: 5,
            tri_subdiv: 3,
        }
    }
}

/// The absolutely continuous input measure: convex domain, strictly positive
/// Lipschitz density, and bounds certifying that.
#[derive(Clone, Debug)]
pub struct SourceMeasure {
    domain: Domain,
    density: Density,
    scale: f64,
    lipschitz_bound: f64,
    density_min: f64,
    density_max: f64,
    quad: QuadConfig,
}

impl SourceMeasure {
    pub fn new(domain: Domain, density: Density) -> Result<Self> {
        Self::with_quadrature(domain, density, QuadConfig::default())
    }

    pub fn with_quadrature(domain: Domain, density: Density, quad: QuadConfig) -> Result<Self> {
        if quad.panels == 0 || quad.panels > 256 {
            return Err(Error::InvalidMeasure(format!(
                "1D quadrature panel count {} outside 1..=256",
                quad.panels
            )));
        }
        match (&domain, &density) {
            (Domain::Polygon(_), Density::Spline { .. }) => {
                return Err(Error::InvalidMeasure(
                    "spline densities are 1D-only".into(),
                ))
            }
            (Domain::Interval { lo, hi }, Density::Spline { knots, values }) => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return Err(Error::InvalidMeasure(
                        "spline needs matching knot/value lists of length >= 2".into(),
                    ));
                }
                if knots.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidMeasure(
                        "spline knots must be strictly increasing".into(),
                    ));
                }
                if knots[0] > *lo || *knots.last().unwrap() < *hi {
                    return Err(Error::InvalidMeasure(
                        "spline knots must cover the domain interval".into(),
                    ));
                }
                if values.iter().any(|&v| v <= 0.0) {
                    return Err(Error::InvalidMeasure(
                        "spline values must be strictly positive".into(),
                    ));
                }
            }
            (_, Density::Gaussian { sigma, .. }) => {
                if *sigma <= 0.0 {
                    return Err(Error::InvalidMeasure("gaussian sigma must be positive".into()));
                }
            }
            _ => {}
        }
        let mut src = SourceMeasure {
            domain,
            density,
            scale: 1.0,
            lipschitz_bound: 0.0,
            density_min: 0.0,
            density_max: 0.0,
            quad,
        };
        let raw_mass = match &src.density {
            // mass of the uniform raw density is the domain volume, exactly
            Density::Uniform => src.domain.volume(),
            _ => src.integrate_raw()?,
        };
        if !(raw_mass.is_finite() && raw_mass > 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "density has non-positive raw mass {raw_mass}"
            )));
        }
        src.scale = 1.0 / raw_mass;
        let (raw_min, raw_max) = src.raw_extrema();
        src.density_min = raw_min * src.scale;
        src.density_max = raw_max * src.scale;
        src.lipschitz_bound = src.raw_lipschitz() * src.scale;
        if src.density_min <= 0.0 {
            return Err(Error::InvalidMeasure(
                "density lower bound on the domain is not strictly positive".into(),
            ));
        }
        Ok(src)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn quad(&self) -> QuadConfig {
        self.quad
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn density_min(&self) -> f64 {
        self.density_min
    }

    pub fn density_max(&self) -> f64 {
        self.density_max
    }

    /// Normalized density value.
    pub fn density(&self, x: Vec2) -> f64 {
        self.scale * self.density.raw(x)
    }

    /// 1D panel boundaries inside `(a, b)` where the density is not smooth.
    pub fn density_breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        self.density
            .breakpoints()
            .into_iter()
            .filter(|&t| t > a && t < b)
            .collect()
    }

    fn integrate_raw(&self) -> Result<f64> {
        match &self.domain {
            Domain::Interval { lo, hi } => {
                self.integrate_interval_with(*lo, *hi, &|x| self.density.raw(Vec2::axis(x)))
            }
            Domain::Polygon(poly) => {
                self.integrate_polygon_with(poly, &|p| self.density.raw(p))
            }
        }
    }

    fn integrate_interval_with(&self, a: f64, b: f64, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        let mut cuts = vec![a];
        cuts.extend(self.density_breakpoints(a, b));
        cuts.push(b);
        let segs: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
        quadrature::integrate_segments(g, &segs, self.quad.order, self.quad.panels)
    }

    fn integrate_polygon_with(&self, poly: &ConvexPolygon, g: &dyn Fn(Vec2) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for tri in poly.fan_triangles() {
            total +=
                quadrature::integrate_triangle_subdiv(g, &tri, self.quad.tri_order, self.quad.tri_subdiv)?;
        }
        Ok(total)
    }

    /// `∫ f dP = ∫ f(x) ρ(x) dx` over the whole domain with the configured
    /// composite rules. Deterministic for a fixed configuration.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(Vec2) -> f64,
    {
        match &self.domain {
            Domain::Interval { lo, hi } => self.integrate_over_interval(*lo, *hi, f),
            Domain::Polygon(poly) => self.integrate_over_polygon(poly, f),
        }
    }

    /// `∫_a^b f ρ dx` for an interval sub-region (1D cells).
    pub fn integrate_over_interval<F>(&self, a: f64, b: f64, f: F) -> Result<f64>
    where
        F: Fn(Vec2) -> f64,
    {
        if b <= a {
            return Ok(0.0);
        }
        self.integrate_interval_with(a, b, &|x| {
            let p = Vec2::axis(x);
            f(p) * self.density(p)
        })
    }

    /// `∫_poly f ρ dx` for a convex polygonal sub-region (2D cells).
    pub fn integrate_over_polygon<F>(&self, poly: &ConvexPolygon, f: F) -> Result<f64>
    where
        F: Fn(Vec2) -> f64,
    {
        self.integrate_polygon_with(poly, &|p| f(p) * self.density(p))
    }

    /// Draw `n` i.i.d. samples by rejection from the bounding box.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec2>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.domain.bounding_box();
        let mut out = Vec::with_capacity(n);
        let mut proposed: u64 = 0;
        let mut accepted: u64 = 0;
        let dmax = self.density_max;
        while out.len() < n {
            proposed += 1;
            let x = rng.gen_range(lo.x..=hi.x);
            let y = if self.dim() == 2 {
                rng.gen_range(lo.y..=hi.y)
            } else {
                0.0
            };
            let p = Vec2::new(x, y);
            if !self.domain.contains(p, 0.0) {
                continue;
            }
            let u: f64 = rng.gen();
            if u * dmax <= self.density(p) {
                accepted += 1;
                out.push(p);
            }
            if proposed >= 1_000_000 && (accepted as f64) < 1e-6 * proposed as f64 {
                return Err(Error::DegenerateSampling { accepted, proposed });
            }
        }
        Ok(out)
    }

    fn raw_extrema(&self) -> (f64, f64) {
        match (&self.domain, &self.density) {
            (_, Density::Uniform) => (1.0, 1.0),
            (Domain::Interval { lo, hi }, Density::Gaussian { mean, sigma: _ }) => {
                let nearest = mean.x.clamp(*lo, *hi);
                let far = if (mean.x - lo).abs() > (mean.x - hi).abs() {
                    *lo
                } else {
                    *hi
                };
                (
                    self.density.raw(Vec2::axis(far)),
                    self.density.raw(Vec2::axis(nearest)),
                )
            }
            (Domain::Polygon(poly), Density::Gaussian { mean, .. }) => {
                // max at the projection of the mean onto the convex domain,
                // min at the farthest vertex
                let nearest = if poly.contains(*mean, 0.0) {
                    *mean
                } else {
                    let verts = poly.vertices();
                    let n = verts.len();
                    let mut best = verts[0];
                    let mut best_d = f64::INFINITY;
                    for i in 0..n {
                        let p = project_segment(*mean, verts[i], verts[(i + 1) % n]);
                        let d = p.dist(*mean);
                        if d < best_d {
                            best_d = d;
                            best = p;
                        }
                    }
                    best
                };
                let far = poly
                    .vertices()
                    .iter()
                    .copied()
                    .max_by(|a, b| {
                        a.dist(*mean).partial_cmp(&b.dist(*mean)).unwrap()
                    })
                    .unwrap();
                (self.density.raw(far), self.density.raw(nearest))
            }
            (Domain::Interval { lo, hi }, Density::Spline { knots, values }) => {
                // extrema of a piecewise-linear function sit at knots or ends
                let mut cands = vec![
                    piecewise_linear(knots, values, *lo),
                    piecewise_linear(knots, values, *hi),
                ];
                cands.extend(
                    knots
                        .iter()
                        .zip(values)
                        .filter(|(t, _)| **t >= *lo && **t <= *hi)
                        .map(|(_, v)| *v),
                );
                let min = cands.iter().copied().fold(f64::INFINITY, f64::min);
                let max = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (min, max)
            }
            (Domain::Polygon(_), Density::Spline { .. }) => unreachable!("rejected at construction"),
        }
    }

    fn raw_lipschitz(&self) -> f64 {
        match &self.density {
            Density::Uniform => 0.0,
            Density::Gaussian { mean, sigma } => {
                // |∇ρ| = (r/σ²) e^{-r²/2σ²}, maximized at r = σ (or at the
                // domain's farthest reach if that is smaller)
                let (lo, hi) = self.domain.bounding_box();
                let rmax = [
                    Vec2::new(lo.x, lo.y),
                    Vec2::new(hi.x, lo.y),
                    Vec2::new(lo.x, hi.y),
                    Vec2::new(hi.x, hi.y),
                ]
                .iter()
                .map(|c| c.dist(*mean))
                .fold(0.0, f64::max);
                let r = rmax.min(*sigma);
                (r / (sigma * sigma)) * (-0.5 * r * r / (sigma * sigma)).exp()
            }
            Density::Spline { knots, values } => knots
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).abs())
                .fold(0.0, f64::max),
        }
    }
}

fn project_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    a + ab * t
}

/// The discrete output measure: distinct support points with strictly
/// positive weights summing to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<Vec2>,
    weights: Vec<f64>,
    dim: usize,
    min_weight_floor: f64,
    min_pair_distance: f64,
}

impl DiscreteMeasure {
    /// Build and validate. Weights are normalized to sum exactly to one; the
    /// floor `c0` defaults to the smallest normalized weight.
    pub fn new(points: Vec<Vec2>, weights: Vec<f64>, dim: usize, floor: Option<f64>) -> Result<Self> {
        let mut violations = Vec::new();
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidMeasure(format!(
                "dimension {dim} not supported; exact geometry is implemented for d in {{1, 2}}"
            )));
        }
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "need matching nonempty point/weight lists, got {} points and {} weights",
                points.len(),
                weights.len()
            )));
        }
        if dim == 1 && points.iter().any(|p| p.y != 0.0) {
            violations.push("1D support points must have zero second coordinate".to_string());
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            violations.push("all weights must be strictly positive".to_string());
        }
        let mut delta = f64::INFINITY;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                delta = delta.min(points[i].dist(points[j]));
            }
        }
        if points.len() > 1 && delta <= 0.0 {
            violations.push("support points must be pairwise distinct".to_string());
        }
        if !violations.is_empty() {
            return Err(Error::InvalidMeasure(violations.join("; ")));
        }
        let sum: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        let min_w = weights.iter().copied().fold(f64::INFINITY, f64::min);
        let floor = floor.unwrap_or(min_w);
        if min_w < floor {
            return Err(Error::InvalidMeasure(format!(
                "smallest weight {min_w} is below the floor c0 = {floor}"
            )));
        }
        let min_pair_distance = if points.len() > 1 { delta } else { f64::INFINITY };
        Ok(DiscreteMeasure {
            points,
            weights,
            dim,
            min_weight_floor: floor,
            min_pair_distance,
        })
    }

    /// 1D convenience constructor from scalar support points.
    pub fn new_1d(xs: &[f64], weights: &[f64], floor: Option<f64>) -> Result<Self> {
        Self::new(
            xs.iter().map(|&x| Vec2::axis(x)).collect(),
            weights.to_vec(),
            1,
            floor,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min_weight_floor(&self) -> f64 {
        self.min_weight_floor
    }

    pub fn min_pair_distance(&self) -> f64 {
        self.min_pair_distance
    }

    /// Mean of the measure, `Σ qᵢ yᵢ`.
    pub fn mean(&self) -> Vec2 {
        let mut m = Vec2::ZERO;
        for (p, w) in self.points.iter().zip(&self.weights) {
            m += *p * *w;
        }
        m
    }
}

/// Empirical resample `Q̂_n` of a discrete measure: multinomial counts over
/// the same support. Zero-count atoms are retained (weight 0) and flagged;
/// solvers drop them via [`EmpiricalMeasure::effective`].
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    points: Vec<Vec2>,
    counts: Vec<u64>,
    n: u64,
    dim: usize,
}

/// Draw the empirical measure `Q̂_n = n⁻¹ Σ δ_{Y_i}` with `Y_i ~ Q` i.i.d.
pub fn sample_discrete(target: &DiscreteMeasure, n: usize, seed: u64) -> EmpiricalMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cdf = Vec::with_capacity(target.len());
    let mut acc = 0.0;
    for w in target.weights() {
        acc += w;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; target.len()];
    for _ in 0..n {
        let u: f64 = rng.gen();
        let k = cdf.partition_point(|&c| c < u).min(target.len() - 1);
        counts[k] += 1;
    }
    EmpiricalMeasure {
        points: target.points().to_vec(),
        counts,
        n: n as u64,
        dim: target.dim(),
    }
}

impl EmpiricalMeasure {
    /// Weights `kᵢ/n`; they sum to one exactly when written as a ratio of
    /// counts, and to within one ulp in floating point.
    pub fn weights(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&k| k as f64 / self.n as f64)
            .collect()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    /// Indices of atoms that received no mass.
    pub fn zero_atoms(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Valid solver input: zero-count atoms dropped. Returns the measure and
    /// the retained original indices.
    pub fn effective(&self) -> Result<(DiscreteMeasure, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.points.len())
            .filter(|&i| self.counts[i] > 0)
            .collect();
        let pts = kept.iter().map(|&i| self.points[i]).collect();
        let ws = kept
            .iter()
            .map(|&i| self.counts[i] as f64 / self.n as f64)
            .collect();
        let dm = DiscreteMeasure::new(pts, ws, self.dim, None)?;
        Ok((dm, kept))
    }
}
