//! Laguerre (power) diagrams for a potential vector: cell geometry, cell
//! masses, facet integrals, level-set integrals, and the mass Jacobian.

use super::polygon::ConvexPolygon;
use super::GEOM_TOL;
use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, Domain, SourceMeasure};
use crate::vec2::Vec2;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Dual potential vector, normalized so its entries sum to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialVector {
    values: Vec<f64>,
    kind: PotentialKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    Unregularized,
    Entropic { eps: f64 },
}

impl PotentialVector {
    /// Construct with zero-sum normalization applied (the semidual objective
    /// is invariant under constant shifts, so nothing is lost).
    pub fn new(mut values: Vec<f64>, kind: PotentialKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty potential vector".into()));
        }
        if let PotentialKind::Entropic { eps } = kind {
            if !(eps > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "entropic potential needs eps > 0, got {eps}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite potential entry".into()));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &mut values {
            *v -= mean;
        }
        Ok(PotentialVector { values, kind })
    }

    pub fn zeros(n: usize, kind: PotentialKind) -> Self {
        PotentialVector {
            values: vec![0.0; n],
            kind,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn eps(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Entropic { eps } => Some(eps),
            PotentialKind::Unregularized => None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Geometry of a single Laguerre cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum CellGeom {
    Empty,
    Interval { lo: f64, hi: f64 },
    Polygon(ConvexPolygon),
}

impl CellGeom {
    pub fn is_empty(&self) -> bool {
        matches!(self, CellGeom::Empty)
    }
}

/// Shared face of two cells: a point in 1D, a segment in 2D.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum FacetGeom {
    Point(Vec2),
    Segment(Vec2, Vec2),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Facet {
    /// Lower cell index (`i < j`).
    pub i: usize,
    pub j: usize,
    pub geom: FacetGeom,
    /// `v_ij = (y_i - y_j) / ||y_i - y_j||²`.
    pub direction: Vec2,
}

/// Laguerre diagram of a potential vector over the source domain.
#[derive(Clone, Debug)]
pub struct LaguerreDiagram {
    sites: Vec<Vec2>,
    potential: PotentialVector,
    dim: usize,
    cells: Vec<CellGeom>,
    facets: Vec<Facet>,
}

/// Build the diagram: sorted breakpoints of the piecewise-linear upper
/// envelope in 1D, successive half-plane clipping in 2D. Empty cells are
/// allowed and flagged as [`CellGeom::Empty`].
pub fn build_diagram(
    source: &SourceMeasure,
    target: &DiscreteMeasure,
    z: &PotentialVector,
) -> Result<LaguerreDiagram> {
    if z.len() != target.len() {
        return Err(Error::InvalidArgument(format!(
            "potential length {} does not match {} support points",
            z.len(),
            target.len()
        )));
    }
    if source.dim() != target.dim() {
        return Err(Error::InvalidArgument(format!(
            "source dimension {} does not match target dimension {}",
            source.dim(),
            target.dim()
        )));
    }
    let sites = target.points().to_vec();
    let (cells, facets) = match source.domain() {
        Domain::Interval { lo, hi } => build_1d(&sites, z.values(), *lo, *hi),
        Domain::Polygon(poly) => build_2d(&sites, z.values(), poly),
    };
    Ok(LaguerreDiagram {
        sites,
        potential: z.clone(),
        dim: source.dim(),
        cells,
        facets,
    })
}

/// Upper envelope of the lines `x ↦ yᵢ·x − zᵢ` over `[lo, hi]`.
fn build_1d(
    sites: &[Vec2],
    z: &[f64],
    lo: f64,
    hi: f64,
) -> (Vec<CellGeom>, Vec<Facet>) {
    let n = sites.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sites[a].x.partial_cmp(&sites[b].x).unwrap());

    // convex-hull trick on (slope, intercept) = (y_i, -z_i)
    let mut env: Vec<usize> = Vec::new();
    let mut bp: Vec<f64> = Vec::new();
    let cross_x = |a: usize, b: usize| (z[b] - z[a]) / (sites[b].x - sites[a].x);
    for &i in &order {
        loop {
            match env.last() {
                None => {
                    env.push(i);
                    break;
                }
                Some(&j) => {
                    let x = cross_x(j, i);
                    if let Some(&last) = bp.last() {
                        if x <= last {
                            env.pop();
                            bp.pop();
                            continue;
                        }
                    }
                    env.push(i);
                    bp.push(x);
                    break;
                }
            }
        }
    }

    let mut cells = vec![CellGeom::Empty; n];
    let mut facets = Vec::new();
    for (k, &i) in env.iter().enumerate() {
        let a = if k == 0 { lo } else { bp[k - 1].max(lo) };
        let b = if k == env.len() - 1 { hi } else { bp[k].min(hi) };
        if b > a {
            cells[i] = CellGeom::Interval { lo: a, hi: b };
        }
    }
    for (k, &x) in bp.iter().enumerate() {
        if x <= lo || x >= hi {
            continue;
        }
        let (a, b) = (env[k], env[k + 1]);
        if cells[a].is_empty() || cells[b].is_empty() {
            continue;
        }
        let (i, j) = (a.min(b), a.max(b));
        let d = sites[i] - sites[j];
        facets.push(Facet {
            i,
            j,
            geom: FacetGeom::Point(Vec2::axis(x)),
            direction: d * (1.0 / d.norm_sq()),
        });
    }
    facets.sort_by_key(|f| (f.i, f.j));
    (cells, facets)
}

fn build_2d(sites: &[Vec2], z: &[f64], domain: &ConvexPolygon) -> (Vec<CellGeom>, Vec<Facet>) {
    let n = sites.len();
    let mut cells = Vec::with_capacity(n);
    for i in 0..n {
        let mut cell = Some(domain.clone());
        for j in 0..n {
            if i == j {
                continue;
            }
            let normal = sites[i] - sites[j];
            let offset = z[i] - z[j];
            cell = match cell {
                Some(c) => {
                    let clipped = c.clip_halfplane(normal, offset);
                    if clipped.is_none() && c.area() > GEOM_TOL {
                        log::debug!("cell {i} clipped away by half-plane against site {j}");
                    }
                    clipped
                }
                None => None,
            };
            if cell.is_none() {
                break;
            }
        }
        match cell {
            Some(c) if c.area() < 1e-14 => {
                log::warn!("cell {i} is numerically degenerate (area {} < 1e-14); marked empty", c.area());
                cells.push(CellGeom::Empty);
            }
            Some(c) => cells.push(CellGeom::Polygon(c)),
            None => cells.push(CellGeom::Empty),
        }
    }
    let mut facets = Vec::new();
    for i in 0..n {
        let CellGeom::Polygon(ci) = &cells[i] else {
            continue;
        };
        for j in (i + 1)..n {
            if cells[j].is_empty() {
                continue;
            }
            let normal = sites[i] - sites[j];
            if let Some((a, b)) = ci.line_section(normal, z[i] - z[j]) {
                facets.push(Facet {
                    i,
                    j,
                    geom: FacetGeom::Segment(a, b),
                    direction: normal * (1.0 / normal.norm_sq()),
                });
            }
        }
    }
    (cells, facets)
}

impl LaguerreDiagram {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[Vec2] {
        &self.sites
    }

    pub fn potential(&self) -> &PotentialVector {
        &self.potential
    }

    pub fn cell(&self, i: usize) -> &CellGeom {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[CellGeom] {
        &self.cells
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, i: usize, j: usize) -> Option<&Facet> {
        let (a, b) = (i.min(j), i.max(j));
        self.facets.iter().find(|f| f.i == a && f.j == b)
    }

    /// Index of the cell containing `x`; boundary ties go to the lowest
    /// index. Errors when `x` lies outside the domain of every cell.
    pub fn locate(&self, x: Vec2) -> Result<usize> {
        for (i, cell) in self.cells.iter().enumerate() {
            let inside = match cell {
                CellGeom::Empty => false,
                CellGeom::Interval { lo, hi } => x.x >= lo - GEOM_TOL && x.x <= hi + GEOM_TOL,
                CellGeom::Polygon(p) => p.contains(x, GEOM_TOL),
            };
            if inside {
                return Ok(i);
            }
        }
        Err(Error::OutsideDomain(x))
    }

    /// Structured text dump (cell vertex lists, optional masses, facet
    /// table) for debugging and plotting.
    pub fn dump_text(&self, masses: Option<&[f64]>) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "# laguerre diagram: {} cells, dim {}", self.len(), self.dim).unwrap();
        writeln!(s, "# potential: {:?}", self.potential.values()).unwrap();
        for (i, cell) in self.cells.iter().enumerate() {
            let mass = masses.map(|m| format!(" mass={:.12e}", m[i])).unwrap_or_default();
            match cell {
                CellGeom::Empty => writeln!(s, "cell {i} EMPTY{mass}").unwrap(),
                CellGeom::Interval { lo, hi } => {
                    writeln!(s, "cell {i} interval [{lo:.12}, {hi:.12}]{mass}").unwrap()
                }
                CellGeom::Polygon(p) => {
                    let verts: Vec<String> = p
                        .vertices()
                        .iter()
                        .map(|v| format!("({:.12}, {:.12})", v.x, v.y))
                        .collect();
                    writeln!(s, "cell {i} polygon {}{mass}", verts.join(" ")).unwrap()
                }
            }
        }
        for f in &self.facets {
            match f.geom {
                FacetGeom::Point(p) => {
                    writeln!(s, "facet ({}, {}) point ({:.12}, {:.12})", f.i, f.j, p.x, p.y).unwrap()
                }
                FacetGeom::Segment(a, b) => writeln!(
                    s,
                    "facet ({}, {}) segment ({:.12}, {:.12}) -- ({:.12}, {:.12})",
                    f.i, f.j, a.x, a.y, b.x, b.y
                )
                .unwrap(),
            }
        }
        s
    }
}

/// `P(Cᵢ(z)) = ∫_{Cᵢ} ρ dx`; zero for empty cells.
pub fn cell_mass(diag: &LaguerreDiagram, source: &SourceMeasure, i: usize) -> Result<f64> {
    match &diag.cells[i] {
        CellGeom::Empty => Ok(0.0),
        CellGeom::Interval { lo, hi } => source.integrate_over_interval(*lo, *hi, |_| 1.0),
        CellGeom::Polygon(p) => source.integrate_over_polygon(p, |_| 1.0),
    }
}

/// All cell masses in one pass.
pub fn cell_masses(diag: &LaguerreDiagram, source: &SourceMeasure) -> Result<Vec<f64>> {
    (0..diag.len()).map(|i| cell_mass(diag, source, i)).collect()
}

/// Elementary integration region used by the adaptive quadrature drivers.
pub(crate) enum Region {
    Interval(f64, f64),
    Triangle([Vec2; 3]),
}

/// Decompose the diagram into (cell index, region) pairs: intervals split at
/// density breakpoints in 1D, centroid fan triangles in 2D. Empty cells
/// contribute nothing.
pub(crate) fn integration_regions(
    diag: &LaguerreDiagram,
    source: &SourceMeasure,
) -> Vec<(usize, Region)> {
    let mut regions = Vec::new();
    for (i, cell) in diag.cells.iter().enumerate() {
        match cell {
            CellGeom::Empty => {}
            CellGeom::Interval { lo, hi } => {
                let mut knots = source.density_breakpoints(*lo, *hi);
                knots.insert(0, *lo);
                knots.push(*hi);
                for w in knots.windows(2) {
                    if w[1] > w[0] {
                        regions.push((i, Region::Interval(w[0], w[1])));
                    }
                }
            }
            CellGeom::Polygon(p) => {
                for t in p.fan_triangles() {
                    regions.push((i, Region::Triangle(t)));
                }
            }
        }
    }
    regions
}

/// Pre-split regions so a softmax boundary layer of width `~collar` hugging
/// the cell boundary is always sampled by the initial quadrature nodes: wide
/// intervals get collar panels at both ends, fan triangles get a collar strip
/// along their base edge (the cell boundary). Without this the first
/// coarse/fine comparison can step right over a layer much thinner than the
/// region and accept a spuriously smooth integrand.
pub(crate) fn split_layer_regions(
    regions: Vec<(usize, Region)>,
    collar: f64,
) -> Vec<(usize, Region)> {
    if !(collar > 0.0) {
        return regions;
    }
    let mut out = Vec::with_capacity(regions.len());
    for (i, r) in regions {
        match r {
            Region::Interval(a, b) => {
                if b - a > 4.0 * collar {
                    out.push((i, Region::Interval(a, a + collar)));
                    out.push((i, Region::Interval(a + collar, b - collar)));
                    out.push((i, Region::Interval(b - collar, b)));
                } else {
                    out.push((i, Region::Interval(a, b)));
                }
            }
            Region::Triangle(t) => {
                // fan triangles have the apex (cell centroid) first and the
                // boundary edge as their base
                let base = t[2] - t[1];
                let len = base.norm();
                let area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs();
                let height = if len > 0.0 { 2.0 * area / len } else { 0.0 };
                if height > 4.0 * collar {
                    let s = collar / height;
                    let u1 = t[1] + (t[0] - t[1]) * s;
                    let u2 = t[2] + (t[0] - t[2]) * s;
                    out.push((i, Region::Triangle([t[1], t[2], u2])));
                    out.push((i, Region::Triangle([t[1], u2, u1])));
                    out.push((i, Region::Triangle([u1, u2, t[0]])));
                } else {
                    out.push((i, Region::Triangle(t)));
                }
            }
        }
    }
    out
}

/// Facet integral over `Cᵢ ∩ Cⱼ`: unweighted `∫ ρ dH^{d-1}`, or weighted
/// `∫ ⟨yⱼ−yᵢ, φ(x)⟩ ρ(x) dH^{d-1}(x)` when a field is supplied. In 1D the
/// facet is a point and the integral is a (weighted) density evaluation.
pub fn facet_integral(
    diag: &LaguerreDiagram,
    source: &SourceMeasure,
    i: usize,
    j: usize,
    weight: Option<&dyn Fn(Vec2) -> Vec2>,
) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidArgument(
            "facet integral needs distinct cell indices".into(),
        ));
    }
    let Some(facet) = diag.facet(i, j) else {
        return Ok(0.0);
    };
    let d = diag.sites[j] - diag.sites[i];
    let integrand = |x: Vec2| -> f64 {
        let rho = source.density(x);
        match weight {
            None => rho,
            Some(phi) => d.dot(phi(x)) * rho,
        }
    };
    match facet.geom {
        FacetGeom::Point(p) => Ok(integrand(p)),
        FacetGeom::Segment(a, b) => {
            crate::quadrature::integrate_segment(&integrand, a, b, source.quad().order, 4)
        }
    }
}

/// Integral of (weighted) `ρ` over the level set
/// `{x ∈ Cᵢ(z) : Δ_{ij}(x) = t}` with `Δ_{ij}(x) = ⟨yᵢ−yⱼ, x⟩ − zᵢ + zⱼ`.
/// Empty level sets integrate to zero.
pub fn level_set_integral(
    diag: &LaguerreDiagram,
    source: &SourceMeasure,
    i: usize,
    j: usize,
    t: f64,
    weight: Option<&dyn Fn(Vec2) -> Vec2>,
) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidArgument(
            "level-set integral needs distinct cell indices".into(),
        ));
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "level-set offset must be nonnegative, got {t}"
        )));
    }
    let z = diag.potential.values();
    let normal = diag.sites[i] - diag.sites[j];
    let offset = z[i] - z[j] + t;
    let d = diag.sites[j] - diag.sites[i];
    let integrand = |x: Vec2| -> f64 {
        let rho = source.density(x);
        match weight {
            None => rho,
            Some(phi) => d.dot(phi(x)) * rho,
        }
    };
    match &diag.cells[i] {
        CellGeom::Empty => Ok(0.0),
        CellGeom::Interval { lo, hi } => {
            let x = offset / normal.x;
            if x >= lo - GEOM_TOL && x <= hi + GEOM_TOL {
                Ok(integrand(Vec2::axis(x)))
            } else {
                Ok(0.0)
            }
        }
        CellGeom::Polygon(p) => match p.line_section(normal, offset) {
            Some((a, b)) => {
                crate::quadrature::integrate_segment(&integrand, a, b, source.quad().order, 4)
            }
            None => Ok(0.0),
        },
    }
}

/// Jacobian of cell masses with respect to the potential:
/// `J_{ij} = facet(i,j) / ||yᵢ−yⱼ||` off the diagonal, rows summing to zero.
/// Symmetric; `−J` is positive semidefinite with `𝟙` in its kernel.
pub fn mass_jacobian(diag: &LaguerreDiagram, source: &SourceMeasure) -> Result<DMatrix<f64>> {
    let n = diag.len();
    let mut jac = DMatrix::zeros(n, n);
    for f in &diag.facets {
        let v = facet_integral(diag, source, f.i, f.j, None)?
            / diag.sites[f.i].dist(diag.sites[f.j]);
        jac[(f.i, f.j)] = v;
        jac[(f.j, f.i)] = v;
    }
    for i in 0..n {
        let row_sum: f64 = (0..n).filter(|&j| j != i).map(|j| jac[(i, j)]).sum();
        jac[(i, i)] = -row_sum;
    }
    Ok(jac)
}
