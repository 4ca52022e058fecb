//! Convex polygons with counterclockwise vertex order and half-plane clipping.

use super::GEOM_TOL;
use crate::error::{Error, Result};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    verts: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Build from a vertex list. Vertices must form a convex polygon with
    /// positive area; clockwise input is reversed to counterclockwise.
    pub fn new(mut verts: Vec<Vec2>) -> Result<Self> {
        if verts.len() < 3 {
            return Err(Error::InvalidMeasure(format!(
                "polygon needs at least 3 vertices, got {}",
                verts.len()
            )));
        }
        let area2: f64 = signed_area2(&verts);
        if area2 < 0.0 {
            verts.reverse();
        }
        let poly = ConvexPolygon { verts };
        if poly.area() <= GEOM_TOL {
            return Err(Error::InvalidMeasure(
                "polygon vertices are (near-)collinear: area is numerically zero".into(),
            ));
        }
        // convexity: every turn is a left turn (within tolerance)
        let n = poly.verts.len();
        for i in 0..n {
            let a = poly.verts[i];
            let b = poly.verts[(i + 1) % n];
            let c = poly.verts[(i + 2) % n];
            if (b - a).cross(c - b) < -GEOM_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "polygon is not convex at vertex ({}, {})",
                    b.x, b.y
                )));
            }
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn area(&self) -> f64 {
        0.5 * signed_area2(&self.verts).abs()
    }

    pub fn centroid(&self) -> Vec2 {
        let mut c = Vec2::ZERO;
        let mut a2 = 0.0;
        let n = self.verts.len();
        for i in 0..n {
            let p = self.verts[i];
            let q = self.verts[(i + 1) % n];
            let w = p.cross(q);
            a2 += w;
            c += (p + q) * w;
        }
        c * (1.0 / (3.0 * a2))
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = self.verts[0];
        let mut hi = self.verts[0];
        for v in &self.verts {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.verts.iter().enumerate() {
            for b in &self.verts[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    /// Point membership with absolute tolerance on the half-plane defects.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        let n = self.verts.len();
        for i in 0..n {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % n];
            if (b - a).cross(p - a) < -tol {
                return false;
            }
        }
        true
    }

    /// Clip against the half-plane `{x : ⟨normal, x⟩ ≥ offset}`
    /// (Sutherland–Hodgman). Returns `None` when the intersection is empty or
    /// degenerate (area below tolerance with a nonempty vertex set).
    pub fn clip_halfplane(&self, normal: Vec2, offset: f64) -> Option<ConvexPolygon> {
        let n = self.verts.len();
        let mut out: Vec<Vec2> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let s = self.verts[i];
            let e = self.verts[(i + 1) % n];
            let ds = normal.dot(s) - offset;
            let de = normal.dot(e) - offset;
            if ds >= 0.0 {
                push_dedup(&mut out, s);
            }
            if (ds > 0.0 && de < 0.0) || (ds < 0.0 && de > 0.0) {
                let t = ds / (ds - de);
                push_dedup(&mut out, s + (e - s) * t);
            }
        }
        // close the dedup loop across the wrap-around
        if out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= GEOM_TOL {
            out.pop();
        }
        if out.len() < 3 {
            return None;
        }
        let poly = ConvexPolygon { verts: out };
        (poly.area() > 1e-14).then_some(poly)
    }

    /// Intersection of the polygon with the line `⟨normal, x⟩ = offset`,
    /// returned as a segment (endpoints ordered along the line direction).
    /// `None` if the line misses the polygon or touches it in a single point.
    pub fn line_section(&self, normal: Vec2, offset: f64) -> Option<(Vec2, Vec2)> {
        let dir = normal.perp();
        let n = self.verts.len();
        let mut hits: Vec<Vec2> = Vec::new();
        for i in 0..n {
            let s = self.verts[i];
            let e = self.verts[(i + 1) % n];
            let ds = normal.dot(s) - offset;
            let de = normal.dot(e) - offset;
            if ds.abs() <= GEOM_TOL {
                push_dedup(&mut hits, s);
            }
            if (ds > GEOM_TOL && de < -GEOM_TOL) || (ds < -GEOM_TOL && de > GEOM_TOL) {
                let t = ds / (ds - de);
                push_dedup(&mut hits, s + (e - s) * t);
            }
        }
        if hits.len() < 2 {
            return None;
        }
        let key = |p: &Vec2| dir.dot(*p);
        let (mut lo, mut hi) = (hits[0], hits[0]);
        for &p in &hits[1..] {
            if key(&p) < key(&lo) {
                lo = p;
            }
            if key(&p) > key(&hi) {
                hi = p;
            }
        }
        (lo.dist(hi) > GEOM_TOL).then_some((lo, hi))
    }

    /// Fan triangulation from the centroid.
    pub fn fan_triangles(&self) -> Vec<[Vec2; 3]> {
        let c = self.centroid();
        let n = self.verts.len();
        (0..n)
            .map(|i| [c, self.verts[i], self.verts[(i + 1) % n]])
            .collect()
    }
}

fn signed_area2(verts: &[Vec2]) -> f64 {
    let n = verts.len();
    let mut a = 0.0;
    for i in 0..n {
        a += verts[i].cross(verts[(i + 1) % n]);
    }
    a
}

fn push_dedup(out: &mut Vec<Vec2>, p: Vec2) {
    if out.last().map_or(true, |q| q.dist(p) > GEOM_TOL) {
        out.push(p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn area_and_centroid() {
        let sq = unit_square();
        assert!((sq.area() - 1.0).abs() < 1e-15);
        let c = sq.centroid();
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!((p.area() - 1.0).abs() < 1e-15);
        assert!(p.contains(Vec2::new(0.5, 0.5), 0.0));
    }

    #[test]
    fn collinear_vertices_rejected() {
        let r = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn halfplane_clip_splits_square() {
        let sq = unit_square();
        // keep x >= 0.5
        let right = sq.clip_halfplane(Vec2::new(1.0, 0.0), 0.5).unwrap();
        assert!((right.area() - 0.5).abs() < 1e-14);
        // keep x >= 2 -> empty
        assert!(sq.clip_halfplane(Vec2::new(1.0, 0.0), 2.0).is_none());
    }

    #[test]
    fn line_section_of_square() {
        let sq = unit_square();
        let (a, b) = sq.line_section(Vec2::new(1.0, 0.0), 0.5).unwrap();
        assert!((a.x - 0.5).abs() < 1e-14 && (b.x - 0.5).abs() < 1e-14);
        assert!((a.dist(b) - 1.0).abs() < 1e-12);
        assert!(sq.line_section(Vec2::new(1.0, 0.0), 1.5).is_none());
    }

    #[test]
    fn fan_triangles_cover_area() {
        let sq = unit_square();
        let total: f64 = sq
            .fan_triangles()
            .iter()
            .map(|t| 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs())
            .sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}
