//! Gauss–Legendre rules on intervals, collapsed product rules on triangles,
//! and adaptive refinement drivers for integrands with boundary layers.
//!
//! All drivers check integrand values for finiteness and report the offending
//! node on failure. Vector-valued variants integrate several components in a
//! single pass (the entropic solver accumulates its residual and Jacobian this
//! way), with the refinement decision taken on the worst component.

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Nodes and weights on [-1, 1].
static GL_CACHE: Lazy<Mutex<HashMap<usize, &'static [(f64, f64)]>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence and cached per order.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut cache = GL_CACHE.lock().unwrap();
    if let Some(rule) = cache.get(&n) {
        return rule;
    }
    let mut full = Vec::with_capacity(n);
    for k in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (pm1 - x * p) / (1.0 - x * x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // k-th largest root; mirror to the negative half.
        full.push((x, w));
        if x.abs() > 1e-14 && full.len() < n {
            full.push((-x, w));
        }
    }
    full.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    debug_assert_eq!(full.len(), n);
    let leaked: &'static [(f64, f64)] = Box::leak(full.into_boxed_slice());
    cache.insert(n, leaked);
    leaked
}

fn check_finite(v: f64, x: f64, y: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteIntegrand { x, y, value: v })
    }
}

/// Composite Gauss–Legendre on `[a, b]` with `panels` equal subintervals.
pub fn integrate_interval<F>(f: &F, a: f64, b: f64, order: usize, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for &(u, w) in rule {
            let x = mid + half * u;
            let v = f(x);
            check_finite(v, x, 0.0)?;
            acc += w * v;
        }
        total += acc * half;
    }
    Ok(total)
}

/// Composite rule on a union of segments (used to keep panels aligned with
/// density or cell breakpoints).
pub fn integrate_segments<F>(
    f: &F,
    segments: &[(f64, f64)],
    order: usize,
    panels: usize,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let mut total = 0.0;
    for &(a, b) in segments {
        if b > a {
            total += integrate_interval(f, a, b, order, panels)?;
        }
    }
    Ok(total)
}

const ADAPTIVE_ORDER: usize = 15;

// refusing to refine past the floating-point noise of the panel sums keeps
// the recursion from exploding when the requested tolerance is unreachable
const NOISE_FACTOR: f64 = 32.0 * f64::EPSILON;

fn rule_sum_vec<F>(f: &F, a: f64, b: f64, buf: &mut [f64], acc: &mut [f64]) -> Result<f64>
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    let rule = gauss_legendre(ADAPTIVE_ORDER);
    acc.fill(0.0);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut scale = 0.0;
    for &(u, w) in rule {
        let x = mid + half * u;
        f(x, buf);
        let mut vmax = 0.0f64;
        for (o, &v) in acc.iter_mut().zip(buf.iter()) {
            check_finite(v, x, 0.0)?;
            *o += w * half * v;
            vmax = vmax.max(v.abs());
        }
        scale += w * half * vmax;
    }
    Ok(scale)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn adaptive_interval_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    coarse: &[f64],
    tol: f64,
    depth: u32,
    out: &mut [f64],
) -> Result<()>
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    let dim = out.len();
    let mid = 0.5 * (a + b);
    let mut buf = vec![0.0; dim];
    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    let s_l = rule_sum_vec(f, a, mid, &mut buf, &mut left)?;
    let s_r = rule_sum_vec(f, mid, b, &mut buf, &mut right)?;
    let fine: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    let floor = NOISE_FACTOR * (s_l + s_r);
    if max_abs_diff(&fine, coarse) <= tol.max(floor) || depth == 0 {
        for (o, v) in out.iter_mut().zip(&fine) {
            *o += v;
        }
        return Ok(());
    }
    adaptive_interval_rec(f, a, mid, &left, 0.5 * tol, depth - 1, out)?;
    adaptive_interval_rec(f, mid, b, &right, 0.5 * tol, depth - 1, out)
}

/// Adaptive vector-valued integration over `[a, b]`; `f(x, out)` fills the
/// component values at `x`. Accumulates into `out`.
pub fn adaptive_interval_vec<F>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
    out: &mut [f64],
) -> Result<()>
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    if b <= a {
        return Ok(());
    }
    let dim = out.len();
    let mut buf = vec![0.0; dim];
    let mut coarse = vec![0.0; dim];
    rule_sum_vec(f, a, b, &mut buf, &mut coarse)?;
    adaptive_interval_rec(f, a, b, &coarse, abs_tol, max_depth, out)
}

/// Scalar adaptive integration over `[a, b]`.
pub fn adaptive_interval<F>(f: &F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let mut out = [0.0];
    adaptive_interval_vec(&|x, o: &mut [f64]| o[0] = f(x), a, b, abs_tol, max_depth, &mut out)?;
    Ok(out[0])
}

static TRI_CACHE: Lazy<Mutex<HashMap<usize, &'static [(f64, f64, f64)]>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Product rule on the reference triangle `{u, v ≥ 0, u + v ≤ 1}` obtained by
/// collapsing a tensor Gauss–Legendre grid. With `n` points per direction the
/// rule is exact for total degree `2n − 2`; weights sum to the reference area
/// 1/2.
pub fn triangle_rule(n: usize) -> &'static [(f64, f64, f64)] {
    let mut cache = TRI_CACHE.lock().unwrap();
    if let Some(rule) = cache.get(&n) {
        return rule;
    }
    let gl = gauss_legendre(n);
    let mut rule = Vec::with_capacity(n * n);
    for &(xs, ws) in gl {
        let s = 0.5 * (xs + 1.0);
        let ws = 0.5 * ws;
        for &(xt, wt) in gl {
            let t = 0.5 * (xt + 1.0);
            let wt = 0.5 * wt;
            // Duffy map: (s, t) -> (s(1-t), st), Jacobian s.
            rule.push((s * (1.0 - t), s * t, ws * wt * s));
        }
    }
    let leaked: &'static [(f64, f64, f64)] = Box::leak(rule.into_boxed_slice());
    cache.insert(n, leaked);
    leaked
}

fn tri_area_signed(t: &[Vec2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0])
}

fn tri_rule_sum_vec<F>(
    f: &F,
    tri: &[Vec2; 3],
    order: usize,
    buf: &mut [f64],
    acc: &mut [f64],
) -> Result<f64>
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    let rule = triangle_rule(order);
    acc.fill(0.0);
    let jac = 2.0 * tri_area_signed(tri).abs();
    let (a, ab, ac) = (tri[0], tri[1] - tri[0], tri[2] - tri[0]);
    let mut scale = 0.0;
    for &(u, v, w) in rule {
        let p = a + ab * u + ac * v;
        f(p, buf);
        let mut vmax = 0.0f64;
        for (o, &val) in acc.iter_mut().zip(buf.iter()) {
            if !val.is_finite() {
                return Err(Error::NonFiniteIntegrand {
                    x: p.x,
                    y: p.y,
                    value: val,
                });
            }
            *o += w * jac * val;
            vmax = vmax.max(val.abs());
        }
        scale += w * jac * vmax;
    }
    Ok(scale)
}

/// Fixed-order rule over a triangle, scalar integrand.
pub fn integrate_triangle<F>(f: &F, tri: &[Vec2; 3], order: usize) -> Result<f64>
where
    F: Fn(Vec2) -> f64 + ?Sized,
{
    let mut acc = [0.0];
    let mut buf = [0.0];
    tri_rule_sum_vec(
        &|p, o: &mut [f64]| o[0] = f(p),
        tri,
        order,
        &mut buf,
        &mut acc,
    )?;
    Ok(acc[0])
}

/// Fixed-order rule with `levels` uniform midpoint subdivisions (4^levels
/// sub-triangles).
pub fn integrate_triangle_subdiv<F>(
    f: &F,
    tri: &[Vec2; 3],
    order: usize,
    levels: u32,
) -> Result<f64>
where
    F: Fn(Vec2) -> f64 + ?Sized,
{
    if levels == 0 {
        return integrate_triangle(f, tri, order);
    }
    let mut total = 0.0;
    for child in split_triangle(tri) {
        total += integrate_triangle_subdiv(f, &child, order, levels - 1)?;
    }
    Ok(total)
}

fn split_triangle(t: &[Vec2; 3]) -> [[Vec2; 3]; 4] {
    let m01 = (t[0] + t[1]) * 0.5;
    let m12 = (t[1] + t[2]) * 0.5;
    let m20 = (t[2] + t[0]) * 0.5;
    [
        [t[0], m01, m20],
        [m01, t[1], m12],
        [m20, m12, t[2]],
        [m01, m12, m20],
    ]
}

const TRI_ADAPTIVE_ORDER: usize = 5; // exact to total degree 8

fn adaptive_triangle_rec<F>(
    f: &F,
    tri: &[Vec2; 3],
    coarse: &[f64],
    tol: f64,
    depth: u32,
    out: &mut [f64],
) -> Result<()>
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    let dim = out.len();
    let mut buf = vec![0.0; dim];
    let children = split_triangle(tri);
    let mut sums: Vec<Vec<f64>> = Vec::with_capacity(4);
    let mut fine = vec![0.0; dim];
    let mut scale = 0.0;
    for child in &children {
        let mut acc = vec![0.0; dim];
        scale += tri_rule_sum_vec(f, child, TRI_ADAPTIVE_ORDER, &mut buf, &mut acc)?;
        for (t, v) in fine.iter_mut().zip(&acc) {
            *t += v;
        }
        sums.push(acc);
    }
    if max_abs_diff(&fine, coarse) <= tol.max(NOISE_FACTOR * scale) || depth == 0 {
        for (o, v) in out.iter_mut().zip(&fine) {
            *o += v;
        }
        return Ok(());
    }
    // halving (not quartering) the tolerance per level trades a bounded
    // amount of slack for a much narrower refinement front along curves
    // where the integrand has fine structure
    for (child, sum) in children.iter().zip(&sums) {
        adaptive_triangle_rec(f, child, sum, 0.5 * tol, depth - 1, out)?;
    }
    Ok(())
}

/// Adaptive vector-valued integration over a triangle; accumulates into `out`.
pub fn adaptive_triangle_vec<F>(
    f: &F,
    tri: &[Vec2; 3],
    abs_tol: f64,
    max_depth: u32,
    out: &mut [f64],
) -> Result<()>
where
    F: Fn(Vec2, &mut [f64]) + ?Sized,
{
    let dim = out.len();
    let mut buf = vec![0.0; dim];
    let mut coarse = vec![0.0; dim];
    tri_rule_sum_vec(f, tri, TRI_ADAPTIVE_ORDER, &mut buf, &mut coarse)?;
    adaptive_triangle_rec(f, tri, &coarse, abs_tol, max_depth, out)
}

/// Scalar adaptive integration over a triangle.
pub fn adaptive_triangle<F>(f: &F, tri: &[Vec2; 3], abs_tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(Vec2) -> f64 + ?Sized,
{
    let mut out = [0.0];
    adaptive_triangle_vec(
        &|p, o: &mut [f64]| o[0] = f(p),
        tri,
        abs_tol,
        max_depth,
        &mut out,
    )?;
    Ok(out[0])
}

/// Line integral along the segment `[p0, p1]` with respect to arclength.
pub fn integrate_segment<F>(f: &F, p0: Vec2, p1: Vec2, order: usize, panels: usize) -> Result<f64>
where
    F: Fn(Vec2) -> f64 + ?Sized,
{
    let len = p0.dist(p1);
    if len == 0.0 {
        return Ok(0.0);
    }
    let dir = (p1 - p0) * (1.0 / len);
    let g = |s: f64| f(p0 + dir * s);
    integrate_interval(&g, 0.0, len, order, panels)
}
