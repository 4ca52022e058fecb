//! Result-file emission: deterministic CSV/JSON plus run metadata and small
//! SVG plots. Timestamps live only in `meta.json` so the data files stay
//! byte-identical across reruns with the same config and seed.

use crate::config::Config;
use crate::error::Result;
use crate::geometry::{CellGeom, FacetGeom, LaguerreDiagram};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

/// Format a float for CSV/JSON in shortest round-trip form.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "nan".into()
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

/// The summary embeds the resolved config for auditability.
pub fn write_summary(path: &Path, config: &Config, body: serde_json::Value) -> Result<()> {
    let cfg_json = serde_json::to_value(config).expect("config to json");
    let doc = json!({ "config": cfg_json, "results": body });
    std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

pub fn config_hash(config: &Config) -> String {
    let mut h = Sha256::new();
    h.update(config.canonical_toml().as_bytes());
    format!("{:x}", h.finalize())
}

pub fn write_meta(path: &Path, config: &Config, command: &str, seed: u64) -> Result<()> {
    let doc = json!({
        "command": command,
        "seed": seed,
        "config_hash": config_hash(config),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}

/// Log-log scatter of an ε sweep with its fitted line.
pub fn svg_rate_plot(eps: &[f64], values: &[f64], slope: f64, intercept: f64) -> String {
    let (w, h, m) = (480.0, 360.0, 48.0);
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(values)
        .filter(|(e, v)| v.is_finite() && v.abs() > 0.0 && **e > 0.0)
        .map(|(e, v)| (e.ln(), v.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>".into();
    }
    let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    s += &format!(
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - m, w - m, h - m, h - m
    );
    s += &format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"steelblue\"/>\n",
        sx(x0),
        sy(slope * x0 + intercept),
        sx(x1),
        sy(slope * x1 + intercept)
    );
    for (x, y) in &pts {
        s += &format!("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"crimson\"/>\n", sx(*x), sy(*y));
    }
    s += &format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">slope {:.4}</text>\n</svg>\n",
        m + 6.0,
        m + 14.0,
        slope
    );
    s
}

/// Flat drawing of the Laguerre cells and facets.
pub fn svg_diagram(diag: &LaguerreDiagram) -> String {
    let (w, h, m) = (480.0, 480.0, 24.0);
    let mut lo = crate::Vec2::new(f64::MAX, f64::MAX);
    let mut hi = crate::Vec2::new(f64::MIN, f64::MIN);
    let mut expand = |p: crate::Vec2| {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    };
    for c in diag.cells() {
        match c {
            CellGeom::Empty => {}
            CellGeom::Interval { lo: a, hi: b } => {
                expand(crate::Vec2::new(*a, -0.1));
                expand(crate::Vec2::new(*b, 0.1));
            }
            CellGeom::Polygon(p) => p.vertices().iter().for_each(|v| expand(*v)),
        }
    }
    if lo.x >= hi.x {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>".into();
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y);
    let sx = |x: f64| m + (x - lo.x) / span * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - lo.y) / span * (h - 2.0 * m);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    for c in diag.cells() {
        match c {
            CellGeom::Empty => {}
            CellGeom::Interval { lo: a, hi: b } => {
                s += &format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-width=\"6\"/>\n",
                    sx(*a),
                    sy(0.0),
                    sx(*b),
                    sy(0.0)
                );
            }
            CellGeom::Polygon(p) => {
                let pts: Vec<String> = p
                    .vertices()
                    .iter()
                    .map(|v| format!("{},{}", sx(v.x), sy(v.y)))
                    .collect();
                s += &format!(
                    "<polygon points=\"{}\" fill=\"none\" stroke=\"gray\"/>\n",
                    pts.join(" ")
                );
            }
        }
    }
    for f in diag.facets() {
        match f.geom {
            FacetGeom::Point(p) => {
                s += &format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"steelblue\"/>\n",
                    sx(p.x),
                    sy(p.y)
                )
            }
            FacetGeom::Segment(a, b) => {
                s += &format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"steelblue\" stroke-width=\"2\"/>\n",
                    sx(a.x),
                    sy(a.y),
                    sx(b.x),
                    sy(b.y)
                )
            }
        }
    }
    for y in diag.sites() {
        s += &format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"crimson\"/>\n",
            sx(y.x),
            sy(y.y)
        );
    }
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        assert_eq!(fmt(0.1), "0.1");
        assert_eq!(fmt(f64::NAN), "nan");
        let v = -1.0281e-5;
        assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn rate_plot_contains_points() {
        let svg = svg_rate_plot(&[0.1, 0.01, 0.001], &[1e-2, 1e-4, 1e-6], 2.0, 0.0);
        assert!(svg.contains("<circle"));
        assert!(svg.contains("slope 2.0000"));
    }
}
