//! TOML problem/experiment configuration with validation and dotted-path
//! overrides.

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::measures::{Density, DiscreteMeasure, Domain, SourceMeasure};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub name: String,
    pub source: SourceConfig,
    pub target: TargetConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// "interval" or "polygon".
    pub domain: String,
    pub interval: Option<[f64; 2]>,
    pub vertices: Option<Vec<[f64; 2]>>,
    /// "uniform", "gaussian" or "spline".
    pub density: String,
    pub mean: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub knots: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    /// Required for spline densities: declared positive lower bound.
    pub density_min: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    /// One row per site; 1 or 2 coordinates each (all rows alike).
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub min_weight_floor: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Regularization for `entropic`, `constant` and `oracle` runs.
    pub eps: f64,
    pub eps_hi: f64,
    pub eps_lo: f64,
    pub eps_count: usize,
    /// "pair_id", "pair_alpha", "pair_sign", "l2", "dual_norm",
    /// "potential_gap".
    pub functional: String,
    pub alpha: f64,
    pub family_size: usize,
    pub family_seed: u64,
    pub n_list: Vec<u64>,
    pub trials: usize,
    pub eps_coeff: f64,
    pub eps_beta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            eps: 1e-3,
            eps_hi: 1e-1,
            eps_lo: 1e-4,
            eps_count: 16,
            functional: "pair_id".into(),
            alpha: 1.0,
            family_size: 32,
            family_seed: 0,
            n_list: vec![100, 400, 1600],
            trials: 500,
            eps_coeff: 1.0,
            eps_beta: 0.3,
        }
    }
}

impl Config {
    pub fn from_str_validated(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text)
            .map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        if overrides.is_empty() {
            return Self::from_str_validated(&text);
        }
        let mut value: toml::Value = text
            .parse()
            .map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let cfg: Config = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Collect every violated invariant rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = Vec::new();

        match self.source.domain.as_str() {
            "interval" => match self.source.interval {
                None => errs.push("source.interval is required for an interval domain".into()),
                Some([lo, hi]) if !(lo < hi) => {
                    errs.push(format!("source.interval must satisfy lo < hi, got [{lo}, {hi}]"))
                }
                _ => {}
            },
            "polygon" => match &self.source.vertices {
                None => errs.push("source.vertices is required for a polygon domain".into()),
                Some(v) => {
                    let pts: Vec<Vec2> = v.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                    if let Err(e) = ConvexPolygon::new(pts) {
                        errs.push(format!("source.vertices: {e}"));
                    }
                }
            },
            other => errs.push(format!(
                "source.domain must be \"interval\" or \"polygon\", got \"{other}\""
            )),
        }

        match self.source.density.as_str() {
            "uniform" => {}
            "gaussian" => {
                if self.source.mean.is_none() {
                    errs.push("source.mean is required for a gaussian density".into());
                }
                match self.source.sigma {
                    None => errs.push("source.sigma is required for a gaussian density".into()),
                    Some(s) if !(s > 0.0) => {
                        errs.push(format!("source.sigma must be positive, got {s}"))
                    }
                    _ => {}
                }
            }
            "spline" => {
                if self.source.knots.is_none() || self.source.values.is_none() {
                    errs.push("source.knots and source.values are required for a spline density".into());
                }
                match self.source.density_min {
                    None => errs.push("source.density_min is required for a spline density".into()),
                    Some(m) if !(m > 0.0) => {
                        errs.push(format!("source.density_min must be positive, got {m}"))
                    }
                    Some(m) => {
                        if let Some(vals) = &self.source.values {
                            if vals.iter().any(|&v| v < m) {
                                errs.push(format!(
                                    "source.values fall below the declared density_min {m}"
                                ));
                            }
                        }
                    }
                }
            }
            other => errs.push(format!(
                "source.density must be \"uniform\", \"gaussian\" or \"spline\", got \"{other}\""
            )),
        }

        let t = &self.target;
        if t.points.is_empty() {
            errs.push("target.points must be nonempty".into());
        }
        let dim = t.points.first().map(|p| p.len()).unwrap_or(0);
        if dim != 1 && dim != 2 {
            errs.push(format!("target sites must have 1 or 2 coordinates, got {dim}"));
        }
        if t.points.iter().any(|p| p.len() != dim) {
            errs.push("target.points rows have inconsistent lengths".into());
        }
        let domain_dim = if self.source.domain == "interval" { 1 } else { 2 };
        if dim != 0 && dim != domain_dim {
            errs.push(format!(
                "target dimension {dim} does not match the {domain_dim}-dimensional source domain"
            ));
        }
        if t.weights.len() != t.points.len() {
            errs.push(format!(
                "{} weights for {} sites",
                t.weights.len(),
                t.points.len()
            ));
        }
        if t.weights.iter().any(|&w| !(w > 0.0)) {
            errs.push("target.weights must all be positive".into());
        }
        if let Some(floor) = t.min_weight_floor {
            let total: f64 = t.weights.iter().sum();
            if total > 0.0 {
                for (i, w) in t.weights.iter().enumerate() {
                    if w / total < floor - 1e-12 {
                        errs.push(format!(
                            "normalized weight {} of site {i} is below the floor {floor}",
                            w / total
                        ));
                    }
                }
            }
        }

        let e = &self.experiment;
        if !(e.eps > 0.0 && e.eps < 1.0) {
            errs.push(format!("experiment.eps must lie in (0, 1), got {}", e.eps));
        }
        if !(0.0 < e.eps_lo && e.eps_lo < e.eps_hi && e.eps_hi < 1.0) {
            errs.push(format!(
                "experiment sweep needs 0 < eps_lo < eps_hi < 1, got [{}, {}]",
                e.eps_lo, e.eps_hi
            ));
        }
        if e.eps_count < 6 {
            errs.push(format!(
                "experiment.eps_count must be at least 6, got {}",
                e.eps_count
            ));
        }
        if !matches!(
            e.functional.as_str(),
            "pair_id" | "pair_alpha" | "pair_sign" | "l2" | "dual_norm" | "potential_gap"
        ) {
            errs.push(format!("unknown experiment.functional \"{}\"", e.functional));
        }
        if !(0.0 < e.alpha && e.alpha <= 1.0) {
            errs.push(format!("experiment.alpha must lie in (0, 1], got {}", e.alpha));
        }
        if e.trials == 0 || e.n_list.is_empty() {
            errs.push("experiment.trials and experiment.n_list must be nonempty".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }

    pub fn source_measure(&self) -> Result<SourceMeasure> {
        let domain = match self.source.domain.as_str() {
            "interval" => {
                let [lo, hi] = self.source.interval.unwrap();
                Domain::interval(lo, hi)?
            }
            _ => Domain::polygon(
                self.source
                    .vertices
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|p| Vec2::new(p[0], p[1]))
                    .collect(),
            )?,
        };
        let density = match self.source.density.as_str() {
            "uniform" => Density::Uniform,
            "gaussian" => {
                let m = self.source.mean.as_ref().unwrap();
                Density::Gaussian {
                    mean: if m.len() == 1 {
                        Vec2::axis(m[0])
                    } else {
                        Vec2::new(m[0], m[1])
                    },
                    sigma: self.source.sigma.unwrap(),
                }
            }
            _ => Density::Spline {
                knots: self.source.knots.clone().unwrap(),
                values: self.source.values.clone().unwrap(),
            },
        };
        SourceMeasure::new(domain, density)
    }

    pub fn target_measure(&self) -> Result<DiscreteMeasure> {
        let dim = self.target.points[0].len();
        let points: Vec<Vec2> = self
            .target
            .points
            .iter()
            .map(|p| {
                if dim == 1 {
                    Vec2::axis(p[0])
                } else {
                    Vec2::new(p[0], p[1])
                }
            })
            .collect();
        DiscreteMeasure::new(
            points,
            self.target.weights.clone(),
            dim,
            self.target.min_weight_floor,
        )
    }

    /// Canonical serialized form; hashed into run metadata.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Apply a `path.to.key=value` override onto a parsed TOML tree.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        Error::InvalidArgument(format!("override \"{spec}\" is not of the form key=value"))
    })?;
    let parsed: toml::Value = format!("v = {raw}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .or_else(|_| {
            format!("v = \"{raw}\"")
                .parse::<toml::Table>()
                .map(|t| t["v"].clone())
        })
        .map_err(|e| Error::InvalidArgument(format!("cannot parse override value \"{raw}\": {e}")))?;

    let keys: Vec<&str> = path.trim().split('.').collect();
    let mut node = root;
    for k in &keys[..keys.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| Error::InvalidArgument(format!("override path \"{path}\" crosses a non-table")))?
            .entry(k.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::InvalidArgument(format!("override path \"{path}\" crosses a non-table")))?
        .insert(keys[keys.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYM: &str = r#"
name = "symmetric-1d"
[source]
domain = "interval"
interval = [-1.0, 1.0]
density = "uniform"
[target]
points = [[-1.0], [1.0]]
weights = [0.5, 0.5]
"#;

    #[test]
    fn parses_and_builds_measures() {
        let cfg = Config::from_str_validated(SYM).unwrap();
        let src = cfg.source_measure().unwrap();
        let tgt = cfg.target_measure().unwrap();
        assert_eq!(src.dim(), 1);
        assert_eq!(tgt.len(), 2);
        assert_eq!(cfg.experiment.eps_count, 16);
    }

    #[test]
    fn collects_all_violations() {
        let bad = r#"
[source]
domain = "interval"
interval = [1.0, -1.0]
density = "spline"
knots = [0.0, 1.0]
values = [1.0, 1.0]
[target]
points = [[0.0]]
weights = [1.0, 2.0]
"#;
        let err = Config::from_str_validated(bad).unwrap_err();
        match err {
            Error::InvalidConfig(list) => {
                assert!(list.iter().any(|e| e.contains("lo < hi")));
                assert!(list.iter().any(|e| e.contains("density_min")), "{list:?}");
                assert!(list.iter().any(|e| e.contains("weights")));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_density_min_is_named() {
        let bad = SYM.replace("density = \"uniform\"", "density = \"spline\"\nknots = [-1.0, 1.0]\nvalues = [0.5, 0.5]");
        let err = Config::from_str_validated(&bad).unwrap_err();
        assert!(err.to_string().contains("density_min"), "{err}");
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let dir = std::env::temp_dir().join("semidot-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sym.toml");
        std::fs::write(&path, SYM).unwrap();
        let cfg = Config::load(
            &path,
            &["experiment.eps=0.05".into(), "target.weights=[0.25, 0.75]".into()],
        )
        .unwrap();
        assert_eq!(cfg.experiment.eps, 0.05);
        assert_eq!(cfg.target.weights, vec![0.25, 0.75]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{SYM}\n[extra]\nfoo = 1\n");
        assert!(Config::from_str_validated(&bad).is_err());
    }
}
