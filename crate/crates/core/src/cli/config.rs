use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{build_polygon, default_partition, PartitionSpec, Polygon};
use crate::harness::{make_harmonic, make_manufactured, make_piecewise_constant, Method, Problem, Profile};
use crate::mesh::{recommend_grading, GradedMesh, GradedMeshSpec};
use crate::operators::PiecewiseConstant;
use crate::point::Point2;
use crate::quadrature::MAX_ORDER;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },
}

impl ConfigError {
    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            field,
            message: message.into(),
        }
    }

    /// Field named by a validation error.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Mesh grading: `"auto:2"`, `"auto:4"` or one exponent per corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grading {
    Auto(String),
    Explicit(Vec<f64>),
}

impl Default for Grading {
    fn default() -> Self {
        Grading::Auto("auto:4".into())
    }
}

/// Either one value for every segment or one per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(&self, count: usize) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone(); count],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Galerkin,
    IteratedGalerkin,
    Modified,
    IteratedModified,
    Extrapolated,
}

impl MethodTag {
    pub fn method(self) -> Option<Method> {
        match self {
            MethodTag::Galerkin => Some(Method::Galerkin),
            MethodTag::IteratedGalerkin => Some(Method::IteratedGalerkin),
            MethodTag::Modified => Some(Method::Modified),
            MethodTag::IteratedModified => Some(Method::IteratedModified),
            MethodTag::Extrapolated => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileTag {
    Smooth,
    CornerSingular,
    /// Steps aligned with the base mesh.
    PiecewiseConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Manufactured(ProfileTag),
    Harmonic {
        x_ext: [f64; 2],
        checkpoints: Vec<[f64; 2]>,
    },
}

fn default_levels() -> usize {
    1
}

fn default_p() -> OneOrMany<u32> {
    OneOrMany::One(2)
}

fn default_order() -> usize {
    10
}

fn default_tol() -> f64 {
    1e-12
}

/// Run configuration as read from JSON, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub vertices: Vec<[f64; 2]>,
    /// Segment boundaries `gamma_j` as arclengths; edge midpoints if absent.
    #[serde(default)]
    pub partition: Option<Vec<f64>>,
    #[serde(default)]
    pub grading: Grading,
    pub n: OneOrMany<usize>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    pub methods: Vec<MethodTag>,
    #[serde(default = "default_p")]
    pub extrapolation_p: OneOrMany<u32>,
    pub problem: ProblemSpec,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
    #[serde(default = "default_tol")]
    pub oracle_tol: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub parallelism: Option<usize>,
}

/// Geometry, base mesh and problem built from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub polygon: Arc<Polygon<f64>>,
    pub partition: Arc<PartitionSpec<f64>>,
    pub base: GradedMeshSpec<f64>,
    pub problem: Problem<f64>,
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.resolve()?;
    Ok(cfg)
}

/// Reads and validates a JSON config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

impl RunConfig {
    pub fn extrapolation_orders(&self) -> Vec<u32> {
        self.extrapolation_p.values()
    }

    /// Non-extrapolated methods in config order.
    pub fn plain_methods(&self) -> Vec<Method> {
        self.methods.iter().filter_map(|m| m.method()).collect()
    }

    pub fn has_extrapolated(&self) -> bool {
        self.methods.contains(&MethodTag::Extrapolated)
    }

    /// Checks every field and builds the geometry and problem.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let polygon = build_polygon(&self.vertices).map_err(|e| ConfigError::invalid("vertices", e.to_string()))?;
        let polygon = Arc::new(polygon);
        let r = polygon.num_corners();
        let partition = match &self.partition {
            None => default_partition(&polygon),
            Some(g) => PartitionSpec::new(&polygon, g.clone()).map_err(|e| ConfigError::invalid("partition", e.to_string()))?,
        };
        let partition = Arc::new(partition);
        let q = match &self.grading {
            Grading::Auto(s) => {
                let order = match s.as_str() {
                    "auto:2" => 2,
                    "auto:4" => 4,
                    _ => return Err(ConfigError::invalid("grading", format!("expected \"auto:2\", \"auto:4\" or a list, got {s:?}"))),
                };
                recommend_grading(&polygon, order).map_err(|e| ConfigError::invalid("grading", e.to_string()))?
            }
            Grading::Explicit(q) => {
                if q.len() != r {
                    return Err(ConfigError::invalid("grading", format!("{} exponents for {r} corners", q.len())));
                }
                if let Some(bad) = q.iter().find(|q| !(**q >= 1.0) || !q.is_finite()) {
                    return Err(ConfigError::invalid("grading", format!("grading exponents q_j >= 1, got {bad}")));
                }
                q.clone()
            }
        };
        let n = self.n.expand(r);
        if n.len() != r {
            return Err(ConfigError::invalid("n", format!("{} values for {r} segments", n.len())));
        }
        if n.iter().any(|n| *n == 0) {
            return Err(ConfigError::invalid("n", "every n_j must be at least 1"));
        }
        if self.levels == 0 {
            return Err(ConfigError::invalid("levels", "at least one level is required"));
        }
        if self.methods.is_empty() {
            return Err(ConfigError::invalid("methods", "no methods given"));
        }
        let ps = self.extrapolation_orders();
        if ps.is_empty() || ps.iter().any(|p| *p != 2 && *p != 4) {
            return Err(ConfigError::invalid("extrapolation_p", "supported orders are 2 and 4"));
        }
        if self.quadrature_order == 0 || self.quadrature_order > MAX_ORDER {
            return Err(ConfigError::invalid("quadrature_order", format!("must lie in 1..={MAX_ORDER}")));
        }
        if !(self.oracle_tol > 0.0 && self.oracle_tol.is_finite()) {
            return Err(ConfigError::invalid("oracle_tol", "must be positive"));
        }
        if self.parallelism == Some(0) {
            return Err(ConfigError::invalid("parallelism", "must be at least 1"));
        }
        let base = GradedMeshSpec::new(n, q).map_err(|e| ConfigError::invalid("n", e.to_string()))?;
        let problem = match &self.problem {
            ProblemSpec::Manufactured(ProfileTag::Smooth) => {
                make_manufactured(polygon.clone(), partition.clone(), Profile::Smooth, self.oracle_tol)
            }
            ProblemSpec::Manufactured(ProfileTag::CornerSingular) => {
                make_manufactured(polygon.clone(), partition.clone(), Profile::CornerSingular, self.oracle_tol)
            }
            ProblemSpec::Manufactured(ProfileTag::PiecewiseConstant) => {
                let mesh = GradedMesh::new(polygon.clone(), partition.clone(), base.clone())
                    .map_err(|e| ConfigError::invalid("n", e.to_string()))?;
                let coeffs = (0..mesh.num_panels()).map(|i| 1.0 + 0.5 * (i % 3) as f64).collect();
                let pc = PiecewiseConstant::new(Arc::new(mesh), coeffs).expect("one coefficient per panel");
                make_piecewise_constant(&pc, partition.clone())
            }
            ProblemSpec::Harmonic { x_ext, checkpoints } => make_harmonic(
                polygon.clone(),
                partition.clone(),
                Point2::new(x_ext[0], x_ext[1]),
                checkpoints.iter().map(|c| Point2::new(c[0], c[1])).collect(),
                self.oracle_tol,
            )
            .map_err(|e| ConfigError::invalid("problem", e.to_string()))?,
        };
        if let ProblemSpec::Harmonic { checkpoints, .. } = &self.problem {
            if checkpoints.is_empty() {
                return Err(ConfigError::invalid("problem", "harmonic problems need at least one checkpoint"));
            }
        }
        Ok(Resolved {
            polygon,
            partition,
            base,
            problem,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "vertices": [[0,0],[1,0],[1,1],[0,1]],
        "n": [4,4,4,4],
        "methods": ["iterated_modified"],
        "problem": {"manufactured": "smooth"}
    }"#;

    fn with(field: &str, value: &str) -> String {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v[field] = serde_json::from_str(value).unwrap();
        v.to_string()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.quadrature_order, 10);
        assert_eq!(c.oracle_tol, 1e-12);
        assert_eq!(c.extrapolation_orders(), vec![2]);
        assert_eq!(c.grading, Grading::Auto("auto:4".into()));
        assert_eq!(c.levels, 1);
        assert!(c.partition.is_none());
        let r = c.resolve().unwrap();
        assert!(r.base.q.iter().all(|q| (*q - 7.0).abs() < 1e-14));
        assert_eq!(r.partition.gamma(), &[0.5, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn grading_errors_name_the_field() {
        let e = parse_config_str(&with("grading", "[1, 2, 3]")).unwrap_err();
        assert_eq!(e.field(), Some("grading"));
        let e = parse_config_str(&with("grading", "[1, 0.5, 1, 1]")).unwrap_err();
        assert_eq!(e.field(), Some("grading"));
        assert!(e.to_string().contains("q_j >= 1"));
        let e = parse_config_str(&with("grading", "\"auto:3\"")).unwrap_err();
        assert_eq!(e.field(), Some("grading"));
        assert!(parse_config_str(&with("grading", "[1, 2, 3, 7]")).is_ok());
    }

    #[test]
    fn other_fields_are_validated() {
        for (field, value) in [
            ("n", "[4, 4]"),
            ("n", "[4, 0, 4, 4]"),
            ("levels", "0"),
            ("methods", "[]"),
            ("extrapolation_p", "3"),
            ("quadrature_order", "0"),
            ("oracle_tol", "-1"),
            ("parallelism", "0"),
            ("vertices", "[[0,0],[1,0]]"),
            ("partition", "[0.5, 1.5]"),
            ("problem", r#"{"harmonic": {"x_ext": [0.5, 0.5], "checkpoints": [[0.5, 0.5]]}}"#),
        ] {
            let e = parse_config_str(&with(field, value)).unwrap_err();
            assert_eq!(e.field(), Some(field), "{field}: {e}");
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(parse_config_str("{\"vertices\": [}"), Err(ConfigError::Parse(_))));
        let e = parse_config_str(&with("bogus", "1")).unwrap_err();
        assert!(matches!(&e, ConfigError::Parse(m) if m.contains("bogus")));
        assert!(matches!(parse_config_str(&with("methods", "[\"newton\"]")), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn scalar_n_and_p_lists() {
        let c = parse_config_str(&with("n", "8")).unwrap();
        assert_eq!(c.resolve().unwrap().base.n, vec![8; 4]);
        let c = parse_config_str(&with("extrapolation_p", "[2, 4]")).unwrap();
        assert_eq!(c.extrapolation_orders(), vec![2, 4]);
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = parse_config_str(MINIMAL).unwrap();
        let back = parse_config_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
