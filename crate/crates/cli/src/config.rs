//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dislocq_core::equilibrium::Tolerances;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{key}` for problem {problem}")]
    Missing { key: &'static str, problem: &'static str },
    #[error("key `{key}`: {message}")]
    Value { key: &'static str, message: String },
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
}

const KEYS: &[&str] = &[
    "problem",
    "epsilon",
    "beta",
    "alpha",
    "beta_w",
    "mesh_radius",
    "mesh_h",
    "mesh_file",
    "outer_tol",
    "linear_tol",
    "max_outer",
    "epsilon_max",
    "quadrature_order",
    "output",
    "formats",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Edge2d,
    Screw3d,
}

impl ProblemKind {
    fn name(self) -> &'static str {
        match self {
            ProblemKind::Edge2d => "edge2d",
            ProblemKind::Screw3d => "screw3d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generated { radius: f64, h: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    /// Hyperbolic curvature parameter (edge2d).
    pub epsilon: f64,
    /// Heisenberg metric parameter (screw3d).
    pub beta: f64,
    pub alpha: f64,
    pub beta_w: f64,
    pub mesh: MeshSource,
    pub tolerances: Tolerances,
    pub quadrature_order: usize,
    pub output: PathBuf,
    pub csv: bool,
    pub vtk: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        if let MeshSource::File(p) = &mut cfg.mesh {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        if cfg.output.is_relative() {
            cfg.output = path.parent().unwrap_or(Path::new(".")).join(&cfg.output);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1 });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            let Some(&key) = KEYS.iter().find(|&&key| key == k) else {
                return Err(ConfigError::UnknownKey {
                    line: i + 1,
                    key: k.to_string(),
                });
            };
            if map.insert(key, v).is_some() {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
        }
        Values { map }.build()
    }
}

struct Values<'a> {
    map: BTreeMap<&'a str, &'a str>,
}

impl Values<'_> {
    fn real(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.map
            .get(key)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(ConfigError::Value {
                    key,
                    message: format!("`{v}` is not a finite real number"),
                }),
            })
            .transpose()
    }

    fn required(&self, key: &'static str, problem: ProblemKind) -> Result<f64, ConfigError> {
        self.real(key)?.ok_or(ConfigError::Missing {
            key,
            problem: problem.name(),
        })
    }

    fn count(&self, key: &'static str) -> Result<Option<usize>, ConfigError> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| ConfigError::Value {
                    key,
                    message: format!("`{v}` is not a non-negative integer"),
                })
            })
            .transpose()
    }

    fn positive(&self, key: &'static str, value: f64) -> Result<f64, ConfigError> {
        if value > 0.0 {
            Ok(value)
        } else {
            Err(ConfigError::Value {
                key,
                message: format!("must be positive, got {value}"),
            })
        }
    }

    fn build(self) -> Result<RunConfig, ConfigError> {
        let problem = match self.map.get("problem").copied() {
            Some("edge2d") => ProblemKind::Edge2d,
            Some("screw3d") => ProblemKind::Screw3d,
            Some(other) => {
                return Err(ConfigError::Value {
                    key: "problem",
                    message: format!("expected edge2d or screw3d, got `{other}`"),
                })
            }
            None => {
                return Err(ConfigError::Value {
                    key: "problem",
                    message: "missing (edge2d or screw3d)".into(),
                })
            }
        };
        let (mut epsilon, mut beta, mut alpha, mut beta_w) = (0.0, 0.0, 0.0, 0.0);
        match problem {
            ProblemKind::Edge2d => {
                epsilon = self.required("epsilon", problem)?;
                for key in ["beta", "alpha", "beta_w"] {
                    if self.map.contains_key(key) {
                        return Err(ConfigError::Value {
                            key: "problem",
                            message: format!("`{key}` does not apply to edge2d"),
                        });
                    }
                }
            }
            ProblemKind::Screw3d => {
                if self.map.contains_key("epsilon") {
                    return Err(ConfigError::Value {
                        key: "epsilon",
                        message: "does not apply to screw3d".into(),
                    });
                }
                beta = self.required("beta", problem)?;
                alpha = self.positive("alpha", self.required("alpha", problem)?)?;
                beta_w = self.positive("beta_w", self.required("beta_w", problem)?)?;
            }
        }
        let mesh = match (self.map.get("mesh_file"), self.real("mesh_radius")?, self.real("mesh_h")?) {
            (Some(path), None, None) => MeshSource::File(PathBuf::from(path)),
            (None, Some(radius), Some(h)) => MeshSource::Generated {
                radius: self.positive("mesh_radius", radius)?,
                h: self.positive("mesh_h", h)?,
            },
            (Some(_), _, _) => {
                return Err(ConfigError::Value {
                    key: "mesh_file",
                    message: "cannot be combined with mesh_radius/mesh_h".into(),
                })
            }
            (None, None, _) => {
                return Err(ConfigError::Missing {
                    key: "mesh_radius",
                    problem: problem.name(),
                })
            }
            (None, Some(_), None) => {
                return Err(ConfigError::Missing {
                    key: "mesh_h",
                    problem: problem.name(),
                })
            }
        };
        let mut tolerances = Tolerances::default();
        if let Some(v) = self.real("outer_tol")? {
            tolerances.outer_tol = self.positive("outer_tol", v)?;
        }
        if let Some(v) = self.real("linear_tol")? {
            tolerances.linear_tol = self.positive("linear_tol", v)?;
        }
        if let Some(v) = self.count("max_outer")? {
            tolerances.max_outer = v;
        }
        if let Some(v) = self.real("epsilon_max")? {
            tolerances.epsilon_max = self.positive("epsilon_max", v)?;
        }
        let quadrature_order = self.count("quadrature_order")?.unwrap_or(2);
        let output = PathBuf::from(self.map.get("output").copied().unwrap_or("out"));
        let (mut csv, mut vtk) = (false, false);
        for f in self.map.get("formats").copied().unwrap_or("csv").split(',') {
            match f.trim() {
                "csv" => csv = true,
                "vtk" => vtk = true,
                other => {
                    return Err(ConfigError::Value {
                        key: "formats",
                        message: format!("unknown format `{other}` (expected csv, vtk)"),
                    })
                }
            }
        }
        Ok(RunConfig {
            problem,
            epsilon,
            beta,
            alpha,
            beta_w,
            mesh,
            tolerances,
            quadrature_order,
            output,
            csv,
            vtk,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EDGE: &str = "# edge run\nproblem = edge2d\nepsilon = 0.05\nmesh_radius = 1\nmesh_h = 0.1  # spacing\n";

    #[test]
    fn parses_edge_config() {
        let c = RunConfig::parse(EDGE).unwrap();
        assert_eq!(c.problem, ProblemKind::Edge2d);
        assert_eq!(c.epsilon, 0.05);
        assert_eq!(c.mesh, MeshSource::Generated { radius: 1.0, h: 0.1 });
        assert!(c.csv && !c.vtk);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn missing_epsilon_names_the_key() {
        let err = RunConfig::parse("problem = edge2d\nmesh_radius = 1\nmesh_h = 0.1\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Missing {
                key: "epsilon",
                problem: "edge2d"
            }
        );
        assert!(err.to_string().contains("epsilon"));
    }

    #[test]
    fn rejects_unknown_duplicate_and_nonfinite() {
        assert!(matches!(
            RunConfig::parse(&format!("{EDGE}colour = red\n")),
            Err(ConfigError::UnknownKey { line: 6, .. })
        ));
        assert!(matches!(
            RunConfig::parse(&format!("{EDGE}epsilon = 0.1\n")),
            Err(ConfigError::Duplicate { .. })
        ));
        assert!(matches!(
            RunConfig::parse(&EDGE.replace("0.05", "nan")),
            Err(ConfigError::Value { key: "epsilon", .. })
        ));
        assert!(matches!(RunConfig::parse("problem edge2d\n"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn screw_requires_its_coefficients() {
        let base = "problem = screw3d\nbeta = 0.1\nalpha = 1\nmesh_radius = 0.2\nmesh_h = 0.05\n";
        let c = RunConfig::parse(&format!("{base}beta_w = 1\nformats = csv, vtk\n")).unwrap();
        assert_eq!((c.beta, c.alpha, c.beta_w), (0.1, 1.0, 1.0));
        assert!(c.vtk);
        assert_eq!(
            RunConfig::parse(base).unwrap_err(),
            ConfigError::Missing {
                key: "beta_w",
                problem: "screw3d"
            }
        );
    }
}
