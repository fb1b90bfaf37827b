//! TOML experiment configs.
//!
//! Every command reads an optional config file. Flags given on the command
//! line replace the corresponding file fields, and the resolved config is
//! what gets hashed into the outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pharmonic_core::metric_graph::{
    build_binary_tree, build_strip_graph, grid_graph, parse_edge_list, path_graph, MetricGraph, RootedBinaryTree,
};
use pharmonic_core::weighted_line::{Profile, Segment};

use crate::CliError;

pub fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
    }
}

/// A number, or an affine expression in `p` such as `"p - 1"` or `"2p"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Number(f64),
    Expr(String),
}

impl Param {
    pub fn resolve(&self, p: f64) -> Result<f64, CliError> {
        match self {
            Param::Number(x) => Ok(*x),
            Param::Expr(s) => affine_in_p(s, p).ok_or_else(|| {
                CliError::Input(format!("cannot evaluate {s:?}; expected an affine expression in p"))
            }),
        }
    }
}

fn affine_in_p(expr: &str, p: f64) -> Option<f64> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return None;
    }
    let mut total = 0.0;
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1.0, &rest[1..]),
            b'+' => (1.0, &rest[1..]),
            _ => (1.0, rest),
        };
        let end = body[1.min(body.len())..]
            .find(['+', '-'])
            .map_or(body.len(), |i| i + 1);
        let term = &body[..end];
        rest = &body[end..];
        let value = match term.strip_suffix('p') {
            Some("") => p,
            Some(coef) => coef.trim_end_matches('*').parse::<f64>().ok()? * p,
            None => term.parse::<f64>().ok()?,
        };
        total += sign * value;
    }
    Some(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    Power {
        #[serde(default = "one")]
        coef: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default = "one_param")]
        degree: Param,
        exponent: Param,
    },
    /// `(1 + x^2)^exponent`.
    Bracket {
        exponent: Param,
    },
    Exponential {
        #[serde(default = "one")]
        coef: f64,
        rate: Param,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        absolute: bool,
    },
    Table {
        points: Vec<[f64; 2]>,
    },
}

fn one() -> f64 {
    1.0
}

fn one_param() -> Param {
    Param::Number(1.0)
}

impl ProfileSpec {
    fn build(&self, p: f64) -> Result<Profile, CliError> {
        Ok(match self {
            ProfileSpec::Constant { value } => Profile::constant(*value),
            ProfileSpec::Power {
                coef,
                center,
                shift,
                degree,
                exponent,
            } => Profile::Power {
                coef: *coef,
                center: *center,
                shift: *shift,
                degree: degree.resolve(p)?,
                exponent: exponent.resolve(p)?,
            },
            ProfileSpec::Bracket { exponent } => Profile::bracket(exponent.resolve(p)?),
            ProfileSpec::Exponential {
                coef,
                rate,
                center,
                absolute,
            } => Profile::exponential(*coef, rate.resolve(p)?, *center, *absolute),
            ProfileSpec::Table { points } => Profile::Table {
                points: points.iter().map(|&[x, w]| (x, w)).collect(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: f64,
    pub end: f64,
    pub profile: ProfileSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub p: Option<f64>,
    pub tol: Option<f64>,
    /// Truncation radius of the tail heuristic.
    pub tail_radius: Option<f64>,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
    pub output_dir: Option<PathBuf>,
}

impl ClassifyConfig {
    pub fn segments(&self, p: f64) -> Result<Vec<Segment>, CliError> {
        self.segments
            .iter()
            .map(|s| {
                Ok(Segment {
                    start: s.start,
                    end: s.end,
                    profile: s.profile.build(p)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    pub p: Option<f64>,
    pub depth: Option<usize>,
    pub tol: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// The path on `-n..=n`.
    Path { n: usize },
    /// The grid on `[-n, n]^2`.
    Grid { n: usize },
    Tree { depth: usize },
    Strip { n_len: usize, n_wid: usize },
    EdgeList { path: PathBuf },
}

pub struct BuiltSpace {
    pub graph: MetricGraph,
    pub origin: usize,
    pub coords: Option<Vec<[f64; 2]>>,
    pub tree: Option<RootedBinaryTree>,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<BuiltSpace, CliError> {
        let embedded = |e: pharmonic_core::metric_graph::EmbeddedGraph| BuiltSpace {
            graph: e.graph,
            origin: e.origin,
            coords: Some(e.coords),
            tree: None,
        };
        Ok(match self {
            SpaceSpec::Path { n } => embedded(path_graph(*n)?),
            SpaceSpec::Grid { n } => embedded(grid_graph(*n)?),
            SpaceSpec::Strip { n_len, n_wid } => embedded(build_strip_graph(*n_len, *n_wid)?),
            SpaceSpec::Tree { depth } => {
                let tree = build_binary_tree(*depth)?;
                BuiltSpace {
                    graph: tree.graph().clone(),
                    origin: tree.root(),
                    coords: None,
                    tree: Some(tree),
                }
            }
            SpaceSpec::EdgeList { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                BuiltSpace {
                    graph: parse_edge_list(&text)?,
                    origin: 0,
                    coords: None,
                    tree: None,
                }
            }
        })
    }
}

impl BuiltSpace {
    pub fn center(&self, vertex: Option<usize>) -> Result<usize, CliError> {
        let v = vertex.unwrap_or(self.origin);
        if v >= self.graph.num_vertices() {
            return Err(CliError::Input(format!("center vertex {v} is not in the graph")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub space: Option<SpaceSpec>,
    /// Base vertex; defaults to the space's origin.
    pub center: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub big_lambda: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// A planar coordinate, `axis = 0` for `x_1`.
    Coordinate {
        axis: usize,
    },
    TreeUnbounded,
    TreeBounded,
    /// A `vertex,value` CSV as written by `solve-graph`.
    Csv {
        path: PathBuf,
    },
    /// The p-harmonic extension of a coordinate from the vertices of less
    /// than maximal degree.
    Solve {
        axis: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub space: Option<SpaceSpec>,
    pub function: Option<FunctionSpec>,
    pub center: Option<usize>,
    pub p: Option<f64>,
    pub tol: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub big_lambda: Option<f64>,
    pub lambda: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub graph: Option<PathBuf>,
    pub roles: Option<PathBuf>,
    pub p: Option<f64>,
    pub tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub relaxation: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

/// Rejects non-increasing or nonpositive radius lists early.
pub fn check_radii(radii: &[f64]) -> Result<(), CliError> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Input(format!("radii must be positive and strictly increasing, got {radii:?}")));
    }
    Ok(())
}

pub fn check_p(p: f64) -> Result<(), CliError> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("p = {p} must satisfy 1 < p < inf")))
    }
}

pub fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("tolerance {tol} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_expressions() {
        for (s, want) in [("p-1", 2.0), ("p - 1", 2.0), ("1-p", -2.0), ("2p", 6.0), ("-0.5*p+1", -0.5), ("4", 4.0)] {
            assert_eq!(affine_in_p(s, 3.0), Some(want), "{s}");
        }
        for s in ["", "q", "p^2", "1e"] {
            assert_eq!(affine_in_p(s, 3.0), None, "{s}");
        }
    }

    #[test]
    fn weight_config_parses() {
        let cfg: ClassifyConfig = toml::from_str(
            r#"
            p = 3.0
            [[segments]]
            start = -inf
            end = inf
            profile = { kind = "bracket", exponent = "p - 1" }
            "#,
        )
        .unwrap();
        let segs = cfg.segments(3.0).unwrap();
        assert_eq!(segs.len(), 1);
        assert!((segs[0].profile.value(1.0) - 4.0).abs() < 1e-12);
        assert!(toml::from_str::<ClassifyConfig>("q = 1").is_err());
    }
}
