//! Plain-text graph formats.
//!
//! Edge lists have one edge per line, `a b length density`, with integer
//! vertex ids. Role files have one vertex per line: `<v> boundary <value>`,
//! `<v> free` (the default for unlisted vertices) or `<v> floating`, which
//! marks the vertex's component as free of boundary conditions. Blank lines
//! and `#` comments are ignored in both.

use std::fmt::Write as _;

use super::{BoundaryData, Edge, GraphFunction, MetricGraph};
use crate::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::InvalidGraph(format!("line {line}: cannot parse {what} from {tok:?}")))
}

/// Parses an edge list; the vertex count is one more than the largest id.
pub fn parse_edge_list(text: &str) -> Result<MetricGraph> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (line, toks) in content_lines(text) {
        if toks.len() != 4 {
            return Err(Error::InvalidGraph(format!(
                "line {line}: expected `a b length density`, found {} fields",
                toks.len()
            )));
        }
        let a: usize = field(toks[0], line, "vertex id")?;
        let b: usize = field(toks[1], line, "vertex id")?;
        let length: f64 = field(toks[2], line, "length")?;
        let density: f64 = field(toks[3], line, "density")?;
        n = n.max(a + 1).max(b + 1);
        edges.push(Edge::new(a, b, length, density));
    }
    if edges.is_empty() {
        return Err(Error::InvalidGraph("edge list is empty".into()));
    }
    MetricGraph::new(n, edges).map_err(|e| match e {
        Error::InvalidGraph(msg) => Error::InvalidGraph(format!("edge list: {msg}")),
        other => other,
    })
}

pub fn parse_roles(text: &str, n_vertices: usize) -> Result<BoundaryData> {
    let mut data = BoundaryData::new();
    let mut seen = vec![false; n_vertices];
    for (line, toks) in content_lines(text) {
        let v: usize = field(toks[0], line, "vertex id")?;
        if v >= n_vertices {
            return Err(Error::UnknownVertex(v));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidGraph(format!("line {line}: vertex {v} listed twice")));
        }
        match toks[1..] {
            ["boundary", value] => data.set(v, field(value, line, "boundary value")?),
            ["free"] => {}
            ["floating"] => data.mark_floating(v),
            _ => {
                return Err(Error::InvalidGraph(format!(
                    "line {line}: expected `<v> boundary <value>`, `<v> free` or `<v> floating`"
                )))
            }
        }
    }
    Ok(data)
}

/// `vertex,value` rows with shortest round-trip formatting.
pub fn write_csv(u: &GraphFunction) -> String {
    let mut out = String::from("vertex,value\n");
    for (v, x) in u.values().iter().enumerate() {
        writeln!(out, "{v},{x:?}").expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = parse_edge_list("# path\n0 1 1.0 2\n1 2 0.5 1   # short\n\n").unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.edge(1).length, 0.5);
        let roles = parse_roles("0 boundary 0\n2 boundary 1.5\n1 free\n", 3).unwrap();
        assert_eq!(roles.value(2), Some(1.5));
        assert!(!roles.is_fixed(1));
        let csv = write_csv(&GraphFunction::new(vec![0.0, 0.25, 1.0 / 3.0]));
        assert_eq!(csv, "vertex,value\n0,0.0\n1,0.25\n2,0.3333333333333333\n");
    }

    #[test]
    fn malformed_input_names_the_line() {
        let err = parse_edge_list("0 1 1 1\n1 x 1 1\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_edge_list("0 1 1\n").is_err());
        assert!(parse_edge_list("0 0 1 1\n").is_err());
        assert!(parse_edge_list("").is_err());
        assert!(matches!(parse_roles("5 free\n", 3), Err(Error::UnknownVertex(5))));
        assert!(parse_roles("0 boundary\n", 3).is_err());
        assert!(parse_roles("0 free\n0 free\n", 3).is_err());
    }
}
