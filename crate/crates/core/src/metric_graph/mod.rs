//! Finite metric graphs with constant-density edge measures.
//!
//! An edge `[a, b]` of length `l` and density `c` carries the measure
//! `mu([a, b]) = c * l`. Functions are given by vertex values and extended
//! linearly along edges, so their upper gradient on an edge is the constant
//! `|u(b) - u(a)| / l` and the p-energy is `sum_e c_e l_e (|du_e| / l_e)^p`.

mod generators;
mod io;
mod solver;
mod tree;

use serde::{Deserialize, Serialize};

pub use generators::{
    build_strip_graph, grid_graph, path_graph, strip_comparison_energy, strip_comparison_function,
    EmbeddedGraph,
};
pub use io::{parse_edge_list, parse_roles, write_csv};
pub use solver::{solve_dirichlet, BoundaryData, SolveReport, SolverOptions};
pub use tree::{
    bounded_tree_energy_limit, bounded_tree_energy_partial_sum, bounded_tree_function, build_binary_tree, tree_energy_limit,
    tree_energy_partial_sum, tree_energy_tail, unbounded_tree_function, RootedBinaryTree, MAX_DEPTH,
};

use crate::error::check_exponent;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub density: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, length: f64, density: f64) -> Self {
        Edge { a, b, length, density }
    }

    /// An edge specified by its total measure instead of its density.
    pub fn with_measure(a: usize, b: usize, length: f64, measure: f64) -> Self {
        Edge::new(a, b, length, measure / length)
    }

    pub fn measure(&self) -> f64 {
        self.density * self.length
    }

    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// `c l^{1-p}`, the coefficient of `|du|^p` in the edge energy.
    fn stiffness(&self, p: f64) -> f64 {
        if self.length == 1.0 {
            self.density
        } else {
            self.density * self.length.powf(1.0 - p)
        }
    }
}

/// An undirected multigraph with positive lengths and densities.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    n: usize,
    edges: Vec<Edge>,
    /// `(neighbor, edge index)` pairs in edge order, vertex `v` owning
    /// `adjacency[offsets[v]..offsets[v + 1]]`.
    offsets: Vec<usize>,
    adjacency: Vec<(usize, usize)>,
}

impl MetricGraph {
    pub fn new(n_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut offsets = vec![0; n_vertices + 1];
        for (i, e) in edges.iter().enumerate() {
            if e.a >= n_vertices || e.b >= n_vertices {
                return Err(Error::UnknownVertex(e.a.max(e.b)));
            }
            if e.a == e.b {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop at vertex {}", e.a)));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {i} has length {}", e.length)));
            }
            if !(e.density > 0.0 && e.density.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {i} has density {}", e.density)));
            }
            offsets[e.a + 1] += 1;
            offsets[e.b + 1] += 1;
        }
        for v in 0..n_vertices {
            offsets[v + 1] += offsets[v];
        }
        let mut next = offsets.clone();
        let mut adjacency = vec![(0, 0); 2 * edges.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[next[e.a]] = (e.b, i);
            next[e.a] += 1;
            adjacency[next[e.b]] = (e.a, i);
            next[e.b] += 1;
        }
        Ok(MetricGraph {
            n: n_vertices,
            edges,
            offsets,
            adjacency,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn total_mass(&self) -> f64 {
        sum(self.edges.iter().map(Edge::measure))
    }

    /// Connected-component label of every vertex, labels numbered in order
    /// of their smallest vertex.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }
}

/// Vertex values of a function that is linear along each edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction {
    values: Vec<f64>,
}

impl GraphFunction {
    pub fn new(values: Vec<f64>) -> Self {
        GraphFunction { values }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        GraphFunction { values: vec![c; n] }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        GraphFunction {
            values: (0..n).map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a * u + b`.
    pub fn affine(&self, a: f64, b: f64) -> GraphFunction {
        GraphFunction {
            values: self.values.iter().map(|&x| a * x + b).collect(),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn check_len(&self, g: &MetricGraph) -> Result<()> {
        if self.values.len() == g.num_vertices() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(format!(
                "function has {} values but the graph has {} vertices",
                self.values.len(),
                g.num_vertices()
            )))
        }
    }
}

/// `sign(d) |d|^e`, with `0 -> 0`.
pub(crate) fn signed_pow(d: f64, e: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else if e == 1.0 {
        d
    } else if e == 2.0 {
        d * d.abs()
    } else if e == 0.5 {
        d.signum() * d.abs().sqrt()
    } else {
        d.signum() * d.abs().powf(e)
    }
}

/// `|d|^p`, exact for `p = 2`.
pub(crate) fn abs_pow(d: f64, p: f64) -> f64 {
    if p == 2.0 {
        d * d
    } else {
        d.abs().powf(p)
    }
}

/// Neumaier-compensated sum.
pub(crate) fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        comp += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + comp
}

/// The discrete p-Laplacian at `vertex`,
/// `sum_{b ~ a} mu([a,b]) l^{-p} |u(b)-u(a)|^{p-2} (u(b)-u(a))`.
///
/// This is minus `1/p` times the partial derivative of [`graph_energy`] in
/// the value at `vertex`, so it vanishes exactly when `u` is energy-critical
/// there. On unit edges it is the familiar vertex balance equation.
pub fn p_laplacian_residual(g: &MetricGraph, u: &GraphFunction, p: f64, vertex: usize) -> Result<f64> {
    check_exponent(p)?;
    g.check_vertex(vertex)?;
    u.check_len(g)?;
    Ok(residual_at(g, u.values(), p, vertex))
}

pub(crate) fn residual_at(g: &MetricGraph, u: &[f64], p: f64, v: usize) -> f64 {
    sum(g.neighbors(v).iter().map(|&(w, e)| {
        let e = g.edge(e);
        e.stiffness(p) * signed_pow(u[w] - u[v], p - 1.0)
    }))
}

fn edge_energy(e: &Edge, u: &[f64], p: f64) -> f64 {
    e.stiffness(p) * abs_pow(u[e.b] - u[e.a], p)
}

/// `sum_e c_e l_e (|du_e| / l_e)^p`, over `edge_subset` when given.
pub fn graph_energy(g: &MetricGraph, u: &GraphFunction, p: f64, edge_subset: Option<&[usize]>) -> Result<f64> {
    check_exponent(p)?;
    u.check_len(g)?;
    let u = u.values();
    match edge_subset {
        None => Ok(sum(g.edges().iter().map(|e| edge_energy(e, u, p)))),
        Some(subset) => {
            let mut terms = Vec::with_capacity(subset.len());
            for &i in subset {
                let e = g
                    .edges()
                    .get(i)
                    .ok_or_else(|| Error::InvalidGraph(format!("edge index {i} out of range")))?;
                terms.push(edge_energy(e, u, p));
            }
            Ok(sum(terms))
        }
    }
}

/// Largest `|residual|` over the vertices for which `interior` is true.
pub fn max_interior_residual(
    g: &MetricGraph,
    u: &GraphFunction,
    p: f64,
    interior: impl Fn(usize) -> bool,
) -> Result<f64> {
    check_exponent(p)?;
    u.check_len(g)?;
    Ok((0..g.num_vertices())
        .filter(|&v| interior(v))
        .map(|v| residual_at(g, u.values(), p, v).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> MetricGraph {
        MetricGraph::new(n + 1, (0..n).map(|i| Edge::new(i, i + 1, 1.0, 1.0)).collect()).unwrap()
    }

    #[test]
    fn construction_is_validated() {
        assert!(matches!(
            MetricGraph::new(2, vec![Edge::new(0, 0, 1.0, 1.0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            MetricGraph::new(2, vec![Edge::new(0, 1, 0.0, 1.0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            MetricGraph::new(2, vec![Edge::new(0, 1, 1.0, -1.0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            MetricGraph::new(2, vec![Edge::new(0, 2, 1.0, 1.0)]),
            Err(Error::UnknownVertex(2))
        ));
    }

    #[test]
    fn residual_examples() {
        let g = path(2);
        let u = GraphFunction::new(vec![0.0, 1.0, 2.0]);
        for p in [1.2, 2.0, 4.0] {
            assert_eq!(p_laplacian_residual(&g, &u, p, 1).unwrap(), 0.0);
        }
        assert!(matches!(p_laplacian_residual(&g, &u, 2.0, 3), Err(Error::UnknownVertex(3))));

        let star = MetricGraph::new(4, (1..4).map(|i| Edge::new(0, i, 1.0, 1.0)).collect()).unwrap();
        let u = GraphFunction::new(vec![1.0, 0.0, 0.0, 3.0]);
        assert_eq!(p_laplacian_residual(&star, &u, 2.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn residual_is_the_energy_derivative() {
        // Lengths 1 and 2; the minimizer at p = 2 with ends 0 and 3 is 1.
        let g = MetricGraph::new(3, vec![Edge::new(0, 1, 1.0, 1.0), Edge::new(1, 2, 2.0, 1.0)]).unwrap();
        let u = GraphFunction::new(vec![0.0, 1.0, 3.0]);
        assert_eq!(p_laplacian_residual(&g, &u, 2.0, 1).unwrap(), 0.0);
        let p = 2.7;
        let u = GraphFunction::new(vec![0.0, 1.3, 3.0]);
        let h = 1e-6;
        let e = |t: f64| graph_energy(&g, &GraphFunction::new(vec![0.0, t, 3.0]), p, None).unwrap();
        let fd = (e(1.3 + h) - e(1.3 - h)) / (2.0 * h);
        let r = p_laplacian_residual(&g, &u, p, 1).unwrap();
        assert!((fd + p * r).abs() < 1e-6, "{fd} vs {r}");
    }

    #[test]
    fn energy_examples() {
        let g = path(3);
        assert_eq!(graph_energy(&g, &GraphFunction::constant(4, 5.0), 2.0, None).unwrap(), 0.0);
        let e = MetricGraph::new(2, vec![Edge::new(0, 1, 1.0, 1.0)]).unwrap();
        assert_eq!(graph_energy(&e, &GraphFunction::new(vec![0.0, 2.0]), 3.0, None).unwrap(), 8.0);
        let u = GraphFunction::new(vec![0.0, 1.0, 3.0, 2.0]);
        let all = graph_energy(&g, &u, 2.0, None).unwrap();
        let a = graph_energy(&g, &u, 2.0, Some(&[0, 2])).unwrap();
        let b = graph_energy(&g, &u, 2.0, Some(&[1])).unwrap();
        assert_eq!(all, a + b);
        assert!(graph_energy(&g, &u, 2.0, Some(&[7])).is_err());
        assert!(graph_energy(&g, &GraphFunction::new(vec![1.0]), 2.0, None).is_err());
    }

    #[test]
    fn components_are_labelled_in_order() {
        let g = MetricGraph::new(5, vec![Edge::new(3, 4, 1.0, 1.0), Edge::new(0, 2, 1.0, 1.0)]).unwrap();
        assert_eq!(g.components(), (vec![0, 1, 0, 2, 2], 3));
    }

    #[test]
    fn compensated_sum() {
        assert_eq!(sum([1e16, 1.0, -1e16]), 1.0);
    }
}
