use super::{Edge, GraphFunction, MetricGraph};
use crate::{Error, Result};

/// A graph whose vertices carry planar coordinates, with a distinguished
/// base vertex.
#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    pub graph: MetricGraph,
    pub coords: Vec<[f64; 2]>,
    pub origin: usize,
}

impl EmbeddedGraph {
    /// The vertex at exactly these coordinates.
    pub fn find(&self, x: f64, y: f64) -> Option<usize> {
        self.coords.iter().position(|c| c[0] == x && c[1] == y)
    }

    /// A vertex function given by a function of the coordinates.
    pub fn function(&self, f: impl Fn(f64, f64) -> f64) -> GraphFunction {
        GraphFunction::new(self.coords.iter().map(|c| f(c[0], c[1])).collect())
    }
}

/// The unit-length, unit-density path on the integers `-n..=n`.
pub fn path_graph(n: usize) -> Result<EmbeddedGraph> {
    if n == 0 {
        return Err(Error::param("path half-length must be positive"));
    }
    let m = 2 * n + 1;
    let edges = (0..m - 1).map(|i| Edge::new(i, i + 1, 1.0, 1.0)).collect();
    Ok(EmbeddedGraph {
        graph: MetricGraph::new(m, edges)?,
        coords: (0..m).map(|i| [i as f64 - n as f64, 0.0]).collect(),
        origin: n,
    })
}

/// The unit-length, unit-density lattice on `[-n, n]^2`, row by row.
pub fn grid_graph(n: usize) -> Result<EmbeddedGraph> {
    if n == 0 {
        return Err(Error::param("grid half-width must be positive"));
    }
    let side = 2 * n + 1;
    let id = |i: usize, j: usize| j * side + i;
    let mut edges = Vec::with_capacity(2 * side * (side - 1));
    let mut coords = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            coords.push([i as f64 - n as f64, j as f64 - n as f64]);
            if i + 1 < side {
                edges.push(Edge::new(id(i, j), id(i + 1, j), 1.0, 1.0));
            }
            if j + 1 < side {
                edges.push(Edge::new(id(i, j), id(i, j + 1), 1.0, 1.0));
            }
        }
    }
    Ok(EmbeddedGraph {
        graph: MetricGraph::new(side * side, edges)?,
        coords,
        origin: id(n, n),
    })
}

/// Grid model of the strip `[-n_len, n_len] x [0, 1]` with spacing
/// `h = 1/n_wid` in both directions.
///
/// Densities follow the trapezoidal rule split evenly between horizontal
/// and vertical edges: `h/2` on interior rails and columns, `h/4` on the
/// boundary ones. Horizontal and vertical edges then each carry half the
/// area, and the total mass is exactly the area `2 n_len`. The origin is
/// the midline vertex above `x = 0`, at height `floor(n_wid/2) h`.
pub fn build_strip_graph(n_len: usize, n_wid: usize) -> Result<EmbeddedGraph> {
    if n_len < 2 || n_wid < 2 {
        return Err(Error::param(format!("strip needs n_len >= 2 and n_wid >= 2, got {n_len}, {n_wid}")));
    }
    let h = 1.0 / n_wid as f64;
    let cols = 2 * n_len * n_wid + 1;
    let rails = n_wid + 1;
    let id = |i: usize, j: usize| j * cols + i;
    let mut edges = Vec::new();
    let mut coords = Vec::with_capacity(cols * rails);
    for j in 0..rails {
        let rail = if j == 0 || j == n_wid { h / 4.0 } else { h / 2.0 };
        for i in 0..cols {
            coords.push([i as f64 * h - n_len as f64, j as f64 * h]);
            if i + 1 < cols {
                edges.push(Edge::new(id(i, j), id(i + 1, j), h, rail));
            }
            if j + 1 < rails {
                let column = if i == 0 || i == cols - 1 { h / 4.0 } else { h / 2.0 };
                edges.push(Edge::new(id(i, j), id(i, j + 1), h, column));
            }
        }
    }
    Ok(EmbeddedGraph {
        graph: MetricGraph::new(cols * rails, edges)?,
        coords,
        origin: id(n_len * n_wid, n_wid / 2),
    })
}

/// `v_n = T max{0, min{1, x/n}}` on a strip graph.
pub fn strip_comparison_function(strip: &EmbeddedGraph, n: f64, t: f64) -> GraphFunction {
    strip.function(|x, _| t * (x / n).clamp(0.0, 1.0))
}

/// Closed-form energy of [`strip_comparison_function`]: the slope `T/n`
/// acts on the horizontal mass `n/2` over `[0, n]`, so the energy is
/// `T^p n^{1-p} / 2` whenever `n` is a grid abscissa inside the strip.
pub fn strip_comparison_energy(p: f64, n: f64, t: f64) -> f64 {
    t.abs().powf(p) * n.powf(1.0 - p) / 2.0
}

#[cfg(test)]
mod tests {
    use super::super::graph_energy;
    use super::*;

    #[test]
    fn sizes_and_masses() {
        let p = path_graph(3).unwrap();
        assert_eq!(p.graph.num_vertices(), 7);
        assert_eq!(p.coords[p.origin], [0.0, 0.0]);

        let g = grid_graph(2).unwrap();
        assert_eq!(g.graph.num_vertices(), 25);
        assert_eq!(g.graph.num_edges(), 40);
        assert_eq!(g.coords[g.origin], [0.0, 0.0]);

        let s = build_strip_graph(3, 2).unwrap();
        let rails: std::collections::BTreeSet<u64> = s.coords.iter().map(|c| c[1].to_bits()).collect();
        assert_eq!(rails.len(), 3);
        assert!((s.graph.total_mass() - 6.0).abs() < 1e-12);
        assert_eq!(s.coords[s.origin], [0.0, 0.5]);
        assert!(build_strip_graph(1, 2).is_err());
    }

    #[test]
    fn comparison_energy_is_exact() {
        for (n_len, n_wid) in [(8, 2), (16, 4)] {
            let s = build_strip_graph(n_len, n_wid).unwrap();
            for p in [1.5, 2.0, 3.0] {
                for n in [2.0, 4.0, n_len as f64] {
                    let v = strip_comparison_function(&s, n, 1.0);
                    let e = graph_energy(&s.graph, &v, p, None).unwrap();
                    let want = strip_comparison_energy(p, n, 1.0);
                    assert!((e - want).abs() < 1e-12 * want, "{e} vs {want}");
                }
            }
            let c = GraphFunction::constant(s.graph.num_vertices(), 2.0);
            assert_eq!(graph_energy(&s.graph, &c, 2.0, None).unwrap(), 0.0);
        }
    }
}
