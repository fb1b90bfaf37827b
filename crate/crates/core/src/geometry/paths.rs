use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::metric_graph::MetricGraph;

/// Weighted adjacency in compressed rows.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    offsets: Vec<usize>,
    targets: Vec<(usize, f64)>,
}

impl Csr {
    pub(crate) fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)> + Clone) -> Self {
        let mut degree = vec![0usize; n + 1];
        for (a, b, _) in edges.clone() {
            degree[a + 1] += 1;
            degree[b + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![(0, 0.0); offsets[n]];
        for (a, b, l) in edges {
            targets[fill[a]] = (b, l);
            fill[a] += 1;
            targets[fill[b]] = (a, l);
            fill[b] += 1;
        }
        Csr { offsets, targets }
    }

    pub(crate) fn from_graph(g: &MetricGraph) -> Self {
        Csr::from_edges(g.num_vertices(), g.edges().iter().map(|e| (e.a, e.b, e.length)))
    }

    fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Reusable shortest-path state. Distances of vertices not settled in the
/// last run read as `+inf`.
#[derive(Debug, Clone)]
pub(crate) struct Dijkstra {
    dist: Vec<f64>,
    done: Vec<bool>,
    touched: Vec<usize>,
    settled: Vec<usize>,
    heap: BinaryHeap<Reverse<Key>>,
}

impl Dijkstra {
    pub(crate) fn new(n: usize) -> Self {
        Dijkstra {
            dist: vec![f64::INFINITY; n],
            done: vec![false; n],
            touched: Vec::new(),
            settled: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.done[v] = false;
        }
        self.touched.clear();
        self.settled.clear();
        self.heap.clear();
    }

    /// Settles every vertex at distance `< cutoff` from the sources (given
    /// with initial offsets) and returns them in order of settlement.
    pub(crate) fn run(&mut self, g: &Csr, sources: &[(usize, f64)], cutoff: f64) -> &[usize] {
        self.reset();
        for &(s, d) in sources {
            if d < cutoff && d < self.dist[s] {
                self.dist[s] = d;
                self.touched.push(s);
                self.heap.push(Reverse(Key(d, s)));
            }
        }
        while let Some(Reverse(Key(d, v))) = self.heap.pop() {
            if self.done[v] || d > self.dist[v] {
                continue;
            }
            self.done[v] = true;
            self.settled.push(v);
            for &(w, l) in g.neighbors(v) {
                let nd = d + l;
                if nd < cutoff && nd < self.dist[w] {
                    if self.dist[w] == f64::INFINITY {
                        self.touched.push(w);
                    }
                    self.dist[w] = nd;
                    self.heap.push(Reverse(Key(nd, w)));
                }
            }
        }
        &self.settled
    }

    pub(crate) fn dist(&self, v: usize) -> f64 {
        if self.done[v] {
            self.dist[v]
        } else {
            f64::INFINITY
        }
    }

    pub(crate) fn settled(&self) -> &[usize] {
        &self.settled
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_runs_reset_between_calls() {
        // 0 -1- 1 -1- 2 -5- 3, plus a shortcut 0 -3- 2.
        let g = Csr::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 5.0), (0, 2, 3.0)]);
        let mut d = Dijkstra::new(4);
        d.run(&g, &[(0, 0.0)], f64::INFINITY);
        assert_eq!((0..4).map(|v| d.dist(v)).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0, 7.0]);
        d.run(&g, &[(3, 0.0)], 5.5);
        assert_eq!(d.dist(3), 0.0);
        assert_eq!(d.dist(2), 5.0);
        assert_eq!(d.dist(0), f64::INFINITY);
        d.run(&g, &[(0, 0.25), (1, 0.75)], 2.0);
        assert_eq!(d.dist(0), 0.25);
        assert_eq!(d.dist(1), 0.75);
        assert_eq!(d.dist(2), 1.75);
        assert_eq!(d.settled(), &[0, 1, 2]);
    }
}
