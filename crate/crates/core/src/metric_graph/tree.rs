//! The weighted binary tree carrying a finite-energy unbounded p-harmonic
//! function.
//!
//! The root `v_0` has two children and every other vertex has one parent and
//! two children. A distinguished ray `v_0, v_1, ...` is fixed, and `v'_j` is
//! the child of `v_{j-1}` off the ray. `G_j` is the subtree below `v'_j`. All
//! edges have length 1. An edge leaving the ray vertex `v_k` downwards, and
//! every edge of `G_{k+1}`, has measure `2^{-k}`.
//!
//! With `q = 2^{1/(1-p)}` the energy of the unbounded function truncated at
//! depth `J` is
//! `E_J = sum_{j=0}^{J-1} 2^{-j} (2 + sum_{k=1}^{J-1-j} q^k)`,
//! and `E_J -> 4 + 2q/(1-q)` as `J -> inf`.

use super::{Edge, GraphFunction, MetricGraph};
use crate::error::check_exponent;
use crate::{Error, Result};

/// Deepest supported truncation (about 67 million vertices).
pub const MAX_DEPTH: usize = 25;

#[derive(Debug, Clone)]
pub struct RootedBinaryTree {
    graph: MetricGraph,
    depth: usize,
    ray: Vec<usize>,
    /// `primes[j - 1]` is `v'_j`.
    primes: Vec<usize>,
    parent: Vec<Option<usize>>,
    level: Vec<usize>,
    /// 0 on the ray, `j` on `G_j`.
    branch: Vec<usize>,
}

impl RootedBinaryTree {
    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> usize {
        self.ray[0]
    }

    /// `v_j`, for `j <= depth`.
    pub fn ray(&self, j: usize) -> usize {
        self.ray[j]
    }

    /// `v'_j`, for `1 <= j <= depth`.
    pub fn prime(&self, j: usize) -> usize {
        self.primes[j - 1]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Combinatorial distance from the root.
    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    /// `Some(j)` when `v` lies in `G_j`, `None` on the ray.
    pub fn branch(&self, v: usize) -> Option<usize> {
        match self.branch[v] {
            0 => None,
            j => Some(j),
        }
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.level[v] == self.depth
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.graph.num_vertices()).filter(move |&v| self.is_leaf(v))
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }
}

/// The tree truncated at combinatorial depth `depth`, with `2^{depth+1} - 1`
/// vertices numbered in breadth-first order (ray child first).
pub fn build_binary_tree(depth: usize) -> Result<RootedBinaryTree> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::param(format!("tree depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let n = (1usize << (depth + 1)) - 1;
    let mut parent = Vec::with_capacity(n);
    let mut level = Vec::with_capacity(n);
    let mut branch = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n - 1);
    let mut ray = vec![0];
    let mut primes = Vec::with_capacity(depth);
    parent.push(None);
    level.push(0);
    branch.push(0);

    let mut head = 0;
    while head < parent.len() {
        let a = head;
        head += 1;
        if level[a] == depth {
            continue;
        }
        // Nearest ray vertex: `a` itself on the ray, `v_{j-1}` on `G_j`.
        let k = if branch[a] == 0 { level[a] } else { branch[a] - 1 };
        let measure = 0.5f64.powi(k as i32);
        for first in [true, false] {
            let c = parent.len();
            parent.push(Some(a));
            level.push(level[a] + 1);
            let b = if branch[a] != 0 {
                branch[a]
            } else if first {
                ray.push(c);
                0
            } else {
                primes.push(c);
                level[a] + 1
            };
            branch.push(b);
            edges.push(Edge::with_measure(a, c, 1.0, measure));
        }
    }
    debug_assert_eq!(parent.len(), n);
    Ok(RootedBinaryTree {
        graph: MetricGraph::new(n, edges)?,
        depth,
        ray,
        primes,
        parent,
        level,
        branch,
    })
}

fn ratio(p: f64) -> f64 {
    2f64.powf(1.0 / (1.0 - p))
}

/// The unbounded p-harmonic function: `u(v_j) = j`, `u(v'_1) = -1`,
/// `u(v'_j) = j` for `j >= 2`, and below that
/// `u(c) - u(a) = -2^{1/(1-p)} (u(b) - u(a))` for a child `c` of `a` whose
/// parent is `b`.
pub fn unbounded_tree_function(t: &RootedBinaryTree, p: f64) -> Result<GraphFunction> {
    check_exponent(p)?;
    let q = ratio(p);
    let n = t.num_vertices();
    let mut u = vec![0.0; n];
    // Breadth-first numbering puts parents before children.
    for v in 1..n {
        let a = t.parent[v].expect("only the root lacks a parent");
        u[v] = match (t.branch[v], t.branch[a]) {
            (0, _) => t.level[v] as f64,
            (1, 0) => -1.0,
            (j, 0) => j as f64,
            _ => {
                let b = t.parent[a].expect("off-ray vertices have grandparents");
                u[a] - q * (u[b] - u[a])
            }
        };
    }
    Ok(GraphFunction::new(u))
}

/// The bounded modification: 0 at the root, 1 elsewhere on the ray, `u` on
/// `G_1`, `2^{1/(p-1)} (u - 1) + 1` on `G_2` and 1 on `G_j` for `j >= 3`.
pub fn bounded_tree_function(t: &RootedBinaryTree, p: f64) -> Result<GraphFunction> {
    let u = unbounded_tree_function(t, p)?;
    let s = 2f64.powf(1.0 / (p - 1.0));
    Ok(GraphFunction::from_fn(t.num_vertices(), |v| match t.branch[v] {
        0 if v == t.root() => 0.0,
        0 => 1.0,
        1 => u.value(v),
        2 => s * (u.value(v) - 1.0) + 1.0,
        _ => 1.0,
    }))
}

/// `sum_{k=1}^{m} q^k`.
fn geometric(q: f64, m: usize) -> f64 {
    (1..=m).map(|k| q.powi(k as i32)).sum()
}

/// Energy of [`unbounded_tree_function`] on the depth-`depth` tree, from the
/// level-by-level series.
pub fn tree_energy_partial_sum(p: f64, depth: usize) -> f64 {
    let q = ratio(p);
    (0..depth)
        .map(|j| 0.5f64.powi(j as i32) * (2.0 + geometric(q, depth - 1 - j)))
        .sum()
}

/// `4 + 2 sum_{k>=1} 2^{k/(1-p)} = 4 + 2q/(1-q)`.
pub fn tree_energy_limit(p: f64) -> f64 {
    let q = ratio(p);
    4.0 + 2.0 * q / (1.0 - q)
}

/// Energy of the infinite tree outside the depth-`depth` truncation:
/// the ray levels `j >= depth` plus the cut-off parts of each `G_{j+1}`.
pub fn tree_energy_tail(p: f64, depth: usize) -> f64 {
    let q = ratio(p);
    let s = q / (1.0 - q);
    let ray = 0.5f64.powi(depth as i32 - 1) * (2.0 + s);
    let branches: f64 = (0..depth)
        .map(|j| 0.5f64.powi(j as i32) * q.powi((depth - j) as i32) / (1.0 - q))
        .sum();
    ray + branches
}

/// Energy of [`bounded_tree_function`] on the depth-`depth` tree.
pub fn bounded_tree_energy_partial_sum(p: f64, depth: usize) -> f64 {
    let q = ratio(p);
    let jump = 2f64.powf(p / (p - 1.0));
    let g2 = if depth >= 2 { jump * (1.0 + geometric(q, depth - 2)) / 2.0 } else { 0.0 };
    2.0 + geometric(q, depth - 1) + g2
}

pub fn bounded_tree_energy_limit(p: f64) -> f64 {
    let q = ratio(p);
    let s = q / (1.0 - q);
    2.0 + s + 2f64.powf(p / (p - 1.0)) * (1.0 + s) / 2.0
}
