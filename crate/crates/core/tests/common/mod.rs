//! Shared fixtures: random Dirichlet problems and an independent
//! brute-force energy minimizer.

#![allow(dead_code)]

use pharmonic_core::metric_graph::{BoundaryData, Edge, MetricGraph};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Problem {
    pub graph: MetricGraph,
    pub interior: Vec<usize>,
    pub boundary: Vec<(usize, f64)>,
}

impl Problem {
    pub fn data(&self) -> BoundaryData {
        BoundaryData::from_pairs(self.boundary.iter().copied())
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior.contains(&v)
    }
}

/// A connected graph with 1 to `max_interior` free vertices and 2 to 4
/// boundary vertices, random lengths and densities in `[0.5, 2]` and
/// boundary values in `[-1, 1]`.
pub fn random_problem(seed: u64, max_interior: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_interior);
    let b = rng.gen_range(2..=4);
    let n = k + b;
    // Interior vertices 0..k, boundary k..n; a random spanning tree keeps
    // everything connected and a few chords add cycles.
    let mut edges = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut push = |rng: &mut ChaCha8Rng, a: usize, c: usize| {
        edges.push(Edge::new(a, c, rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)));
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        push(&mut rng, order[i], order[j]);
    }
    for _ in 0..rng.gen_range(0..=k) {
        let a = rng.gen_range(0..n);
        let c = rng.gen_range(0..n);
        if a != c {
            push(&mut rng, a, c);
        }
    }
    let boundary = (k..n).map(|v| (v, rng.gen_range(-1.0..1.0))).collect();
    Problem {
        graph: MetricGraph::new(n, edges).expect("valid random graph"),
        interior: (0..k).collect(),
        boundary,
    }
}

/// `sum c l |du/l|^p`, written out independently of the library.
pub fn energy_of(g: &MetricGraph, u: &[f64], p: f64) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.density * e.length * ((u[e.b] - u[e.a]).abs() / e.length).powf(p))
        .sum()
}

/// Minimum energy with the boundary values fixed, by exhaustive search on
/// a coarse grid of at most about a million points in the box spanned by
/// the boundary values, followed by compass search with step halving.
pub fn brute_force_minimum(p: &Problem, exponent: f64) -> f64 {
    let g = &p.graph;
    let k = p.interior.len();
    let lo = p.boundary.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let hi = p.boundary.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let mut u = vec![0.0; g.num_vertices()];
    for &(v, x) in &p.boundary {
        u[v] = x;
    }
    let m = ((1e6f64).powf(1.0 / k as f64).floor() as usize).clamp(2, 201);
    let level = |i: usize| lo + (hi - lo) * i as f64 / (m - 1) as f64;
    let mut idx = vec![0usize; k];
    let mut best = f64::INFINITY;
    let mut best_u = u.clone();
    loop {
        for (j, &v) in p.interior.iter().enumerate() {
            u[v] = level(idx[j]);
        }
        let e = energy_of(g, &u, exponent);
        if e < best {
            best = e;
            best_u.clone_from(&u);
        }
        let mut j = 0;
        while j < k {
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == k {
            break;
        }
    }
    let mut u = best_u;
    let mut step = (hi - lo).max(1e-3) / (m - 1) as f64;
    while step > 1e-13 {
        let mut moved = false;
        for &v in &p.interior {
            for dir in [1.0, -1.0] {
                let old = u[v];
                u[v] = old + dir * step;
                let e = energy_of(g, &u, exponent);
                if e < best {
                    best = e;
                    moved = true;
                } else {
                    u[v] = old;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    best
}
