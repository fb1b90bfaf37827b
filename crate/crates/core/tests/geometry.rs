//! Property tests for ball masses and volume growth, against an
//! all-pairs shortest path oracle.

mod common;

use pharmonic_core::geometry::{volume_growth_fit, Point, Space};
use pharmonic_core::metric_graph::{Edge, MetricGraph};
use proptest::prelude::*;

/// Floyd-Warshall distances between vertices.
fn all_pairs(g: &MetricGraph) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in g.edges() {
        d[e.a][e.b] = d[e.a][e.b].min(e.length);
        d[e.b][e.a] = d[e.b][e.a].min(e.length);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Mass of the open ball of radius `r` around vertex `c`: an edge is
/// covered from each end up to the remaining radius.
fn oracle_mass(g: &MetricGraph, d: &[Vec<f64>], c: usize, r: f64) -> f64 {
    g.edges()
        .iter()
        .map(|e| {
            let covered = (r - d[c][e.a]).max(0.0) + (r - d[c][e.b]).max(0.0);
            e.density * covered.min(e.length)
        })
        .sum()
}

fn disjoint_union(a: &MetricGraph, b: &MetricGraph) -> MetricGraph {
    let shift = a.num_vertices();
    let mut edges: Vec<Edge> = a.edges().to_vec();
    edges.extend(b.edges().iter().map(|e| Edge::new(e.a + shift, e.b + shift, e.length, e.density)));
    MetricGraph::new(shift + b.num_vertices(), edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ball_mass_matches_the_oracle(seed in any::<u64>(), r in 0.05f64..8.0, pick in any::<prop::sample::Index>()) {
        let g = common::random_problem(seed, 8).graph;
        let c = pick.index(g.num_vertices());
        let want = oracle_mass(&g, &all_pairs(&g), c, r);
        let got = Space::new(&g).ball_mass(&Point::Vertex(c), r).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn ball_mass_is_monotone_and_saturates(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let g = common::random_problem(seed, 8).graph;
        let space = Space::new(&g);
        let c = Point::Vertex(pick.index(g.num_vertices()));
        let mut last = 0.0;
        for i in 1..=40 {
            let m = space.ball_mass(&c, 0.25 * i as f64).unwrap();
            prop_assert!(m >= last - 1e-12, "mass fell from {last} to {m}");
            last = m;
        }
        // No point is farther than the total edge length.
        let reach: f64 = g.edges().iter().map(|e| e.length).sum::<f64>() + 1.0;
        let all = space.ball_mass(&c, reach).unwrap();
        prop_assert!((all - g.total_mass()).abs() <= 1e-12 * g.total_mass());
    }

    #[test]
    fn mass_is_additive_over_disjoint_unions(s1 in any::<u64>(), s2 in any::<u64>(), r in 0.1f64..6.0) {
        let a = common::random_problem(s1, 6).graph;
        let b = common::random_problem(s2, 6).graph;
        let u = disjoint_union(&a, &b);
        let shift = a.num_vertices();
        let space = Space::new(&u);
        let total = space.ball_mass(&Point::Vertex(0), 1e6).unwrap() + space.ball_mass(&Point::Vertex(shift), 1e6).unwrap();
        prop_assert!((total - a.total_mass() - b.total_mass()).abs() <= 1e-12 * total);
        let left = space.ball_mass(&Point::Vertex(0), r).unwrap();
        prop_assert!((left - Space::new(&a).ball_mass(&Point::Vertex(0), r).unwrap()).abs() <= 1e-12 * left.max(1.0));
        let right = space.ball_mass(&Point::Vertex(shift), r).unwrap();
        prop_assert!((right - Space::new(&b).ball_mass(&Point::Vertex(0), r).unwrap()).abs() <= 1e-12 * right.max(1.0));
    }

    #[test]
    fn growth_exponent_bounds_are_ordered(seed in any::<u64>(), r0 in 0.1f64..1.0, factor in 1.2f64..2.5) {
        let g = common::random_problem(seed, 8).graph;
        let radii: Vec<f64> = (0..6).map(|k| r0 * factor.powi(k)).collect();
        let fit = volume_growth_fit(&Space::new(&g), &Point::Vertex(0), &radii).unwrap();
        prop_assert!(fit.sigma <= fit.s);
        for &slope in &fit.two_point_slopes {
            prop_assert!(slope >= fit.sigma && slope <= fit.s);
        }
        for &alpha in &fit.alpha_candidates {
            prop_assert!(alpha >= fit.sigma - 1e-12 && alpha <= fit.s + 1e-12);
        }
    }
}

#[test]
fn ball_around_an_edge_point() {
    let g = MetricGraph::new(2, vec![Edge::new(0, 1, 4.0, 0.5)]).unwrap();
    let m = Space::new(&g).ball_mass(&Point::OnEdge { edge: 0, t: 1.0 }, 2.0).unwrap();
    assert_eq!(m, 0.5 * 3.0);
}
