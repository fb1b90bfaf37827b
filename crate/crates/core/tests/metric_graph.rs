//! Property tests for the Dirichlet solver and the binary tree model.

mod common;

use pharmonic_core::metric_graph::{
    bounded_tree_function, build_binary_tree, graph_energy, max_interior_residual, solve_dirichlet,
    unbounded_tree_function, BoundaryData, GraphFunction, SolverOptions,
};
use pharmonic_core::quasimin::{exhaustive_supports, quasimin_ratio};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0), 1.3f64..4.0]
}

fn opts() -> SolverOptions {
    SolverOptions::default().with_tol(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_matches_brute_force(seed in any::<u64>(), p in exponent()) {
        let prob = common::random_problem(seed, 3);
        let r = solve_dirichlet(&prob.graph, p, &prob.data(), &opts()).unwrap();
        let want = common::brute_force_minimum(&prob, p);
        let got = common::energy_of(&prob.graph, r.u.values(), p);
        prop_assert!(got <= want * (1.0 + 1e-9) + 1e-12, "solver {got} above brute force {want}");
        prop_assert!(want <= got * (1.0 + 1e-6) + 1e-12, "brute force {want} below solver {got}");
    }

    #[test]
    fn residual_certificate(seed in any::<u64>(), p in exponent()) {
        let prob = common::random_problem(seed, 8);
        let r = solve_dirichlet(&prob.graph, p, &prob.data(), &opts()).unwrap();
        let res = max_interior_residual(&prob.graph, &r.u, p, |v| prob.is_interior(v)).unwrap();
        prop_assert!(res <= 1e-12, "residual {res}");
        prop_assert!((r.energy - common::energy_of(&prob.graph, r.u.values(), p)).abs() <= 1e-12 * r.energy.max(1.0));
    }

    #[test]
    fn values_stay_between_the_boundary_extremes(seed in any::<u64>(), p in exponent()) {
        let prob = common::random_problem(seed, 8);
        let r = solve_dirichlet(&prob.graph, p, &prob.data(), &opts()).unwrap();
        let lo = prob.boundary.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
        let hi = prob.boundary.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
        for &v in &prob.interior {
            let x = r.u.value(v);
            prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12, "u({v}) = {x} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn affine_covariance(seed in any::<u64>(), p in exponent(), a in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0], b in -2.0f64..2.0) {
        let prob = common::random_problem(seed, 6);
        let base = solve_dirichlet(&prob.graph, p, &prob.data(), &opts()).unwrap();
        let moved = BoundaryData::from_pairs(prob.boundary.iter().map(|&(v, x)| (v, a * x + b)));
        let r = solve_dirichlet(&prob.graph, p, &moved, &opts()).unwrap();
        let want = base.u.affine(a, b);
        for &v in &prob.interior {
            prop_assert!((r.u.value(v) - want.value(v)).abs() <= 1e-7 * (1.0 + a.abs() + b.abs()));
        }
        let e = graph_energy(&prob.graph, &want, p, None).unwrap();
        prop_assert!((e - a.abs().powf(p) * base.energy).abs() <= 1e-10 * e.max(1e-12));
    }

    #[test]
    fn solutions_are_minimizers_on_every_support(seed in any::<u64>(), p in exponent()) {
        let prob = common::random_problem(seed, 4);
        let r = solve_dirichlet(&prob.graph, p, &prob.data(), &opts()).unwrap();
        let supports = exhaustive_supports(&prob.interior).unwrap();
        let q = quasimin_ratio(&prob.graph, &r.u, p, &supports).unwrap();
        prop_assert!(q.certifies_minimizer(1e-8), "Q = {}", q.q_estimate);
    }

    #[test]
    fn tree_functions_are_harmonic_below_the_root(depth in 1usize..10, p in 1.3f64..4.0) {
        let t = build_binary_tree(depth).unwrap();
        let g = t.graph();
        let interior = |v: usize| v != t.root() && !t.is_leaf(v);
        for u in [unbounded_tree_function(&t, p).unwrap(), bounded_tree_function(&t, p).unwrap()] {
            let scale = u.values().iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let res = max_interior_residual(g, &u, p, interior).unwrap();
            prop_assert!(res <= 1e-10 * scale.powf(p - 1.0), "depth {depth}: residual {res}");
        }
        let mass: f64 = g.edges().iter().map(|e| e.density * e.length).sum();
        prop_assert!((g.total_mass() - mass).abs() <= 1e-12 * mass);
        for v in t.leaves() {
            prop_assert_eq!(g.degree(v), 1);
            prop_assert!(t.level(v) <= depth);
        }
    }
}

#[test]
fn constant_boundary_gives_the_constant() {
    let prob = common::random_problem(7, 8);
    let data = BoundaryData::from_pairs(prob.boundary.iter().map(|&(v, _)| (v, 0.25)));
    let r = solve_dirichlet(&prob.graph, 1.7, &data, &opts()).unwrap();
    assert_eq!(r.u, GraphFunction::constant(prob.graph.num_vertices(), 0.25));
    assert_eq!(r.energy, 0.0);
}
