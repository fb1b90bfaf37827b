//! Property tests for weights on the line: the energy identity of the
//! canonical p-harmonic functions, minimality of Dirichlet solutions and the
//! consistency of Liouville verdicts.

use pharmonic_core::quadrature::QuadOptions;
use pharmonic_core::weighted_line::{
    classify_liouville, conjugate_integral, dirichlet_solve_line, line_energy, p_harmonic_on_line, LineFunction,
    LineOptions, Profile, Segment, Weight,
};
use pharmonic_core::Extended;
use proptest::prelude::*;

/// Random positive weights: a few named profiles, sometimes glued from two
/// segments at a random point.
fn weight() -> impl Strategy<Value = Weight> {
    let profile = prop_oneof![
        (0.2f64..5.0).prop_map(Profile::constant),
        (-1.0f64..2.0).prop_map(Profile::bracket),
        (0.1f64..2.0, -1.5f64..1.5).prop_map(|(c, rate)| Profile::exponential(c, rate, 0.0, false)),
        (0.1f64..2.0, -1.0f64..1.0).prop_map(|(c, rate)| Profile::exponential(c, rate, 0.0, true)),
    ];
    (1.2f64..4.0, profile.clone(), proptest::option::of((profile, -3.0f64..3.0))).prop_map(|(p, a, split)| {
        let segments = match split {
            None => vec![Segment {
                start: f64::NEG_INFINITY,
                end: f64::INFINITY,
                profile: a,
            }],
            Some((b, at)) => vec![
                Segment {
                    start: f64::NEG_INFINITY,
                    end: at,
                    profile: a,
                },
                Segment {
                    start: at,
                    end: f64::INFINITY,
                    profile: b,
                },
            ],
        };
        Weight::new(p, segments).unwrap()
    })
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-5.0f64..5.0, 0.1f64..6.0).prop_map(|(a, len)| (a, a + len))
}

fn finite(x: Extended) -> f64 {
    x.finite().expect("bounded interval")
}

/// Piecewise-linear interpolation through `(xs[i], ys[i])`.
fn polyline(xs: Vec<f64>, ys: Vec<f64>) -> LineFunction {
    let domain = (xs[0], xs[xs.len() - 1]);
    LineFunction::numeric(domain, move |x| {
        let i = xs.partition_point(|&t| t <= x).clamp(1, xs.len() - 1);
        let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_identity(w in weight(), (a, b) in interval(), a_coef in -3.0f64..3.0, b_coef in -2.0f64..2.0) {
        let opts = LineOptions::default();
        let u = p_harmonic_on_line(&w, a_coef, b_coef).unwrap();
        let e = finite(line_energy(&u, &w, a, b, &opts).unwrap().value);
        let c = finite(conjugate_integral(&w, a, b, &opts).unwrap().value);
        let want = a_coef.abs().powf(w.p()) * c;
        prop_assert!((e - want).abs() <= 1e-6 * want.max(1e-300), "{e} vs {want}");
    }

    #[test]
    fn dirichlet_solution_minimizes(
        w in weight(),
        (a, b) in interval(),
        (v0, v1) in (-2.0f64..2.0, -2.0f64..2.0),
        bumps in proptest::collection::vec((0.05f64..1.0, any::<bool>()).prop_map(|(d, neg)| if neg { -d } else { d }), 1..6),
    ) {
        let opts = LineOptions::default();
        let h = dirichlet_solve_line(&w, a, b, v0, v1, &opts).unwrap();
        let best = finite(line_energy(&h, &w, a, b, &opts).unwrap().value);
        // Perturb the solution at equally spaced knots and interpolate.
        let m = bumps.len() + 1;
        let mut xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        xs[m] = b;
        let mut ys: Vec<f64> = xs.iter().map(|&x| h.eval(x).unwrap()).collect();
        for (y, d) in ys[1..m].iter_mut().zip(&bumps) {
            *y += d;
        }
        let v = polyline(xs, ys);
        let e = finite(line_energy(&v, &w, a, b, &opts).unwrap().value);
        prop_assert!(e >= best - 1e-9, "competitor {e} below minimum {best}");
    }

    #[test]
    fn positive_liouville_implies_bounded(w in weight()) {
        let v = classify_liouville(&w, &LineOptions::default()).unwrap();
        prop_assert!(!v.positive_liouville_holds || v.bounded_liouville_holds);
        prop_assert_eq!(v.bounded_liouville_holds, v.full_line_integral == Extended::Infinite);
        prop_assert_eq!(v.bounded_liouville_holds, v.witness.is_none());
    }

    #[test]
    fn halving_the_tolerance_stays_within_the_error_bound(w in weight(), (a, b) in interval()) {
        let coarse = LineOptions {
            quad: QuadOptions::default().with_rel_tol(1e-8),
            ..LineOptions::default()
        };
        let fine = LineOptions {
            quad: QuadOptions::default().with_rel_tol(5e-9),
            ..LineOptions::default()
        };
        let c = conjugate_integral(&w, a, b, &coarse).unwrap();
        let f = conjugate_integral(&w, a, b, &fine).unwrap();
        let diff = (finite(c.value) - finite(f.value)).abs();
        prop_assert!(diff <= c.error + f.error + 1e-15 * finite(c.value).abs(), "{diff} vs {} + {}", c.error, f.error);
    }
}

#[test]
fn canonical_function_is_bounded_iff_its_energy_is_finite() {
    let opts = LineOptions::default();
    for (w, bounded) in [
        (Weight::unweighted(2.0).unwrap(), false),
        (Weight::on_line(2.0, Profile::bracket(1.0)).unwrap(), true),
        (Weight::on_line(3.0, Profile::exponential(1.0, 1.0, 0.0, true)).unwrap(), true),
        (Weight::on_line(1.5, Profile::bracket(0.25)).unwrap(), false),
    ] {
        let c = conjugate_integral(&w, f64::NEG_INFINITY, f64::INFINITY, &opts).unwrap().value;
        let u = p_harmonic_on_line(&w, 1.0, 0.0).unwrap();
        let e = line_energy(&u, &w, f64::NEG_INFINITY, f64::INFINITY, &opts).unwrap().value;
        assert_eq!(c.finite().is_some(), bounded);
        assert_eq!(e.finite().is_some(), bounded);
        if let Some(c) = c.finite() {
            // The range of u is the conjugate integral.
            let v = classify_liouville(&w, &opts).unwrap().witness.unwrap();
            assert!((v.limit_plus_infinity - v.limit_minus_infinity - c).abs() < 1e-6 * c);
        }
    }
}
