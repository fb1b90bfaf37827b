//! Empirical checks of the quasiminimizer property, the weak maximum
//! principle, oscillation and Caccioppoli estimates, and energy growth.
//!
//! The quasiminimizer test compares `u` with its p-harmonic replacement on
//! finite vertex supports. This is a finite family of perturbations and
//! says nothing about arbitrary test functions.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Serialize, Serializer};

use crate::geometry::{check_radii, least_squares, Ball, Point, Space};
use crate::metric_graph::{
    abs_pow, solve_dirichlet, sum, BoundaryData, Edge, GraphFunction, MetricGraph, SolverOptions,
};
use crate::error::check_exponent;
use crate::{Error, Extended, Result};

/// Ratio of two nonnegative quantities with explicit markers for division
/// by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmpiricalConstant {
    Finite(f64),
    /// Positive numerator over a zero denominator.
    Infinite,
    /// `0/0`.
    Indeterminate,
}

impl EmpiricalConstant {
    fn ratio(num: f64, den: f64) -> Self {
        match (num > 0.0, den > 0.0) {
            (_, true) => EmpiricalConstant::Finite(num / den),
            (true, false) => EmpiricalConstant::Infinite,
            (false, false) => EmpiricalConstant::Indeterminate,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            EmpiricalConstant::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for EmpiricalConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmpiricalConstant::Finite(v) => write!(f, "{v:?}"),
            EmpiricalConstant::Infinite => f.write_str("inf"),
            EmpiricalConstant::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

impl Serialize for EmpiricalConstant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EmpiricalConstant::Finite(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportRatio {
    pub support: Vec<usize>,
    /// `E_S(u)`, summed over edges with an endpoint in the support.
    pub energy: f64,
    pub replacement_energy: f64,
    pub ratio: Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiminReport {
    pub q_estimate: Extended,
    /// Index of the support attaining `q_estimate`.
    pub worst: usize,
    pub ratios: Vec<SupportRatio>,
}

impl QuasiminReport {
    /// `u` minimizes energy on every tested support.
    pub fn certifies_minimizer(&self, tol: f64) -> bool {
        self.q_estimate.finite().is_some_and(|q| q <= 1.0 + tol)
    }
}

/// Sum of `c l^{1-p} |du|^p` over the given edges.
fn edges_energy(g: &MetricGraph, edges: &[usize], u: impl Fn(usize) -> f64, p: f64) -> f64 {
    sum(edges.iter().map(|&e| {
        let edge = g.edge(e);
        edge.density * edge.length * abs_pow((u(edge.b) - u(edge.a)) / edge.length, p)
    }))
}

/// [`quasimin_ratio_with`] under the default solver options.
pub fn quasimin_ratio(g: &MetricGraph, u: &GraphFunction, p: f64, supports: &[Vec<usize>]) -> Result<QuasiminReport> {
    quasimin_ratio_with(g, u, p, supports, &SolverOptions::default())
}

/// Largest ratio `E_S(u) / E_S(h)` over the supports, where `h` is the
/// p-harmonic function on `S` with the values of `u` on the outer boundary
/// of `S`. Ratios are 1 for `0/0` and infinite when only `E_S(h)` vanishes.
pub fn quasimin_ratio_with(
    g: &MetricGraph,
    u: &GraphFunction,
    p: f64,
    supports: &[Vec<usize>],
    opts: &SolverOptions,
) -> Result<QuasiminReport> {
    check_exponent(p)?;
    u.check_len(g)?;
    if supports.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut ratios = Vec::with_capacity(supports.len());
    for support in supports {
        let mut s = support.clone();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(Error::DegenerateSupport("empty support".into()));
        }
        for &v in &s {
            g.check_vertex(v)?;
        }
        let mut local: BTreeMap<usize, usize> = s.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges: Vec<usize> = s.iter().flat_map(|&v| g.neighbors(v).iter().map(|&(_, e)| e)).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut outer = Vec::new();
        for &e in &edges {
            for w in [g.edge(e).a, g.edge(e).b] {
                if let std::collections::btree_map::Entry::Vacant(slot) = local.entry(w) {
                    slot.insert(s.len() + outer.len());
                    outer.push(w);
                }
            }
        }
        if outer.is_empty() {
            return Err(Error::DegenerateSupport(format!(
                "support {s:?} has no outer boundary"
            )));
        }
        let sub = MetricGraph::new(
            s.len() + outer.len(),
            edges
                .iter()
                .map(|&e| {
                    let edge = g.edge(e);
                    Edge::new(local[&edge.a], local[&edge.b], edge.length, edge.density)
                })
                .collect(),
        )?;
        let boundary = BoundaryData::from_pairs(outer.iter().enumerate().map(|(i, &w)| (s.len() + i, u.value(w))));
        let h = match solve_dirichlet(&sub, p, &boundary, opts) {
            Ok(report) => report,
            Err(Error::NoBoundary(v)) => {
                let vertex = if v < s.len() { s[v] } else { outer[v - s.len()] };
                return Err(Error::DegenerateSupport(format!(
                    "vertex {vertex} of support {s:?} is cut off from its outer boundary"
                )));
            }
            Err(e) => return Err(e),
        };
        let energy = edges_energy(g, &edges, |v| u.value(v), p);
        let replacement_energy = h.energy;
        let ratio = match (energy > 0.0, replacement_energy > 0.0) {
            (_, true) => Extended::Finite(energy / replacement_energy),
            (true, false) => Extended::Infinite,
            (false, false) => Extended::Finite(1.0),
        };
        ratios.push(SupportRatio {
            support: s,
            energy,
            replacement_energy,
            ratio,
        });
    }
    let mut worst = 0;
    for (i, r) in ratios.iter().enumerate() {
        if r.ratio.to_f64() > ratios[worst].ratio.to_f64() {
            worst = i;
        }
    }
    Ok(QuasiminReport {
        q_estimate: ratios[worst].ratio,
        worst,
        ratios,
    })
}

/// Vertex sets of the balls `B(v, r)` around admissible centers, restricted
/// to admissible vertices and deduplicated, in order of first appearance.
pub fn ball_supports(space: &Space, radii: &[f64], admissible: impl Fn(usize) -> bool) -> Result<Vec<Vec<usize>>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for v in (0..space.graph().num_vertices()).filter(|&v| admissible(v)) {
        for &r in radii {
            let set: Vec<usize> = space
                .ball(&Point::Vertex(v), r)?
                .vertices
                .into_iter()
                .filter(|&w| admissible(w))
                .collect();
            if !set.is_empty() && seen.insert(set.clone()) {
                out.push(set);
            }
        }
    }
    Ok(out)
}

/// Every nonempty subset of at most 12 vertices, in binary counting order.
pub fn exhaustive_supports(vertices: &[usize]) -> Result<Vec<Vec<usize>>> {
    if vertices.len() > 12 {
        return Err(Error::param(format!(
            "exhaustive supports need at most 12 vertices, got {}",
            vertices.len()
        )));
    }
    Ok((1u32..1 << vertices.len())
        .map(|mask| {
            vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakMaxReport {
    pub holds: bool,
    pub region_max: f64,
    /// `-inf` when the region has no outer boundary.
    pub boundary_max: f64,
    /// A region vertex exceeding every boundary value.
    pub witness: Option<usize>,
}

/// Checks `max_region u <= max_{boundary} u` within `1e-12` (relative to
/// `max(1, |u|)`), the boundary being the vertices outside the region
/// adjacent to it. A region without boundary passes iff `u` is constant on
/// it.
pub fn weak_max_check(g: &MetricGraph, u: &GraphFunction, region: &[usize]) -> Result<WeakMaxReport> {
    u.check_len(g)?;
    let mut inside = vec![false; g.num_vertices()];
    for &v in region {
        g.check_vertex(v)?;
        inside[v] = true;
    }
    let mut region_max = f64::NEG_INFINITY;
    let mut region_min = f64::INFINITY;
    let mut argmax = None;
    let mut boundary_max = f64::NEG_INFINITY;
    for &v in region {
        let x = u.value(v);
        if x > region_max {
            region_max = x;
            argmax = Some(v);
        }
        region_min = region_min.min(x);
        for &(w, _) in g.neighbors(v) {
            if !inside[w] {
                boundary_max = boundary_max.max(u.value(w));
            }
        }
    }
    let scale = region_max.abs().max(boundary_max.abs()).max(1.0);
    let slack = 1e-12 * if boundary_max.is_finite() { scale } else { region_max.abs().max(1.0) };
    let holds = if boundary_max.is_finite() {
        region_max <= boundary_max + slack
    } else {
        region_max - region_min <= slack
    };
    Ok(WeakMaxReport {
        holds,
        region_max,
        boundary_max,
        witness: if holds { None } else { argmax },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateCheck {
    pub constant: EmpiricalConstant,
    pub radius: f64,
    /// Oscillation over the ball `B`.
    pub oscillation: f64,
    pub mass: f64,
    /// Energy over the comparison ball: `2 lambda B` for the oscillation
    /// estimate, `B/2` for the Caccioppoli estimate.
    pub energy: f64,
}

/// `C = osc_B u mu(B)^{1/p} / (r (int_{2 lambda B} g_u^p)^{1/p})`, with `0/0`
/// reported as 0.
pub fn oscillation_estimate_check(space: &Space, u: &GraphFunction, ball: &Ball, lambda: f64, p: f64) -> Result<EstimateCheck> {
    check_exponent(p)?;
    u.check_len(space.graph())?;
    if !(lambda >= 1.0) {
        return Err(Error::param(format!("dilation {lambda} must be >= 1")));
    }
    let g = space.graph();
    let b = space.ball(&ball.center, ball.radius)?;
    let wide = space.ball(&ball.center, 2.0 * lambda * ball.radius)?;
    let oscillation = b.oscillation(g, u);
    let mass = b.mass(g);
    let energy = wide.energy(g, u, p);
    let constant = match EmpiricalConstant::ratio(
        oscillation * mass.powf(1.0 / p),
        ball.radius * energy.powf(1.0 / p),
    ) {
        EmpiricalConstant::Indeterminate => EmpiricalConstant::Finite(0.0),
        c => c,
    };
    Ok(EstimateCheck {
        constant,
        radius: ball.radius,
        oscillation,
        mass,
        energy,
    })
}

/// `C = (int_{B/2} g_u^p)^{1/p} r / (mu(B)^{1/p} osc_B u)`; constant `u`
/// gives [`EmpiricalConstant::Indeterminate`].
pub fn caccioppoli_check(space: &Space, u: &GraphFunction, ball: &Ball, p: f64) -> Result<EstimateCheck> {
    check_exponent(p)?;
    u.check_len(space.graph())?;
    let g = space.graph();
    let b = space.ball(&ball.center, ball.radius)?;
    let half = space.ball(&ball.center, ball.radius / 2.0)?;
    let oscillation = b.oscillation(g, u);
    let mass = b.mass(g);
    let energy = half.energy(g, u, p);
    Ok(EstimateCheck {
        constant: EmpiricalConstant::ratio(energy.powf(1.0 / p) * ball.radius, mass.powf(1.0 / p) * oscillation),
        radius: ball.radius,
        oscillation,
        mass,
        energy,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthOptions {
    /// Lower mass exponent; enables the energy lower-bound checks.
    pub alpha: Option<f64>,
    /// Annulus dilation; enables the decay exponent `beta`.
    pub big_lambda: Option<f64>,
    /// Poincare dilation.
    pub lambda: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions {
            alpha: None,
            big_lambda: None,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCheck {
    pub alpha: f64,
    /// `I(r) r^{p - alpha}` per radius.
    pub normalized_energy: Vec<f64>,
    /// Least-squares slope of `log(I(r) r^{p - alpha})` over the top half of
    /// the radii.
    pub top_half_slope: Option<f64>,
    /// All top-half values are positive and their fitted slope is at least
    /// `-0.1`.
    pub bounded_below: bool,
    /// `osc(r)^p / (r^{p - alpha} I(2 lambda r))` per radius.
    pub oscillation_ratios: Vec<EmpiricalConstant>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaCheck {
    pub big_lambda: f64,
    /// `(I(r/2) / (I(2 Lambda r) - I(r / (2 Lambda))))^{1/p}` per radius.
    pub annulus_constants: Vec<EmpiricalConstant>,
    /// Largest finite annulus constant.
    pub constant: Option<f64>,
    /// `log(1 + C^{-p}) / log(4 Lambda^2)`.
    pub beta: Option<f64>,
    /// `(I(r)/I(R)) / (r/R)^beta` against the largest radius `R`.
    pub normalized_decay: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    pub energies: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// Oscillation-estimate constants of `B(x0, r)`.
    pub oscillation_constants: Vec<EmpiricalConstant>,
    pub caccioppoli_constants: Vec<EmpiricalConstant>,
    /// Log-log slopes over all radii; `None` when some value vanishes.
    pub energy_exponent: Option<f64>,
    pub oscillation_exponent: Option<f64>,
    /// Slope of `log I` over the top half of the radii ("large r").
    pub energy_exponent_top_half: Option<f64>,
    pub monotone: bool,
    /// `u` is constant on the largest ball.
    pub degenerate: bool,
    pub alpha_check: Option<AlphaCheck>,
    pub beta_check: Option<BetaCheck>,
}

fn log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Some(least_squares(&lx, &ly).0)
}

/// Energy `I(r)` and oscillation of `u` on `B(x0, r)` across the radii,
/// with fitted exponents and, when requested, the alpha and beta checks.
/// "Large r" is the top half of the radii.
pub fn growth_report(
    space: &Space,
    u: &GraphFunction,
    x0: &Point,
    radii: &[f64],
    p: f64,
    opts: &GrowthOptions,
) -> Result<GrowthReport> {
    check_exponent(p)?;
    check_radii(radii, 3)?;
    let g = space.graph();
    u.check_len(g)?;
    let energy_at = |r: f64| -> Result<f64> { Ok(space.ball(x0, r)?.energy(g, u, p)) };
    let mut energies = Vec::with_capacity(radii.len());
    let mut oscillations = Vec::with_capacity(radii.len());
    let mut oscillation_constants = Vec::with_capacity(radii.len());
    let mut caccioppoli_constants = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = space.ball(x0, r)?;
        energies.push(ball.energy(g, u, p));
        oscillations.push(ball.oscillation(g, u));
        let b = Ball { center: *x0, radius: r };
        oscillation_constants.push(oscillation_estimate_check(space, u, &b, opts.lambda, p)?.constant);
        caccioppoli_constants.push(caccioppoli_check(space, u, &b, p)?.constant);
    }
    let monotone = energies.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12))
        && oscillations.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12));
    let degenerate = oscillations.last().is_some_and(|&o| o == 0.0);
    let top = radii.len() / 2;

    let alpha_check = match opts.alpha {
        None => None,
        Some(alpha) => {
            let normalized_energy: Vec<f64> =
                radii.iter().zip(&energies).map(|(r, i)| i * r.powf(p - alpha)).collect();
            let top_half_slope = log_slope(&radii[top..], &normalized_energy[top..]);
            let bounded_below = top_half_slope.is_some_and(|s| s >= -0.1);
            let mut oscillation_ratios = Vec::with_capacity(radii.len());
            for (&r, &osc) in radii.iter().zip(&oscillations) {
                let wide = energy_at(2.0 * opts.lambda * r)?;
                oscillation_ratios.push(EmpiricalConstant::ratio(osc.powf(p), r.powf(p - alpha) * wide));
            }
            Some(AlphaCheck {
                alpha,
                normalized_energy,
                top_half_slope,
                bounded_below,
                oscillation_ratios,
            })
        }
    };

    let beta_check = match opts.big_lambda {
        None => None,
        Some(big) if !(big >= 1.0) => return Err(Error::param(format!("annulus dilation {big} must be >= 1"))),
        Some(big) => {
            let mut annulus_constants = Vec::with_capacity(radii.len());
            for &r in radii {
                let inner = energy_at(r / 2.0)?;
                let annulus = energy_at(2.0 * big * r)? - energy_at(r / (2.0 * big))?;
                annulus_constants.push(match EmpiricalConstant::ratio(inner, annulus.max(0.0)) {
                    EmpiricalConstant::Finite(c) => EmpiricalConstant::Finite(c.powf(1.0 / p)),
                    other => other,
                });
            }
            let constant = annulus_constants
                .iter()
                .filter_map(|c| c.finite())
                .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
            let beta = constant.map(|c| (1.0 + c.powf(-p)).ln() / (4.0 * big * big).ln());
            let (big_r, big_i) = (radii[radii.len() - 1], energies[energies.len() - 1]);
            let normalized_decay = radii
                .iter()
                .zip(&energies)
                .map(|(&r, &i)| match beta {
                    Some(b) if big_i > 0.0 && big > 1.0 => Some(i / big_i / (r / big_r).powf(b)),
                    _ => None,
                })
                .collect();
            Some(BetaCheck {
                big_lambda: big,
                annulus_constants,
                constant,
                beta,
                normalized_decay,
            })
        }
    };

    Ok(GrowthReport {
        energy_exponent: log_slope(radii, &energies),
        oscillation_exponent: log_slope(radii, &oscillations),
        energy_exponent_top_half: log_slope(&radii[top..], &energies[top..]),
        radii: radii.to_vec(),
        energies,
        oscillations,
        oscillation_constants,
        caccioppoli_constants,
        monotone,
        degenerate,
        alpha_check,
        beta_check,
    })
}

/// Plot-ready CSV with columns `r,I,osc,C_osc,C_caccioppoli`.
pub fn growth_csv(report: &GrowthReport) -> String {
    let mut out = String::from("r,I,osc,C_osc,C_caccioppoli\n");
    for i in 0..report.radii.len() {
        writeln!(
            out,
            "{:?},{:?},{:?},{},{}",
            report.radii[i],
            report.energies[i],
            report.oscillations[i],
            report.oscillation_constants[i],
            report.caccioppoli_constants[i]
        )
        .expect("writing to a String cannot fail");
    }
    out
}
