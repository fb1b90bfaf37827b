//! Metric-measure audits on metric graphs.
//!
//! Balls are open, `B(x, r) = {z : d(x, z) < r}` in the shortest-path metric,
//! and may cut edges; a cut edge contributes the measure of its covered part.

mod chain;
mod paths;

use serde::{Deserialize, Serialize};

pub use chain::{
    annular_chain, chainability_audit, audit_csv, AnnulusParams, AuditOptions, AuditRow, ChainOfBalls,
    ChainOutcome, ChainValidation,
};
pub(crate) use paths::{Csr, Dijkstra};

use crate::metric_graph::{abs_pow, sum, GraphFunction, MetricGraph};
use crate::{Error, Extended, Result};

/// A point of a metric graph: a vertex, or the point at distance `t` from
/// the first endpoint of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Point {
    Vertex(usize),
    OnEdge { edge: usize, t: f64 },
}

impl Point {
    fn validate(&self, g: &MetricGraph) -> Result<()> {
        match *self {
            Point::Vertex(v) if v < g.num_vertices() => Ok(()),
            Point::Vertex(v) => Err(Error::UnknownCenter(format!("vertex {v}"))),
            Point::OnEdge { edge, t } => match g.edges().get(edge) {
                Some(e) if t >= 0.0 && t <= e.length => Ok(()),
                Some(e) => Err(Error::UnknownCenter(format!(
                    "offset {t} outside edge {edge} of length {}",
                    e.length
                ))),
                None => Err(Error::UnknownCenter(format!("edge {edge}"))),
            },
        }
    }

    /// Shortest-path sources with their initial distances.
    fn seeds(&self, g: &MetricGraph) -> Vec<(usize, f64)> {
        match *self {
            Point::Vertex(v) => vec![(v, 0.0)],
            Point::OnEdge { edge, t } => {
                let e = g.edge(edge);
                vec![(e.a, t), (e.b, e.length - t)]
            }
        }
    }
}

/// A graph prepared for repeated metric queries.
#[derive(Debug, Clone)]
pub struct Space<'g> {
    graph: &'g MetricGraph,
    csr: Csr,
}

/// The part of a graph covered by an open ball: vertex list plus covered
/// sub-intervals `(edge, lo, hi)` in edge coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCover {
    pub vertices: Vec<usize>,
    pub pieces: Vec<(usize, f64, f64)>,
}

impl<'g> Space<'g> {
    pub fn new(graph: &'g MetricGraph) -> Self {
        Space {
            graph,
            csr: Csr::from_graph(graph),
        }
    }

    pub fn graph(&self) -> &'g MetricGraph {
        self.graph
    }

    /// Distances from `center` to every vertex closer than `cutoff`.
    pub(crate) fn distances(&self, center: &Point, cutoff: f64, work: &mut Dijkstra) -> Result<()> {
        center.validate(self.graph)?;
        work.run(&self.csr, &center.seeds(self.graph), cutoff);
        Ok(())
    }

    pub fn ball(&self, center: &Point, r: f64) -> Result<BallCover> {
        if !(r > 0.0) {
            return Err(Error::ZeroRadius);
        }
        let g = self.graph;
        let mut work = Dijkstra::new(g.num_vertices());
        self.distances(center, r, &mut work)?;
        let mut vertices = work.settled().to_vec();
        vertices.sort_unstable();
        let mut edges: Vec<usize> = vertices
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().map(|&(_, e)| e))
            .collect();
        if let Point::OnEdge { edge, .. } = center {
            edges.push(*edge);
        }
        edges.sort_unstable();
        edges.dedup();

        let mut pieces = Vec::new();
        for e in edges {
            let edge = g.edge(e);
            let l = edge.length;
            let mut parts: Vec<(f64, f64)> = Vec::with_capacity(3);
            let (da, db) = (work.dist(edge.a), work.dist(edge.b));
            if da < r {
                parts.push((0.0, (r - da).min(l)));
            }
            if db < r {
                parts.push(((l - (r - db)).max(0.0), l));
            }
            if let Point::OnEdge { edge: ce, t } = *center {
                if ce == e {
                    parts.push(((t - r).max(0.0), (t + r).min(l)));
                }
            }
            parts.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
            for (lo, hi) in parts {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => merged.push((lo, hi)),
                }
            }
            pieces.extend(merged.into_iter().filter(|(lo, hi)| hi > lo).map(|(lo, hi)| (e, lo, hi)));
        }
        Ok(BallCover { vertices, pieces })
    }

    pub fn ball_mass(&self, center: &Point, r: f64) -> Result<f64> {
        Ok(self.ball(center, r)?.mass(self.graph))
    }
}

impl BallCover {
    pub fn mass(&self, g: &MetricGraph) -> f64 {
        sum(self.pieces.iter().map(|&(e, lo, hi)| g.edge(e).density * (hi - lo)))
    }

    /// `int_B g_u^p dmu`; the gradient is constant along each edge.
    pub fn energy(&self, g: &MetricGraph, u: &GraphFunction, p: f64) -> f64 {
        sum(self.pieces.iter().map(|&(e, lo, hi)| {
            let edge = g.edge(e);
            let slope = (u.value(edge.b) - u.value(edge.a)) / edge.length;
            edge.density * abs_pow(slope, p) * (hi - lo)
        }))
    }

    /// `(inf, sup)` of the edgewise-linear extension of `u` over the ball.
    /// `None` for a ball that covers no edge and no vertex.
    pub fn range(&self, g: &MetricGraph, u: &GraphFunction) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut add = |x: f64| {
            lo = lo.min(x);
            hi = hi.max(x);
        };
        for &v in &self.vertices {
            add(u.value(v));
        }
        for &(e, s, t) in &self.pieces {
            let edge = g.edge(e);
            let (ua, ub) = (u.value(edge.a), u.value(edge.b));
            for x in [s, t] {
                add(ua + (ub - ua) * (x / edge.length));
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn oscillation(&self, g: &MetricGraph, u: &GraphFunction) -> f64 {
        self.range(g, u).map_or(0.0, |(lo, hi)| hi - lo)
    }
}

/// `mu(B(center, r))`, counting cut edges linearly.
pub fn ball_mass(g: &MetricGraph, center: &Point, r: f64) -> Result<f64> {
    Space::new(g).ball_mass(center, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Stable,
}

/// Relative change between the smallest- and largest-radius values below
/// which a sequence counts as stable.
const TREND_BAND: f64 = 0.05;

fn trend(first: f64, last: f64) -> Trend {
    if last > first * (1.0 + TREND_BAND) {
        Trend::Increasing
    } else if last < first * (1.0 - TREND_BAND) {
        Trend::Decreasing
    } else {
        Trend::Stable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingRow {
    pub ball: Ball,
    pub mass: f64,
    pub double_mass: f64,
    pub ratio: Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub max_ratio: Extended,
    pub rows: Vec<DoublingRow>,
    /// Ratio at the largest radius against the smallest.
    pub trend: Trend,
}

/// `sup mu(2B) / mu(B)` over the family.
pub fn doubling_report(space: &Space, family: &[Ball]) -> Result<DoublingReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut rows = Vec::with_capacity(family.len());
    for ball in family {
        let mass = space.ball_mass(&ball.center, ball.radius)?;
        let double_mass = space.ball_mass(&ball.center, 2.0 * ball.radius)?;
        let ratio = if mass > 0.0 {
            Extended::Finite(double_mass / mass)
        } else if double_mass == 0.0 {
            Extended::Finite(1.0)
        } else {
            Extended::Infinite
        };
        rows.push(DoublingRow {
            ball: *ball,
            mass,
            double_mass,
            ratio,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(Extended::Finite(0.0), Extended::max);
    let mut by_radius: Vec<&DoublingRow> = rows.iter().collect();
    by_radius.sort_by(|a, b| a.ball.radius.total_cmp(&b.ball.radius));
    let first = by_radius[0].ratio.to_f64();
    let last = by_radius[by_radius.len() - 1].ratio.to_f64();
    Ok(DoublingReport {
        max_ratio,
        rows,
        trend: trend(first, last),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthExponents {
    /// Smallest and largest slope between consecutive radii.
    pub sigma: f64,
    pub s: f64,
    /// Least-squares slopes over the full range and over its upper half.
    pub alpha_candidates: Vec<f64>,
    /// `R^2` of the full-range fit.
    pub fit_quality: f64,
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    pub two_point_slopes: Vec<f64>,
    /// Consecutive slopes never decrease and the last is at least 1.5 times
    /// the first: growth faster than any fixed power on this range.
    pub superpolynomial: bool,
}

pub(crate) fn check_radii(radii: &[f64], needed: usize) -> Result<()> {
    let ok = radii.len() >= needed
        && radii[0] > 0.0
        && radii.iter().all(|r| r.is_finite())
        && radii.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InsufficientRadii {
            needed,
            got: radii.len(),
        })
    }
}

/// Ordinary least squares `y = a + b x`, returning `(b, R^2)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (b, r2)
}

/// Log-log fit of `r -> mu(B(x0, r))`.
pub fn volume_growth_fit(space: &Space, x0: &Point, radii: &[f64]) -> Result<GrowthExponents> {
    check_radii(radii, 4)?;
    let mut masses = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = space.ball_mass(x0, r)?;
        if !(m > 0.0) {
            return Err(Error::DegenerateSupport(format!("ball of radius {r} has zero mass")));
        }
        masses.push(m);
    }
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let two_point_slopes: Vec<f64> = (1..radii.len())
        .map(|i| (ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]))
        .collect();
    let sigma = two_point_slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let s = two_point_slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (alpha, fit_quality) = least_squares(&lx, &ly);
    let half = radii.len() / 2;
    let (alpha_top, _) = least_squares(&lx[half..], &ly[half..]);
    let first = two_point_slopes[0];
    let last = two_point_slopes[two_point_slopes.len() - 1];
    let superpolynomial =
        two_point_slopes.windows(2).all(|w| w[1] >= w[0] - 1e-9) && last >= 1.5 * first && last > 0.0;
    Ok(GrowthExponents {
        sigma,
        s,
        alpha_candidates: vec![alpha, if alpha_top.is_finite() { alpha_top } else { alpha }],
        fit_quality,
        radii: radii.to_vec(),
        masses,
        two_point_slopes,
        superpolynomial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::{build_binary_tree, grid_graph, path_graph, Edge};

    #[test]
    fn ball_mass_examples() {
        let path = path_graph(10).unwrap();
        let o = Point::Vertex(path.origin);
        assert_eq!(ball_mass(&path.graph, &o, 1.0).unwrap(), 2.0);
        assert_eq!(ball_mass(&path.graph, &o, 0.5).unwrap(), 1.0);
        assert_eq!(ball_mass(&path.graph, &o, 2.5).unwrap(), 5.0);
        let tree = build_binary_tree(4).unwrap();
        assert_eq!(ball_mass(tree.graph(), &Point::Vertex(tree.root()), 1.0).unwrap(), 2.0);
        assert!(matches!(ball_mass(&path.graph, &Point::Vertex(99), 1.0), Err(Error::UnknownCenter(_))));
        assert!(matches!(ball_mass(&path.graph, &o, 0.0), Err(Error::ZeroRadius)));
    }

    #[test]
    fn edge_centers_and_cycles() {
        // Triangle with unit edges; center in the middle of edge 0.
        let g = MetricGraph::new(
            3,
            vec![Edge::new(0, 1, 1.0, 1.0), Edge::new(1, 2, 1.0, 2.0), Edge::new(2, 0, 1.0, 1.0)],
        )
        .unwrap();
        let c = Point::OnEdge { edge: 0, t: 0.5 };
        assert_eq!(ball_mass(&g, &c, 0.25).unwrap(), 0.5);
        // Vertices 0 and 1 sit at distance 1/2, vertex 2 at 3/2. Edge 1 has
        // density 2 and is entered from vertex 1, edge 2 from vertex 0.
        assert_eq!(ball_mass(&g, &c, 0.75).unwrap(), 1.0 + 2.0 * 0.25 + 0.25);
        assert_eq!(ball_mass(&g, &c, 1.0).unwrap(), 1.0 + 2.0 * 0.5 + 0.5);
        assert_eq!(ball_mass(&g, &c, 2.0).unwrap(), 4.0);
        assert!(matches!(
            ball_mass(&g, &Point::OnEdge { edge: 0, t: 2.0 }, 1.0),
            Err(Error::UnknownCenter(_))
        ));
    }

    #[test]
    fn grid_ball_mass_counts_lattice_edges() {
        let grid = grid_graph(12).unwrap();
        let space = Space::new(&grid.graph);
        let o = Point::Vertex(grid.origin);
        for r in [1.0, 2.0, 5.0, 10.0] {
            // Every vertex at l1 distance k < r contributes its full
            // outgoing edges; a direct count of covered edge length.
            let mut oracle = 0.0;
            for x in -12i32..=12 {
                for y in -12i32..=12 {
                    for (dx, dy) in [(1, 0), (0, 1)] {
                        let (x2, y2) = (x + dx, y + dy);
                        if x2.abs() > 12 || y2.abs() > 12 {
                            continue;
                        }
                        let da = (x.abs() + y.abs()) as f64;
                        let db = (x2.abs() + y2.abs()) as f64;
                        let cover = (r - da).max(0.0) + (r - db).max(0.0);
                        oracle += cover.min(1.0);
                    }
                }
            }
            assert_eq!(space.ball_mass(&o, r).unwrap(), oracle, "r={r}");
            assert_eq!(oracle, 4.0 * r * r);
        }
    }

    #[test]
    fn range_uses_the_closure() {
        let path = path_graph(5).unwrap();
        let space = Space::new(&path.graph);
        let u = path.function(|x, _| x);
        let b = space.ball(&Point::Vertex(path.origin), 2.5).unwrap();
        assert_eq!(b.range(&path.graph, &u), Some((-2.5, 2.5)));
        assert_eq!(b.energy(&path.graph, &u, 3.0), 5.0);
    }

    #[test]
    fn doubling_examples() {
        let path = path_graph(40).unwrap();
        let space = Space::new(&path.graph);
        let fam: Vec<Ball> = [1.0, 3.0, 7.5]
            .iter()
            .map(|&radius| Ball {
                center: Point::Vertex(path.origin + 3),
                radius,
            })
            .collect();
        let rep = doubling_report(&space, &fam).unwrap();
        assert!(rep.max_ratio.to_f64() <= 2.0 + 1e-12);

        let small = path_graph(2).unwrap();
        let s = Space::new(&small.graph);
        let whole = Ball {
            center: Point::Vertex(small.origin),
            radius: 10.0,
        };
        assert_eq!(doubling_report(&s, &[whole]).unwrap().max_ratio, Extended::Finite(1.0));
        assert!(matches!(doubling_report(&s, &[]), Err(Error::EmptyFamily)));
    }

    #[test]
    fn growth_fits() {
        let radii = [2.0, 4.0, 8.0, 16.0];
        let path = path_graph(40).unwrap();
        let fit = volume_growth_fit(&Space::new(&path.graph), &Point::Vertex(path.origin), &radii).unwrap();
        assert!((fit.alpha_candidates[0] - 1.0).abs() < 1e-12);
        assert!(!fit.superpolynomial);
        let grid = grid_graph(20).unwrap();
        let fit = volume_growth_fit(&Space::new(&grid.graph), &Point::Vertex(grid.origin), &radii).unwrap();
        assert!((fit.alpha_candidates[0] - 2.0).abs() < 1e-12);
        assert!(fit.sigma <= fit.s);
        let tree = build_binary_tree(16).unwrap();
        let fit = volume_growth_fit(&Space::new(tree.graph()), &Point::Vertex(tree.root()), &radii).unwrap();
        assert!(fit.superpolynomial, "{:?}", fit.two_point_slopes);
        assert!(volume_growth_fit(&Space::new(&path.graph), &Point::Vertex(0), &[1.0, 2.0, 3.0]).is_err());
    }
}
