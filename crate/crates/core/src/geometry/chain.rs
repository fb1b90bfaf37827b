//! Chains of balls in annuli and the sequential annular chainability audit.
//!
//! The annulus `A = {z : r/Lambda <= d(x0, z) <= Lambda r}` is sampled by the
//! vertices of a local refinement of the graph whose pieces are at most
//! `delta r / 2` long. A greedy `delta r`-separated net of the samples is
//! taken in order of `(d(x0, z), index)`; its doubled balls
//! `B(z, 2 delta r)` cover `A`. Two such balls meet iff their centers are
//! less than `4 delta r` apart, since graphs are length spaces. Chains are
//! shortest paths in this intersection graph.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use super::{Csr, Dijkstra, Point, Space};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusParams {
    pub r: f64,
    /// Annulus dilation `Lambda >= 1`.
    pub big_lambda: f64,
    /// Net scale; net points are `delta r` apart.
    pub delta: f64,
}

impl AnnulusParams {
    /// `delta = 1/(8 lambda Lambda)`, with `lambda` the Poincare dilation.
    pub fn with_default_delta(r: f64, big_lambda: f64, lambda: f64) -> Self {
        AnnulusParams {
            r,
            big_lambda,
            delta: 1.0 / (8.0 * lambda * big_lambda),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::ZeroRadius);
        }
        if !(self.big_lambda >= 1.0 && self.big_lambda.is_finite()) {
            return Err(Error::param(format!("annulus dilation {} must be >= 1", self.big_lambda)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param(format!("net scale {} must be positive", self.delta)));
        }
        Ok(())
    }

    fn inner(&self) -> f64 {
        self.r / self.big_lambda
    }

    fn outer(&self) -> f64 {
        self.r * self.big_lambda
    }

    fn sep(&self) -> f64 {
        self.delta * self.r
    }

    pub fn ball_radius(&self) -> f64 {
        2.0 * self.sep()
    }

    /// `tau = 1/(4 delta Lambda)`.
    pub fn tau(&self) -> f64 {
        1.0 / (4.0 * self.delta * self.big_lambda)
    }

    fn step(&self) -> f64 {
        self.sep() / 2.0
    }

    fn slack(&self) -> f64 {
        1e-12 * self.r
    }

    fn in_annulus(&self, d: f64) -> bool {
        d >= self.inner() - self.slack() && d <= self.outer() + self.slack()
    }
}

/// The graph restricted to a neighbourhood of `x0`, with long edges cut
/// into short pieces so that its vertices sample every edge finely.
struct Refinement {
    csr: Csr,
    points: Vec<Point>,
    d0: Vec<f64>,
    /// Refined node of each requested special point.
    specials: Vec<usize>,
}

fn refine(space: &Space, x0: &Point, extra: &[Point], cutoff: f64, step: f64) -> Result<Refinement> {
    let g = space.graph();
    let mut work = Dijkstra::new(g.num_vertices());
    space.distances(x0, cutoff, &mut work)?;
    for p in extra {
        p.validate(g)?;
    }
    let mut edges: Vec<usize> = work
        .settled()
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().map(|&(_, e)| e))
        .chain([x0].into_iter().chain(extra).filter_map(|p| match *p {
            Point::OnEdge { edge, .. } => Some(edge),
            Point::Vertex(_) => None,
        }))
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut vertex_ids: Vec<usize> = edges
        .iter()
        .flat_map(|&e| [g.edge(e).a, g.edge(e).b])
        .chain([x0].into_iter().chain(extra).filter_map(|p| match *p {
            Point::Vertex(v) => Some(v),
            Point::OnEdge { .. } => None,
        }))
        .collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    let node_of_vertex: BTreeMap<usize, usize> = vertex_ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut points: Vec<Point> = vertex_ids.iter().map(|&v| Point::Vertex(v)).collect();

    let mut segments = Vec::new();
    // Interior cut nodes of each edge, sorted by offset.
    let mut cuts: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
    for &e in &edges {
        let edge = g.edge(e);
        let l = edge.length;
        let m = (l / step).ceil().max(1.0) as usize;
        let mut offsets: Vec<f64> = (1..m).map(|k| l * k as f64 / m as f64).collect();
        for p in [x0].into_iter().chain(extra) {
            if let Point::OnEdge { edge: pe, t } = *p {
                if pe == e && t > 0.0 && t < l {
                    offsets.push(t);
                }
            }
        }
        offsets.sort_by(f64::total_cmp);
        offsets.dedup();
        let mut prev = (0.0, node_of_vertex[&edge.a]);
        let mut list = Vec::with_capacity(offsets.len());
        for t in offsets {
            let id = points.len();
            points.push(Point::OnEdge { edge: e, t });
            segments.push((prev.1, id, t - prev.0));
            list.push((t, id));
            prev = (t, id);
        }
        segments.push((prev.1, node_of_vertex[&edge.b], l - prev.0));
        cuts.insert(e, list);
    }

    let node_of = |p: &Point| -> usize {
        match *p {
            Point::Vertex(v) => node_of_vertex[&v],
            Point::OnEdge { edge, t } => {
                let e = g.edge(edge);
                if t == 0.0 {
                    node_of_vertex[&e.a]
                } else if t == e.length {
                    node_of_vertex[&e.b]
                } else {
                    let list = &cuts[&edge];
                    let i = list.partition_point(|&(s, _)| s < t);
                    list[i].1
                }
            }
        }
    };
    let origin = node_of(x0);
    let specials = extra.iter().map(node_of).collect();
    let csr = Csr::from_edges(points.len(), segments);
    let mut dj = Dijkstra::new(points.len());
    dj.run(&csr, &[(origin, 0.0)], f64::INFINITY);
    let d0 = (0..points.len()).map(|v| dj.dist(v)).collect();
    Ok(Refinement {
        csr,
        points,
        d0,
        specials,
    })
}

/// Net, ball intersection graph and ball memberships of tracked nodes.
struct Net {
    refined: Refinement,
    params: AnnulusParams,
    centers: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    /// For each tracked node, the balls containing it.
    containing: BTreeMap<usize, Vec<usize>>,
}

impl Net {
    fn build(space: &Space, x0: &Point, params: AnnulusParams, extra: &[Point], track_sphere: bool) -> Result<Net> {
        params.validate()?;
        let cutoff = params.outer() + 4.0 * params.sep();
        let refined = refine(space, x0, extra, cutoff, params.step())?;
        let n = refined.points.len();
        let mut candidates: Vec<usize> = (0..n).filter(|&v| params.in_annulus(refined.d0[v])).collect();
        if candidates.is_empty() {
            return Err(Error::EmptyAnnulus);
        }
        candidates.sort_by(|&a, &b| refined.d0[a].total_cmp(&refined.d0[b]).then(a.cmp(&b)));

        let sep = params.sep();
        let mut dj = Dijkstra::new(n);
        let mut nearest = vec![f64::INFINITY; n];
        let mut centers = Vec::new();
        for &c in &candidates {
            if nearest[c] >= sep {
                centers.push(c);
                dj.run(&refined.csr, &[(c, 0.0)], sep);
                for &v in dj.settled() {
                    nearest[v] = nearest[v].min(dj.dist(v));
                }
            }
        }

        let mut tracked: Vec<usize> = refined.specials.clone();
        if track_sphere {
            tracked.extend(sphere_nodes(&refined, &params));
        }
        let mut containing: BTreeMap<usize, Vec<usize>> = tracked.into_iter().map(|v| (v, Vec::new())).collect();
        let mut index_of = vec![usize::MAX; n];
        for (i, &c) in centers.iter().enumerate() {
            index_of[c] = i;
        }
        let ball = params.ball_radius();
        let mut adjacency = vec![Vec::new(); centers.len()];
        for (i, &c) in centers.iter().enumerate() {
            dj.run(&refined.csr, &[(c, 0.0)], 2.0 * ball);
            for &v in dj.settled() {
                let j = index_of[v];
                if j != usize::MAX && j != i {
                    adjacency[i].push(j);
                }
                if dj.dist(v) < ball {
                    if let Some(list) = containing.get_mut(&v) {
                        list.push(i);
                    }
                }
            }
            adjacency[i].sort_unstable();
        }
        Ok(Net {
            refined,
            params,
            centers,
            adjacency,
            containing,
        })
    }

    /// Breadth-first distances (in balls, minus one) from a set of balls,
    /// and the predecessor of each ball on a shortest path.
    fn bfs(&self, sources: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let m = self.centers.len();
        let mut dist = vec![usize::MAX; m];
        let mut pred = vec![usize::MAX; m];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == usize::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &self.adjacency[i] {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    pred[j] = i;
                    queue.push_back(j);
                }
            }
        }
        (dist, pred)
    }

    /// Shortest chain from a ball containing node `x` to one containing `y`.
    fn chain(&self, x: usize, y: usize) -> Option<Vec<usize>> {
        let (dist, pred) = self.bfs(&self.containing[&x]);
        let end = self.containing[&y]
            .iter()
            .copied()
            .filter(|&j| dist[j] != usize::MAX)
            .min_by_key(|&j| (dist[j], j))?;
        let mut path = vec![end];
        while dist[*path.last().expect("nonempty")] > 0 {
            path.push(pred[*path.last().expect("nonempty")]);
        }
        path.reverse();
        Some(path)
    }

    fn components(&self) -> Vec<usize> {
        let m = self.centers.len();
        let mut label = vec![usize::MAX; m];
        let mut next = 0;
        for s in 0..m {
            if label[s] == usize::MAX {
                let (dist, _) = self.bfs(&[s]);
                for (j, d) in dist.iter().enumerate() {
                    if *d != usize::MAX {
                        label[j] = next;
                    }
                }
                next += 1;
            }
        }
        label
    }

    fn validate(&self, path: &[usize], x: usize, y: usize) -> ChainValidation {
        let p = &self.params;
        let ball = p.ball_radius();
        let mut dj = Dijkstra::new(self.refined.points.len());
        let mut within = |a: usize, b: usize, bound: f64| {
            dj.run(&self.refined.csr, &[(a, 0.0)], bound);
            dj.dist(b) < bound
        };
        let nodes: Vec<usize> = path.iter().map(|&i| self.centers[i]).collect();
        let consecutive_intersect = nodes.windows(2).all(|w| within(w[0], w[1], 2.0 * ball));
        let endpoints_contained = within(nodes[0], x, ball) && within(nodes[nodes.len() - 1], y, ball);
        let d0 = &self.refined.d0;
        let centers_in_annulus = nodes.iter().all(|&c| p.in_annulus(d0[c]));
        // Radius of the tau-scaled balls, tau * 2 delta r = r / (2 Lambda).
        let rho = p.tau() * ball;
        let scaled_balls_in_annulus = nodes.iter().all(|&c| {
            d0[c] - rho >= p.r / (2.0 * p.big_lambda) - p.slack() && d0[c] + rho <= 2.0 * p.outer() + p.slack()
        });
        ChainValidation {
            consecutive_intersect,
            endpoints_contained,
            centers_in_annulus,
            scaled_balls_in_annulus,
            within_bound: path.len() <= self.centers.len(),
        }
    }

    fn chain_of_balls(&self, path: Vec<usize>, x: usize, y: usize) -> ChainOfBalls {
        let validation = self.validate(&path, x, y);
        ChainOfBalls {
            centers: path.iter().map(|&i| self.refined.points[self.centers[i]]).collect(),
            center_distances: path.iter().map(|&i| self.refined.d0[self.centers[i]]).collect(),
            radius: self.params.ball_radius(),
            x: self.refined.points[x],
            y: self.refined.points[y],
            params: self.params,
            length: path.len(),
            bound: self.centers.len(),
            validation,
        }
    }
}

/// Samples within one refinement step of the sphere `d(x0, z) = r`.
fn sphere_nodes(refined: &Refinement, params: &AnnulusParams) -> Vec<usize> {
    let h = params.step();
    (0..refined.points.len())
        .filter(|&v| (refined.d0[v] - params.r).abs() <= h && params.in_annulus(refined.d0[v]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainValidation {
    pub consecutive_intersect: bool,
    pub endpoints_contained: bool,
    pub centers_in_annulus: bool,
    /// The `tau`-scaled balls lie in `B(x0, 2 Lambda r) \ B(x0, r / (2 Lambda))`.
    pub scaled_balls_in_annulus: bool,
    /// Chain length at most the net size.
    pub within_bound: bool,
}

impl ChainValidation {
    pub fn is_valid(&self) -> bool {
        self.consecutive_intersect
            && self.endpoints_contained
            && self.centers_in_annulus
            && self.scaled_balls_in_annulus
            && self.within_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainOfBalls {
    pub centers: Vec<Point>,
    pub center_distances: Vec<f64>,
    /// Common radius `2 delta r`.
    pub radius: f64,
    pub x: Point,
    pub y: Point,
    pub params: AnnulusParams,
    pub length: usize,
    /// Net size; no chain is longer.
    pub bound: usize,
    pub validation: ChainValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum ChainOutcome {
    Chain(ChainOfBalls),
    /// The balls around `x` and `y` lie in different components of the
    /// intersection graph.
    Failure { net_size: usize },
}

impl ChainOutcome {
    pub fn chain(&self) -> Option<&ChainOfBalls> {
        match self {
            ChainOutcome::Chain(c) => Some(c),
            ChainOutcome::Failure { .. } => None,
        }
    }
}

/// A chain of `2 delta r`-balls centered in the annulus around `x0`, joining
/// `x` to `y`, or a failure when the intersection graph separates them.
pub fn annular_chain(space: &Space, x0: &Point, params: AnnulusParams, x: &Point, y: &Point) -> Result<ChainOutcome> {
    let net = Net::build(space, x0, params, &[*x, *y], false)?;
    let (xn, yn) = (net.refined.specials[0], net.refined.specials[1]);
    for (node, p) in [(xn, x), (yn, y)] {
        if !params.in_annulus(net.refined.d0[node]) {
            return Err(Error::OutsideAnnulus(format!("{p:?}")));
        }
    }
    Ok(match net.chain(xn, yn) {
        Some(path) => ChainOutcome::Chain(net.chain_of_balls(path, xn, yn)),
        None => ChainOutcome::Failure {
            net_size: net.centers.len(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditOptions {
    pub big_lambda: f64,
    /// Poincare dilation, entering the default `delta = 1/(8 lambda Lambda)`.
    pub lambda: f64,
    pub delta: Option<f64>,
    /// Sphere points used as chain sources when measuring `N_max`.
    pub max_sources: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            big_lambda: 2.0,
            lambda: 1.0,
            delta: None,
            max_sources: 64,
        }
    }
}

impl AuditOptions {
    pub fn params(&self, r: f64) -> AnnulusParams {
        let mut p = AnnulusParams::with_default_delta(r, self.big_lambda, self.lambda);
        if let Some(d) = self.delta {
            p.delta = d;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub r: f64,
    /// All sampled sphere points are joined by chains.
    pub chainable: bool,
    /// Longest shortest chain between a sampled source and any sphere point
    /// it can reach.
    pub n_max: usize,
    /// Net size.
    pub n0: usize,
    pub sphere_points: usize,
    pub pairs_tested: usize,
    /// `mu(B(x0, 2r)) / mu(B(x0, r))`.
    pub doubling_ratio: f64,
    pub mass: f64,
    /// The longest chain found passed every post-hoc check.
    pub chain_valid: bool,
}

/// Tests sequential annular chainability around `x0` at each radius.
///
/// Sphere points are the samples within one refinement step of `r`. Every
/// sphere point lies in some net ball, and balls containing a common point
/// intersect, so all pairs are chainable iff all sphere points fall in one
/// component of the intersection graph; this is checked for every sphere
/// point. `N_max` comes from breadth-first searches started at up to
/// `max_sources` evenly spaced sphere points.
pub fn chainability_audit(space: &Space, x0: &Point, radii: &[f64], opts: &AuditOptions) -> Result<Vec<AuditRow>> {
    if radii.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let params = opts.params(r);
        let net = Net::build(space, x0, params, &[], true)?;
        let sphere: Vec<usize> = net.containing.keys().copied().collect();
        let labels = net.components();
        let label_of = |v: usize| net.containing[&v].first().map(|&i| labels[i]);
        let first = sphere.first().and_then(|&v| label_of(v));
        let chainable = first.is_some() && sphere.iter().all(|&v| label_of(v) == first);

        let k = opts.max_sources.max(1).min(sphere.len());
        let sources: Vec<usize> = (0..k).map(|i| sphere[i * sphere.len() / k]).collect();
        let mut n_max = 0;
        let mut worst = None;
        let mut pairs_tested = 0;
        for &s in &sources {
            let (dist, _) = net.bfs(&net.containing[&s]);
            for &t in &sphere {
                let best = net.containing[&t].iter().map(|&j| dist[j]).min().unwrap_or(usize::MAX);
                if best != usize::MAX {
                    pairs_tested += 1;
                    if best + 1 > n_max {
                        n_max = best + 1;
                        worst = Some((s, t));
                    }
                }
            }
        }
        let chain_valid = match worst {
            Some((s, t)) => net
                .chain(s, t)
                .map(|path| net.chain_of_balls(path, s, t).validation.is_valid())
                .unwrap_or(false),
            None => false,
        };
        let mass = space.ball_mass(x0, r)?;
        let doubling_ratio = space.ball_mass(x0, 2.0 * r)? / mass;
        rows.push(AuditRow {
            r,
            chainable,
            n_max,
            n0: net.centers.len(),
            sphere_points: sphere.len(),
            pairs_tested,
            doubling_ratio,
            mass,
            chain_valid,
        });
    }
    Ok(rows)
}

/// CSV with columns `r,chainable,N_max,doubling_ratio,mass,N0`.
pub fn audit_csv(rows: &[AuditRow]) -> String {
    let mut out = String::from("r,chainable,N_max,doubling_ratio,mass,N0\n");
    for row in rows {
        writeln!(
            out,
            "{:?},{},{},{:?},{:?},{}",
            row.r, row.chainable, row.n_max, row.doubling_ratio, row.mass, row.n0
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::{grid_graph, path_graph};

    #[test]
    fn grid_chain_between_opposite_sphere_points() {
        let grid = grid_graph(20).unwrap();
        let space = Space::new(&grid.graph);
        let o = Point::Vertex(grid.origin);
        let params = AnnulusParams::with_default_delta(8.0, 2.0, 1.0);
        assert_eq!(params.delta, 1.0 / 16.0);
        let x = Point::Vertex(grid.find(8.0, 0.0).unwrap());
        let y = Point::Vertex(grid.find(-8.0, 0.0).unwrap());
        let out = annular_chain(&space, &o, params, &x, &y).unwrap();
        let chain = out.chain().expect("grid annuli are connected");
        assert!(chain.validation.is_valid(), "{:?}", chain.validation);
        assert!(chain.length <= chain.bound);
        assert!(chain.length > 1);

        let same = annular_chain(&space, &o, params, &x, &x).unwrap();
        assert_eq!(same.chain().unwrap().length, 1);

        let inside = Point::Vertex(grid.origin);
        assert!(matches!(
            annular_chain(&space, &o, params, &inside, &x),
            Err(Error::OutsideAnnulus(_))
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn net_is_separated_and_covers_the_annulus(r in 2.0f64..12.0, strip in proptest::bool::ANY) {
            let g = if strip { crate::metric_graph::build_strip_graph(20, 3).unwrap() } else { grid_graph(16).unwrap() };
            let space = Space::new(&g.graph);
            let o = Point::Vertex(g.origin);
            let params = AnnulusParams::with_default_delta(r, 2.0, 1.0);
            let net = match Net::build(&space, &o, params, &[], false) {
                Ok(net) => net,
                Err(Error::EmptyAnnulus) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let (sep, ball) = (params.sep(), params.ball_radius());
            let n = net.refined.points.len();
            let mut dj = Dijkstra::new(n);
            let mut nearest = vec![f64::INFINITY; n];
            for &c in &net.centers {
                dj.run(&net.refined.csr, &[(c, 0.0)], ball);
                for &v in dj.settled() {
                    nearest[v] = nearest[v].min(dj.dist(v));
                    if v != c && net.centers.contains(&v) {
                        proptest::prop_assert!(dj.dist(v) >= sep - 1e-12, "centers {c} and {v} too close");
                    }
                }
            }
            for v in (0..n).filter(|&v| params.in_annulus(net.refined.d0[v])) {
                proptest::prop_assert!(nearest[v] < ball, "node {v} uncovered");
            }
        }
    }

    #[test]
    fn edge_points_are_sampled() {
        let path = path_graph(30).unwrap();
        let space = Space::new(&path.graph);
        let o = Point::Vertex(path.origin);
        let params = AnnulusParams::with_default_delta(4.0, 2.0, 1.0);
        // Between vertices 33 and 34, i.e. at x = 3.5.
        let x = Point::OnEdge { edge: 33, t: 0.5 };
        let y = Point::Vertex(path.origin + 5);
        let chain = annular_chain(&space, &o, params, &x, &y).unwrap();
        let chain = chain.chain().unwrap();
        assert!(chain.validation.is_valid());
        assert_eq!(chain.x, x);
    }

    #[test]
    fn path_fails_across_the_center() {
        let path = path_graph(40).unwrap();
        let space = Space::new(&path.graph);
        let o = Point::Vertex(path.origin);
        let params = AnnulusParams::with_default_delta(8.0, 2.0, 1.0);
        let x = Point::Vertex(path.origin - 8);
        let y = Point::Vertex(path.origin + 8);
        assert!(matches!(
            annular_chain(&space, &o, params, &x, &y).unwrap(),
            ChainOutcome::Failure { .. }
        ));
    }

    #[test]
    fn empty_annulus() {
        let path = path_graph(2).unwrap();
        let space = Space::new(&path.graph);
        let params = AnnulusParams::with_default_delta(20.0, 2.0, 1.0);
        let o = Point::Vertex(path.origin);
        assert!(matches!(
            annular_chain(&space, &o, params, &o, &o),
            Err(Error::EmptyAnnulus)
        ));
    }

    #[test]
    fn audits() {
        let grid = grid_graph(40).unwrap();
        let space = Space::new(&grid.graph);
        let rows = chainability_audit(&space, &Point::Vertex(grid.origin), &[4.0, 8.0, 16.0], &AuditOptions::default())
            .unwrap();
        for row in &rows {
            assert!(row.chainable && row.chain_valid, "{row:?}");
            assert!(row.n_max <= row.n0);
        }
        let path = path_graph(80).unwrap();
        let space = Space::new(&path.graph);
        let rows = chainability_audit(&space, &Point::Vertex(path.origin), &[4.0, 8.0, 16.0], &AuditOptions::default())
            .unwrap();
        assert!(rows.iter().all(|r| !r.chainable));
        let csv = audit_csv(&rows);
        assert!(csv.starts_with("r,chainable,N_max,doubling_ratio,mass"));
        assert_eq!(csv.lines().count(), 4);
    }
}
