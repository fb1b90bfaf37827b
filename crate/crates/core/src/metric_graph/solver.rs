use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{abs_pow, signed_pow, sum, GraphFunction, MetricGraph};
use crate::error::check_exponent;
use crate::{Error, Result};

/// Fixed values on part of the graph, plus components whose functions float
/// freely (on those, every constant minimizes).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    fixed: BTreeMap<usize, f64>,
    floating: BTreeSet<usize>,
}

impl BoundaryData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        BoundaryData {
            fixed: pairs.into_iter().collect(),
            floating: BTreeSet::new(),
        }
    }

    pub fn fix(mut self, v: usize, value: f64) -> Self {
        self.fixed.insert(v, value);
        self
    }

    pub fn set(&mut self, v: usize, value: f64) {
        self.fixed.insert(v, value);
    }

    /// Marks the component containing `v` as free.
    pub fn float_component(mut self, v: usize) -> Self {
        self.floating.insert(v);
        self
    }

    pub fn mark_floating(&mut self, v: usize) {
        self.floating.insert(v);
    }

    pub fn value(&self, v: usize) -> Option<f64> {
        self.fixed.get(&v).copied()
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.fixed.contains_key(&v)
    }

    pub fn fixed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.fixed.iter().map(|(&v, &x)| (v, x))
    }

    pub fn floating(&self) -> impl Iterator<Item = usize> + '_ {
        self.floating.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Bound on the largest interior residual.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor in `(0, 2)`. Relaxed updates that would raise
    /// the local energy fall back to the exact coordinate minimizer.
    pub relaxation: f64,
    /// Bound on the relative energy decrease of the final sweep.
    pub energy_rtol: f64,
    pub initial: Option<GraphFunction>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_sweeps: 200_000,
            relaxation: 1.0,
            energy_rtol: 1e-14,
            initial: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_relaxation(mut self, omega: f64) -> Self {
        self.relaxation = omega;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub u: GraphFunction,
    pub energy: f64,
    pub max_residual: f64,
    pub sweeps: usize,
    /// Vertices whose values were optimized, in index order.
    pub interior: Vec<usize>,
}

/// Local data of one coordinate subproblem: `(stiffness, neighbor)` pairs.
struct Stencil {
    vertex: usize,
    terms: Vec<(f64, usize)>,
    /// Magnitude of the boundary data, the scale of attainable accuracy.
    scale: f64,
}

impl Stencil {
    /// `d/dt` of the local energy divided by `p`.
    fn slope(&self, u: &[f64], p: f64, t: f64) -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for &(k, w) in &self.terms {
            let d = t - u[w];
            f += k * signed_pow(d, p - 1.0);
            df += k * (p - 1.0) * if p == 2.0 { 1.0 } else { d.abs().powf(p - 2.0) };
        }
        (f, df)
    }

    fn local_energy(&self, u: &[f64], p: f64, t: f64) -> f64 {
        self.terms.iter().map(|&(k, w)| k * abs_pow(t - u[w], p)).sum()
    }

    /// Vertex balance, with differences within rounding counted as ties.
    /// For `p < 2` a one-ulp difference would otherwise contribute
    /// `ulp^{p-1}`, far above any useful tolerance.
    fn residual(&self, u: &[f64], p: f64) -> f64 {
        let t = u[self.vertex];
        sum(self
            .terms
            .iter()
            .filter(|&&(_, w)| !tied(u[w], t, self.scale))
            .map(|&(k, w)| k * signed_pow(u[w] - t, p - 1.0)))
    }

    /// Exact minimizer of the strictly convex local energy: safeguarded
    /// Newton on its derivative, bisecting whenever a step leaves the
    /// current bracket.
    ///
    /// A root tied to neighbor values is snapped onto the best of them, and
    /// a root a little further off is moved onto a neighbor value when that
    /// lowers the slope. For `p < 2` the slope is infinitely steep at a
    /// neighbor value, where the root finder loses accuracy, and clusters of
    /// tied vertices only settle once their values coincide.
    fn minimize(&self, u: &[f64], p: f64) -> f64 {
        if p == 2.0 {
            // Weighted mean of the neighbors.
            let (num, den) = self.terms.iter().fold((0.0, 0.0), |(n, d), &(k, w)| (n + k * u[w], d + k));
            return num / den;
        }
        let t = self.bracketed_root(u, p);
        let close = |c: f64| (c - t).abs() <= 1024.0 * f64::EPSILON * c.abs().max(t.abs());
        // (|slope|, value, forced by a tie)
        let mut best = (self.slope(u, p, t).0.abs(), t, false);
        for &(_, w) in &self.terms {
            let c = u[w];
            if tied(c, t, self.scale) {
                let f = self.slope(u, p, c).0.abs();
                if !best.2 || f < best.0 {
                    best = (f, c, true);
                }
            } else if !best.2 && close(c) {
                let f = self.slope(u, p, c).0.abs();
                if f <= best.0 {
                    best = (f, c, false);
                }
            }
        }
        best.1
    }

    fn bracketed_root(&self, u: &[f64], p: f64) -> f64 {
        let (mut lo, mut hi) = self
            .terms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, w)| (lo.min(u[w]), hi.max(u[w])));
        if !(lo < hi) {
            return lo;
        }
        let mut t = u[self.vertex].clamp(lo, hi);
        for _ in 0..400 {
            let (f, df) = self.slope(u, p, t);
            if f == 0.0 {
                return t;
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            // Infinite at a neighbor value for p < 2; bisect there.
            let newton = if df.is_finite() && df > 0.0 { t - f / df } else { f64::NAN };
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == t || hi - lo <= 4.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            t = next;
        }
        t
    }
}

/// Minimizes the p-energy over functions agreeing with the fixed boundary
/// values, by cyclic coordinate descent in vertex index order.
///
/// Regions cut off from the boundary by a single vertex are constant at
/// that vertex's value and are filled in rather than iterated. For `p < 2`
/// each sweep also shifts clusters of tied vertices together; see
/// `move_tied_clusters`. Differences within rounding at the scale of the
/// boundary data count as ties in the residual.
///
/// Stops once the largest interior residual is below `tol` and the last
/// sweep lowered the energy by less than `energy_rtol` relative. The
/// minimizer is unique on anchored components; floating components are set
/// to a constant (the mean of the initial guess there, or 0).
pub fn solve_dirichlet(g: &MetricGraph, p: f64, boundary: &BoundaryData, opts: &SolverOptions) -> Result<SolveReport> {
    check_exponent(p)?;
    if !(opts.tol > 0.0) || !(opts.energy_rtol >= 0.0) {
        return Err(Error::param("solver tolerances must be positive"));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation < 2.0) {
        return Err(Error::param(format!("relaxation {} outside (0, 2)", opts.relaxation)));
    }
    let n = g.num_vertices();
    for (v, x) in boundary.fixed() {
        g.check_vertex(v)?;
        if !x.is_finite() {
            return Err(Error::param(format!("boundary value {x} at vertex {v}")));
        }
    }
    for v in boundary.floating() {
        g.check_vertex(v)?;
    }
    if let Some(init) = &opts.initial {
        init.check_len(g)?;
    }

    let (label, n_comp) = g.components();
    let mut anchored = vec![false; n_comp];
    let mut bsum = vec![0.0; n_comp];
    let mut bcount = vec![0usize; n_comp];
    for (v, x) in boundary.fixed() {
        anchored[label[v]] = true;
        bsum[label[v]] += x;
        bcount[label[v]] += 1;
    }
    let mut floating = vec![false; n_comp];
    for v in boundary.floating() {
        floating[label[v]] = true;
    }
    for (v, &c) in label.iter().enumerate() {
        if !anchored[c] && !floating[c] {
            return Err(Error::NoBoundary(v));
        }
    }

    let mut u = vec![0.0; n];
    let mut fsum = vec![0.0; n_comp];
    let mut fcount = vec![0usize; n_comp];
    for v in 0..n {
        let c = label[v];
        if let Some(x) = boundary.value(v) {
            u[v] = x;
        } else if let Some(init) = &opts.initial {
            u[v] = init.value(v);
            fsum[c] += u[v];
            fcount[c] += 1;
        } else if anchored[c] {
            u[v] = bsum[c] / bcount[c] as f64;
        }
    }
    for v in 0..n {
        let c = label[v];
        if !anchored[c] {
            u[v] = if fcount[c] > 0 { fsum[c] / fcount[c] as f64 } else { 0.0 };
        }
    }

    let fixed: Vec<bool> = (0..n).map(|v| boundary.is_fixed(v)).collect();
    let attach = dead_ends(g, &fixed);
    let fill = |u: &mut [f64]| {
        for v in 0..n {
            if let Some(a) = attach[v] {
                u[v] = u[a];
            }
        }
    };
    fill(&mut u);
    let interior: Vec<usize> = (0..n).filter(|&v| anchored[label[v]] && !fixed[v]).collect();
    let scale = boundary.fixed().map(|(_, x)| x.abs()).fold(0.0, f64::max);
    let stencils: Vec<Stencil> = interior
        .iter()
        .filter(|&&v| attach[v].is_none())
        .map(|&v| Stencil {
            vertex: v,
            scale,
            terms: g
                .neighbors(v)
                .iter()
                .filter(|&&(w, _)| attach[w].is_none())
                .map(|&(w, e)| (g.edge(e).stiffness(p), w))
                .collect(),
        })
        .collect();

    let energy_of = |u: &[f64]| sum(g.edges().iter().map(|e| super::edge_energy(e, u, p)));
    let max_residual = |u: &[f64]| stencils.iter().map(|s| s.residual(u, p).abs()).fold(0.0, f64::max);

    let mut energy = energy_of(&u);
    let mut residual = max_residual(&u);
    if residual < opts.tol {
        return Ok(SolveReport {
            u: GraphFunction::new(u),
            energy,
            max_residual: residual,
            sweeps: 0,
            interior,
        });
    }
    let mut slot = vec![usize::MAX; n];
    for (i, s) in stencils.iter().enumerate() {
        slot[s.vertex] = i;
    }
    let omega = opts.relaxation;
    for sweep in 1..=opts.max_sweeps {
        for s in &stencils {
            let old = u[s.vertex];
            let star = s.minimize(&u, p);
            // Over-relaxation never raises a quadratic local energy.
            u[s.vertex] = if omega == 1.0 {
                star
            } else if p == 2.0 {
                old + omega * (star - old)
            } else {
                let relaxed = old + omega * (star - old);
                if s.local_energy(&u, p, relaxed) <= s.local_energy(&u, p, old) {
                    relaxed
                } else {
                    star
                }
            };
        }
        if p < 2.0 {
            move_tied_clusters(&stencils, &slot, &mut u, p);
        }
        fill(&mut u);
        let next = energy_of(&u);
        let decrease = energy - next;
        energy = next;
        residual = max_residual(&u);
        if residual < opts.tol && decrease <= opts.energy_rtol * energy.max(f64::MIN_POSITIVE) {
            return Ok(SolveReport {
                u: GraphFunction::new(u),
                energy,
                max_residual: residual,
                sweeps: sweep,
                interior,
            });
        }
    }
    Err(Error::NonConvergence {
        sweeps: opts.max_sweeps,
        residual,
    })
}

/// Agreement of two vertex values up to rounding at the data scale.
fn tied(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 8.0 * f64::EPSILON * a.abs().max(b.abs()).max(scale)
}

/// Shifts each cluster of free vertices joined by tied edges to the common
/// value minimizing the energy of the edges leaving it. For `p < 2` single
/// vertex updates cannot separate or move such clusters: each member is
/// held by the infinite stiffness of its tied edges.
fn move_tied_clusters(stencils: &[Stencil], slot: &[usize], u: &mut [f64], p: f64) {
    let mut cluster = vec![usize::MAX; stencils.len()];
    let mut members = Vec::new();
    for start in 0..stencils.len() {
        if cluster[start] != usize::MAX {
            continue;
        }
        cluster[start] = start;
        members.clear();
        members.push(start);
        let mut head = 0;
        while head < members.len() {
            let s = &stencils[members[head]];
            head += 1;
            for &(_, w) in &s.terms {
                let j = slot[w];
                if j != usize::MAX && cluster[j] == usize::MAX && tied(u[w], u[s.vertex], s.scale) {
                    cluster[j] = start;
                    members.push(j);
                }
            }
        }
        if members.len() < 2 {
            continue;
        }
        let block = Stencil {
            vertex: stencils[start].vertex,
            scale: stencils[start].scale,
            terms: members
                .iter()
                .flat_map(|&i| stencils[i].terms.iter().copied())
                .filter(|&(_, w)| slot[w] == usize::MAX || cluster[slot[w]] != start)
                .collect(),
        };
        let old: f64 = members.iter().map(|&i| stencils[i].local_energy(u, p, u[stencils[i].vertex])).sum();
        let saved: Vec<f64> = members.iter().map(|&i| u[stencils[i].vertex]).collect();
        let t = block.minimize(u, p);
        for &i in &members {
            u[stencils[i].vertex] = t;
        }
        let new: f64 = members.iter().map(|&i| stencils[i].local_energy(u, p, t)).sum();
        // Keeps moves that change the energy only by rounding.
        if new > old * (1.0 + 16.0 * f64::EPSILON) {
            for (&i, &x) in members.iter().zip(&saved) {
                u[stencils[i].vertex] = x;
            }
        }
    }
}

/// For each vertex cut off from every fixed vertex by a single other vertex
/// `a`, the outermost such `a`. Minimizers are constant on these dead ends,
/// and coordinate descent stalls on them for `p < 2`, so the solver pins
/// them to their attachment instead of iterating.
///
/// Tarjan's articulation test from a virtual root joined to every fixed
/// vertex: a DFS subtree below `a` with `low >= disc[a]` reaches no fixed
/// vertex.
fn dead_ends(g: &MetricGraph, fixed: &[bool]) -> Vec<Option<usize>> {
    let n = g.num_vertices();
    let m = g.num_edges();
    let root = n;
    let roots: Vec<usize> = (0..n).filter(|&v| fixed[v]).collect();
    // Neighbor `i` of `v` as `(w, edge id)`; virtual edges are `m + f`.
    let degree = |v: usize| if v == root { roots.len() } else { g.degree(v) + usize::from(fixed[v]) };
    let neighbor = |v: usize, i: usize| -> (usize, usize) {
        if v == root {
            (roots[i], m + roots[i])
        } else if i < g.degree(v) {
            g.neighbors(v)[i]
        } else {
            (root, m + v)
        }
    };
    let unseen = usize::MAX;
    let mut disc = vec![unseen; n + 1];
    let mut low = vec![0; n + 1];
    let mut size = vec![1; n + 1];
    let mut order = Vec::with_capacity(n + 1);
    let mut regions = Vec::new();
    // Frames `(vertex, parent edge, next neighbor index)`.
    let mut stack = vec![(root, usize::MAX, 0)];
    disc[root] = 0;
    order.push(root);
    while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
        if *next < degree(v) {
            let (w, e) = neighbor(v, *next);
            *next += 1;
            if e == parent_edge {
                continue;
            }
            if disc[w] == unseen {
                disc[w] = order.len();
                low[w] = disc[w];
                order.push(w);
                stack.push((w, e, 0));
            } else {
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(a, _, _)) = stack.last() {
                low[a] = low[a].min(low[v]);
                size[a] += size[v];
                if a != root && low[v] >= disc[a] {
                    regions.push((a, v));
                }
            }
        }
    }
    regions.sort_by_key(|&(_, c)| disc[c]);
    let mut attach = vec![None; n];
    for (a, c) in regions {
        for &v in &order[disc[c]..disc[c] + size[c]] {
            attach[v].get_or_insert(a);
        }
    }
    attach
}

#[cfg(test)]
mod tests {
    use super::super::Edge;
    use super::*;

    fn path(n: usize, measures: &[f64]) -> MetricGraph {
        MetricGraph::new(
            n + 1,
            (0..n).map(|i| Edge::with_measure(i, i + 1, 1.0, measures[i % measures.len()])).collect(),
        )
        .unwrap()
    }

    #[test]
    fn dead_ends_take_the_attachment_value() {
        // 0 - 1 - 2 path with boundary ends, a pendant path 1 - 3 - 4 and a
        // pendant triangle 4 - 5 - 6 - 4.
        let edges = [(0, 1), (1, 2), (1, 3), (3, 4), (4, 5), (5, 6), (6, 4)];
        let g = MetricGraph::new(7, edges.iter().map(|&(a, b)| Edge::new(a, b, 1.0, 1.0)).collect()).unwrap();
        let fixed = [true, false, true, false, false, false, false];
        assert_eq!(dead_ends(&g, &fixed), vec![None, None, None, Some(1), Some(1), Some(1), Some(1)]);
        let b = BoundaryData::new().fix(0, 0.0).fix(2, 1.0);
        let r = solve_dirichlet(&g, 1.5, &b, &SolverOptions::default().with_tol(1e-13)).unwrap();
        assert!(r.sweeps < 100, "{} sweeps", r.sweeps);
        assert_eq!(r.interior, vec![1, 3, 4, 5, 6]);
        for v in 3..7 {
            assert_eq!(r.u.value(v), r.u.value(1));
        }
        assert!((r.u.value(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pendant_on_a_fixed_vertex() {
        let g = MetricGraph::new(3, vec![Edge::new(0, 1, 1.0, 1.0), Edge::new(1, 2, 1.0, 1.0), Edge::new(1, 2, 2.0, 1.0)])
            .unwrap();
        assert_eq!(dead_ends(&g, &[true, false, false]), vec![None, Some(0), Some(0)]);
        assert_eq!(dead_ends(&g, &[true, false, true]), vec![None; 3]);
    }

    #[test]
    fn affine_chain() {
        let g = path(10, &[1.0]);
        let b = BoundaryData::new().fix(0, 0.0).fix(10, 1.0);
        for p in [1.5, 2.0, 3.0] {
            let r = solve_dirichlet(&g, p, &b, &SolverOptions::default().with_tol(1e-13)).unwrap();
            for k in 0..=10 {
                assert!((r.u.value(k) - k as f64 / 10.0).abs() < 1e-9, "p={p} k={k}");
            }
            assert!(r.max_residual < 1e-13);
        }
    }

    #[test]
    fn two_edge_closed_form() {
        for (m1, m2) in [(1.0, 3.0), (0.25, 2.0)] {
            let g = path(2, &[m1, m2]);
            let b = BoundaryData::new().fix(0, 0.0).fix(2, 1.0);
            for p in [1.5, 2.0, 3.0] {
                let want = 1.0 / (1.0 + (m1 / m2).powf(1.0 / (p - 1.0)));
                let r = solve_dirichlet(&g, p, &b, &SolverOptions::default()).unwrap();
                assert!((r.u.value(1) - want).abs() < 1e-12, "{} vs {want}", r.u.value(1));
            }
        }
    }

    #[test]
    fn relaxation_reaches_the_same_minimizer() {
        let g = path(30, &[1.0, 2.0, 0.5]);
        let b = BoundaryData::new().fix(0, -1.0).fix(30, 2.0);
        let opts = SolverOptions::default().with_tol(1e-13);
        let plain = solve_dirichlet(&g, 2.0, &b, &opts).unwrap();
        let sor = solve_dirichlet(&g, 2.0, &b, &opts.clone().with_relaxation(1.8)).unwrap();
        assert!(sor.sweeps < plain.sweeps);
        for v in 0..=30 {
            assert!((plain.u.value(v) - sor.u.value(v)).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_boundary_and_floating_components() {
        let g = MetricGraph::new(4, vec![Edge::new(0, 1, 1.0, 1.0), Edge::new(2, 3, 1.0, 1.0)]).unwrap();
        let b = BoundaryData::new().fix(0, 1.0);
        assert!(matches!(
            solve_dirichlet(&g, 2.0, &b, &SolverOptions::default()),
            Err(Error::NoBoundary(2))
        ));
        let b = b.float_component(3);
        let r = solve_dirichlet(&g, 2.0, &b, &SolverOptions::default()).unwrap();
        assert_eq!(r.u.values(), &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            solve_dirichlet(&g, 2.0, &BoundaryData::new().fix(9, 0.0), &SolverOptions::default()),
            Err(Error::UnknownVertex(9))
        ));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let g = path(40, &[1.0]);
        let b = BoundaryData::new().fix(0, 0.0).fix(40, 1.0);
        let opts = SolverOptions {
            max_sweeps: 3,
            ..SolverOptions::default()
        };
        assert!(matches!(
            solve_dirichlet(&g, 2.0, &b, &opts),
            Err(Error::NonConvergence { sweeps: 3, .. })
        ));
    }
}
