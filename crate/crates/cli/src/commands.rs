use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use pharmonic_core::geometry::{
    audit_csv, chainability_audit, doubling_report, volume_growth_fit, AuditOptions, Ball, Point, Space,
};
use pharmonic_core::metric_graph::{
    bounded_tree_energy_partial_sum, bounded_tree_function, build_binary_tree, graph_energy, max_interior_residual,
    parse_roles, solve_dirichlet, tree_energy_limit, tree_energy_partial_sum, tree_energy_tail,
    unbounded_tree_function, write_csv, BoundaryData, GraphFunction, MetricGraph, SolverOptions, MAX_DEPTH,
};
use pharmonic_core::quadrature::TailFlag;
use pharmonic_core::quasimin::{growth_csv, growth_report, GrowthOptions};
use pharmonic_core::weighted_line::{classify_liouville, LineOptions, Weight};

use crate::config::{
    check_p, check_radii, check_tol, AuditConfig, BuiltSpace, ClassifyConfig, FunctionSpec, GrowthConfig,
    SolveConfig, SpaceSpec, TreeConfig,
};
use crate::output::{Artifact, Stamp};
use crate::CliError;

/// Files to write, a human summary and the exit code to report after a
/// successful write.
pub struct Run {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    pub code: i32,
}

/// Values given on the command line, each replacing the config field.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub p: Option<f64>,
    pub tol: Option<f64>,
    pub depth: Option<usize>,
    pub radii: Option<Vec<f64>>,
}

pub fn classify_weight(mut cfg: ClassifyConfig, o: &Overrides) -> Result<Run, CliError> {
    cfg.p = o.p.or(cfg.p).or(Some(2.0));
    cfg.tol = o.tol.or(cfg.tol);
    cfg.output_dir = None;
    let p = cfg.p.expect("set above");
    check_p(p)?;
    if cfg.segments.is_empty() {
        return Err(CliError::Input("weight config has no [[segments]]".into()));
    }
    let weight = Weight::new(p, cfg.segments(p)?)?;
    let mut opts = LineOptions::default();
    if let Some(tol) = cfg.tol {
        check_tol(tol)?;
        opts.quad.rel_tol = tol;
    }
    if let Some(r) = cfg.tail_radius {
        if !(r > 1.0 && r.is_finite()) {
            return Err(CliError::Input(format!("tail radius {r} must exceed 1")));
        }
        opts.tail.r_max = r;
    }
    let verdict = classify_liouville(&weight, &opts)?;
    let stamp = Stamp::new("classify-weight", &cfg)?;
    let summary = format!(
        "bounded Liouville {}, positive Liouville {} (tail {:?})",
        holds(verdict.bounded_liouville_holds),
        holds(verdict.positive_liouville_holds),
        verdict.tail_flag
    );
    Ok(Run {
        artifacts: vec![stamp.json("classify-weight.json", &cfg, &verdict)?],
        summary,
        code: if verdict.tail_flag == TailFlag::Inconclusive { 2 } else { 0 },
    })
}

fn holds(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

#[derive(Debug, Serialize)]
struct TreeReport {
    vertices: usize,
    unbounded_max_residual: f64,
    bounded_max_residual: f64,
    energy: f64,
    energy_series: f64,
    energy_limit: f64,
    energy_tail: f64,
    bounded_energy: f64,
    bounded_energy_series: f64,
    /// `2^{p/(p-1)}` times the unbounded energy.
    bounded_energy_bound: f64,
    unbounded_max: f64,
    unbounded_min: f64,
    bounded_max: f64,
    bounded_min: f64,
    residuals_ok: bool,
    energies_ok: bool,
}

pub fn tree_demo(mut cfg: TreeConfig, o: &Overrides) -> Result<Run, CliError> {
    cfg.p = o.p.or(cfg.p).or(Some(2.0));
    cfg.depth = o.depth.or(cfg.depth).or(Some(12));
    cfg.tol = o.tol.or(cfg.tol).or(Some(1e-12));
    cfg.output_dir = None;
    let (p, depth, tol) = (cfg.p.unwrap_or_default(), cfg.depth.unwrap_or_default(), cfg.tol.unwrap_or_default());
    check_p(p)?;
    check_tol(tol)?;
    if depth == 0 || depth > MAX_DEPTH {
        return Err(CliError::Input(format!("depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let tree = build_binary_tree(depth)?;
    let g = tree.graph();
    let u = unbounded_tree_function(&tree, p)?;
    let b = bounded_tree_function(&tree, p)?;
    let inner = |v: usize| !tree.is_leaf(v);
    let energy = graph_energy(g, &u, p, None)?;
    let bounded_energy = graph_energy(g, &b, p, None)?;
    let energy_series = tree_energy_partial_sum(p, depth);
    let bounded_energy_series = bounded_tree_energy_partial_sum(p, depth);
    let extent = |f: &GraphFunction| {
        let v = f.values();
        (v.iter().copied().fold(f64::NEG_INFINITY, f64::max), v.iter().copied().fold(f64::INFINITY, f64::min))
    };
    let (unbounded_max, unbounded_min) = extent(&u);
    let (bounded_max, bounded_min) = extent(&b);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs().max(1.0);
    let mut report = TreeReport {
        vertices: g.num_vertices(),
        unbounded_max_residual: max_interior_residual(g, &u, p, inner)?,
        bounded_max_residual: max_interior_residual(g, &b, p, inner)?,
        energy,
        energy_series,
        energy_limit: tree_energy_limit(p),
        energy_tail: tree_energy_tail(p, depth),
        bounded_energy,
        bounded_energy_series,
        bounded_energy_bound: 2f64.powf(p / (p - 1.0)) * energy,
        unbounded_max,
        unbounded_min,
        bounded_max,
        bounded_min,
        residuals_ok: false,
        energies_ok: close(energy, energy_series) && close(bounded_energy, bounded_energy_series),
    };
    report.residuals_ok = report.unbounded_max_residual < tol && report.bounded_max_residual < tol;
    let ok = report.residuals_ok && report.energies_ok;
    let summary = format!(
        "depth {depth}, p = {p}: energy {:.12} (series {:.12}, limit {:.12}), bounded energy {:.12}, max residuals {:.2e} / {:.2e}, max u = {}, max bounded = {:.6}",
        energy,
        energy_series,
        report.energy_limit,
        bounded_energy,
        report.unbounded_max_residual,
        report.bounded_max_residual,
        unbounded_max,
        bounded_max
    );
    let stamp = Stamp::new("tree-demo", &cfg)?;
    Ok(Run {
        artifacts: vec![stamp.json("tree-demo.json", &cfg, &report)?],
        summary,
        code: if ok { 0 } else { 3 },
    })
}

fn require_space(space: &Option<SpaceSpec>) -> Result<BuiltSpace, CliError> {
    space
        .as_ref()
        .ok_or_else(|| CliError::Input("config needs a [space] table".into()))?
        .build()
}

pub fn geometry_audit(mut cfg: AuditConfig, o: &Overrides) -> Result<Run, CliError> {
    cfg.radii = o.radii.clone().or(cfg.radii).or(Some(vec![2.0, 4.0, 8.0, 16.0]));
    cfg.big_lambda = cfg.big_lambda.or(Some(2.0));
    cfg.lambda = cfg.lambda.or(Some(1.0));
    cfg.output_dir = None;
    let radii = cfg.radii.clone().unwrap_or_default();
    check_radii(&radii)?;
    let built = require_space(&cfg.space)?;
    let x0 = Point::Vertex(built.center(cfg.center)?);
    let space = Space::new(&built.graph);
    let balls: Vec<Ball> = radii.iter().map(|&r| Ball { center: x0, radius: r }).collect();
    let doubling = doubling_report(&space, &balls)?;
    let growth = volume_growth_fit(&space, &x0, &radii)?;
    let opts = AuditOptions {
        big_lambda: cfg.big_lambda.unwrap_or_default(),
        lambda: cfg.lambda.unwrap_or_default(),
        delta: cfg.delta,
        ..AuditOptions::default()
    };
    let rows = chainability_audit(&space, &x0, &radii, &opts)?;

    #[derive(Serialize)]
    struct Report<'a, D, G, R> {
        doubling: &'a D,
        volume_growth: &'a G,
        chainability: &'a R,
    }
    let stamp = Stamp::new("geometry-audit", &cfg)?;
    let json = stamp.json(
        "geometry-audit.json",
        &cfg,
        &Report {
            doubling: &doubling,
            volume_growth: &growth,
            chainability: &rows,
        },
    )?;
    let csv = stamp.csv("geometry-audit.csv", &audit_csv(&rows));
    let chainable = rows.iter().filter(|r| r.chainable).count();
    let summary = format!(
        "chainable at {chainable} of {} radii; volume exponent sigma = {:.4} (R^2 = {:.4}){}",
        rows.len(),
        growth.sigma,
        growth.fit_quality,
        if growth.superpolynomial { ", super-polynomial growth" } else { "" }
    );
    let valid = rows.iter().all(|r| r.chain_valid);
    Ok(Run {
        artifacts: vec![csv, json],
        summary,
        code: if valid { 0 } else { 3 },
    })
}

fn parse_function_csv(path: &Path, n: usize) -> Result<GraphFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let bad = |line: usize, msg: &str| CliError::Input(format!("{}:{line}: {msg}", path.display()));
    let mut values = vec![None; n];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "vertex,value" {
            continue;
        }
        let (v, x) = line.split_once(',').ok_or_else(|| bad(i + 1, "expected `vertex,value`"))?;
        let v: usize = v.trim().parse().map_err(|_| bad(i + 1, "bad vertex id"))?;
        let x: f64 = x.trim().parse().map_err(|_| bad(i + 1, "bad value"))?;
        *values
            .get_mut(v)
            .ok_or_else(|| bad(i + 1, &format!("vertex {v} is not in the graph")))? = Some(x);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| CliError::Input(format!("{}: no value for vertex {v}", path.display()))))
        .collect::<Result<Vec<_>, _>>()
        .map(GraphFunction::new)
}

fn coordinate(built: &BuiltSpace, axis: usize) -> Result<GraphFunction, CliError> {
    match (&built.coords, axis) {
        (Some(c), 0 | 1) => Ok(GraphFunction::new(c.iter().map(|x| x[axis]).collect())),
        (Some(_), _) => Err(CliError::Input(format!("coordinate axis {axis} must be 0 or 1"))),
        (None, _) => Err(CliError::Input("coordinate functions need a path, grid or strip space".into())),
    }
}

fn build_function(built: &BuiltSpace, spec: &FunctionSpec, p: f64, tol: f64) -> Result<GraphFunction, CliError> {
    let g = &built.graph;
    let tree = || {
        built
            .tree
            .as_ref()
            .ok_or_else(|| CliError::Input("tree functions need a tree space".into()))
    };
    Ok(match spec {
        FunctionSpec::Constant { value } => GraphFunction::constant(g.num_vertices(), *value),
        FunctionSpec::Coordinate { axis } => coordinate(built, *axis)?,
        FunctionSpec::TreeUnbounded => unbounded_tree_function(tree()?, p)?,
        FunctionSpec::TreeBounded => bounded_tree_function(tree()?, p)?,
        FunctionSpec::Csv { path } => parse_function_csv(path, g.num_vertices())?,
        FunctionSpec::Solve { axis } => {
            let data = coordinate(built, *axis)?;
            let top = (0..g.num_vertices()).map(|v| g.degree(v)).max().unwrap_or(0);
            let boundary = BoundaryData::from_pairs(
                (0..g.num_vertices()).filter(|&v| g.degree(v) < top).map(|v| (v, data.value(v))),
            );
            // An over-relaxed linear solve first; it is the answer at p = 2 and
            // a warm start otherwise.
            let linear = solve_dirichlet(g, 2.0, &boundary, &SolverOptions::default().with_tol(tol).with_relaxation(1.9))?.u;
            if p == 2.0 {
                linear
            } else {
                let opts = SolverOptions {
                    initial: Some(linear),
                    ..SolverOptions::default().with_tol(tol)
                };
                solve_dirichlet(g, p, &boundary, &opts)?.u
            }
        }
    })
}

pub fn growth(mut cfg: GrowthConfig, o: &Overrides) -> Result<Run, CliError> {
    cfg.p = o.p.or(cfg.p).or(Some(2.0));
    cfg.tol = o.tol.or(cfg.tol).or(Some(1e-10));
    cfg.radii = o.radii.clone().or(cfg.radii).or(Some(vec![2.0, 4.0, 8.0, 16.0]));
    cfg.lambda = cfg.lambda.or(Some(1.0));
    cfg.function = cfg.function.or(Some(FunctionSpec::Coordinate { axis: 0 }));
    cfg.output_dir = None;
    let (p, tol) = (cfg.p.unwrap_or_default(), cfg.tol.unwrap_or_default());
    check_p(p)?;
    check_tol(tol)?;
    let radii = cfg.radii.clone().unwrap_or_default();
    check_radii(&radii)?;
    let built = require_space(&cfg.space)?;
    let x0 = Point::Vertex(built.center(cfg.center)?);
    let u = build_function(&built, cfg.function.as_ref().expect("set above"), p, tol)?;
    let space = Space::new(&built.graph);
    let opts = GrowthOptions {
        alpha: cfg.alpha,
        big_lambda: cfg.big_lambda,
        lambda: cfg.lambda.unwrap_or_default(),
    };
    let report = growth_report(&space, &u, &x0, &radii, p, &opts)?;
    let stamp = Stamp::new("growth-report", &cfg)?;
    let summary = if report.degenerate {
        "degenerate: u is constant on the largest ball".to_string()
    } else {
        format!(
            "energy exponent {}, oscillation exponent {}, I(r_max) = {:?}",
            fmt_opt(report.energy_exponent),
            fmt_opt(report.oscillation_exponent),
            report.energies.last().copied().unwrap_or_default()
        )
    };
    let monotone = report.monotone;
    Ok(Run {
        artifacts: vec![
            stamp.csv("growth-report.csv", &growth_csv(&report)),
            stamp.json("growth-report.json", &cfg, &report)?,
        ],
        summary,
        code: if monotone { 0 } else { 3 },
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

#[derive(Serialize)]
struct ResolvedSolve<'a> {
    #[serde(flatten)]
    file: &'a SolveConfig,
    graph_sha256: String,
    roles_sha256: String,
}

#[derive(Serialize)]
struct SolveSummary {
    vertices: usize,
    interior: usize,
    energy: f64,
    max_residual: f64,
    sweeps: usize,
}

pub fn solve_graph(mut cfg: SolveConfig, o: &Overrides, graph: Option<&Path>, roles: Option<&Path>) -> Result<Run, CliError> {
    cfg.graph = graph.map(Path::to_path_buf).or(cfg.graph);
    cfg.roles = roles.map(Path::to_path_buf).or(cfg.roles);
    cfg.p = o.p.or(cfg.p).or(Some(2.0));
    cfg.tol = o.tol.or(cfg.tol).or(Some(1e-10));
    cfg.output_dir = None;
    let (p, tol) = (cfg.p.unwrap_or_default(), cfg.tol.unwrap_or_default());
    check_p(p)?;
    check_tol(tol)?;
    let read = |what: &str, path: &Option<std::path::PathBuf>| -> Result<String, CliError> {
        let path = path.as_ref().ok_or_else(|| CliError::Input(format!("no {what} file given")))?;
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
    };
    let graph_text = read("graph", &cfg.graph)?;
    let roles_text = read("roles", &cfg.roles)?;
    let g: MetricGraph = pharmonic_core::metric_graph::parse_edge_list(&graph_text)?;
    let boundary = parse_roles(&roles_text, g.num_vertices())?;
    let mut opts = SolverOptions::default().with_tol(tol);
    if let Some(m) = cfg.max_sweeps {
        opts.max_sweeps = m;
    }
    if let Some(w) = cfg.relaxation {
        opts = opts.with_relaxation(w);
    }
    let solved = solve_dirichlet(&g, p, &boundary, &opts)?;
    let digest = |t: &str| hex::encode(Sha256::digest(t.as_bytes()));
    let resolved = ResolvedSolve {
        file: &cfg,
        graph_sha256: digest(&graph_text),
        roles_sha256: digest(&roles_text),
    };
    let stamp = Stamp::new("solve-graph", &resolved)?;
    let summary = SolveSummary {
        vertices: g.num_vertices(),
        interior: solved.interior.len(),
        energy: solved.energy,
        max_residual: solved.max_residual,
        sweeps: solved.sweeps,
    };
    let text = format!(
        "solved {} interior vertices in {} sweeps: energy {:?}, max residual {:.2e}",
        summary.interior, summary.sweeps, summary.energy, summary.max_residual
    );
    Ok(Run {
        artifacts: vec![
            stamp.csv("solve-graph.csv", &write_csv(&solved.u)),
            stamp.json("solve-graph.json", &resolved, &summary)?,
        ],
        summary: text,
        code: 0,
    })
}
