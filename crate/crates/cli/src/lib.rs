//! Reproducible experiments over `pharmonic-core`.
//!
//! Each subcommand reads an optional TOML config, applies command-line
//! overrides (flags beat file fields), runs one analysis and writes its
//! outputs atomically into the output directory. The directory is taken
//! from `--out-dir`, then the config's `output_dir`, then the
//! `PHARMONIC_OUT_DIR` environment variable, then `.`.
//!
//! Exit codes: 0 success, 1 input error, 2 inconclusive numerics,
//! 3 internal invariant violation.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::{Overrides, Run};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] pharmonic_core::Error),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use pharmonic_core::Error as E;
        match self {
            CliError::Input(_) | CliError::Write { .. } => 1,
            CliError::Inconclusive(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Core(E::NonConvergence { .. } | E::ToleranceNotMet { .. }) => 2,
            CliError::Core(E::Invariant(_)) => 3,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pharmonic", version, about = "p-harmonic experiments on weighted graphs and the weighted line")]
pub struct Cli {
    /// Output directory (overrides the config file and PHARMONIC_OUT_DIR).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Print only errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args, Default)]
pub struct Common {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exponent p, 1 < p < inf.
    #[arg(long)]
    pub p: Option<f64>,
    /// Numerical tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the Liouville properties of a weighted line.
    ClassifyWeight {
        #[command(flatten)]
        common: Common,
    },
    /// Check the binary-tree p-harmonic functions and their energies.
    TreeDemo {
        #[command(flatten)]
        common: Common,
        /// Tree depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Doubling, volume growth and annular chainability of a graph model.
    GeometryAudit {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Energy and oscillation growth of a function around a base point.
    GrowthReport {
        #[command(flatten)]
        common: Common,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Solve a Dirichlet problem on an edge-list graph.
    SolveGraph {
        #[command(flatten)]
        common: Common,
        /// Edge list, one `a b length density` per line.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Vertex roles: `<v> boundary <value>`, `<v> free` or `<v> floating`.
        #[arg(long)]
        roles: Option<PathBuf>,
    },
}

/// Runs the command and returns the output directory it resolved with the
/// config, the files to write and the exit code.
fn execute(cli: Cli) -> Result<(PathBuf, Run), CliError> {
    let flag_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::ClassifyWeight { common } => {
            let cfg: config::ClassifyConfig = config::load(common.config.as_deref())?;
            let dir = output::resolve_dir(flag_dir, cfg.output_dir.as_deref());
            let o = Overrides {
                p: common.p,
                tol: common.tol,
                ..Overrides::default()
            };
            Ok((dir, commands::classify_weight(cfg, &o)?))
        }
        Command::TreeDemo { common, depth } => {
            let cfg: config::TreeConfig = config::load(common.config.as_deref())?;
            let dir = output::resolve_dir(flag_dir, cfg.output_dir.as_deref());
            let o = Overrides {
                p: common.p,
                tol: common.tol,
                depth,
                radii: None,
            };
            Ok((dir, commands::tree_demo(cfg, &o)?))
        }
        Command::GeometryAudit { config, radii } => {
            let cfg: config::AuditConfig = config::load(config.as_deref())?;
            let dir = output::resolve_dir(flag_dir, cfg.output_dir.as_deref());
            let o = Overrides {
                radii,
                ..Overrides::default()
            };
            Ok((dir, commands::geometry_audit(cfg, &o)?))
        }
        Command::GrowthReport { common, radii } => {
            let cfg: config::GrowthConfig = config::load(common.config.as_deref())?;
            let dir = output::resolve_dir(flag_dir, cfg.output_dir.as_deref());
            let o = Overrides {
                p: common.p,
                tol: common.tol,
                depth: None,
                radii,
            };
            Ok((dir, commands::growth(cfg, &o)?))
        }
        Command::SolveGraph { common, graph, roles } => {
            let cfg: config::SolveConfig = config::load(common.config.as_deref())?;
            let dir = output::resolve_dir(flag_dir, cfg.output_dir.as_deref());
            let o = Overrides {
                p: common.p,
                tol: common.tol,
                ..Overrides::default()
            };
            Ok((dir, commands::solve_graph(cfg, &o, graph.as_deref(), roles.as_deref())?))
        }
    }
}

/// Parses `args` (program name first), runs the command, writes its
/// outputs and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let quiet = cli.quiet;
    let result = execute(cli).and_then(|(dir, run)| {
        let written = output::write_all(&dir, &run.artifacts)?;
        Ok((run, written))
    });
    match result {
        Ok((run, written)) => {
            if !quiet {
                println!("{}", run.summary);
                for path in written {
                    println!("wrote {}", path.display());
                }
            }
            run.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
