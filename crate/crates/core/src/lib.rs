//! Nonlinear potential theory at desk scale.
//!
//! The crate computes p-harmonic functions and quasiminimizer diagnostics on
//! two kinds of spaces:
//!
//! * the real line with an absolutely continuous measure `dμ = w dx`
//!   ([`weighted_line`]), where p-harmonic functions are explicit integrals of
//!   the conjugate weight `w^{1/(1-p)}` and the bounded/positive Liouville
//!   properties can be classified from two improper integrals;
//! * finite metric graphs whose edges carry a constant measure density
//!   ([`metric_graph`]), with a convex Dirichlet solver, the binary-tree and
//!   strip constructions, and the metric-measure audits of [`geometry`].
//!
//! [`quasimin`] checks the inequalities that quasiharmonic functions must
//! satisfy (quasiminimality, the weak maximum principle, oscillation and
//! Caccioppoli-type bounds, energy growth) and reports empirical constants.
//!
//! All results concern finite truncations. Asymptotic statements about
//! infinite spaces are replaced by property checks over explicit ranges of
//! radii or depths.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extended;
pub mod geometry;
pub mod metric_graph;
pub mod quadrature;
pub mod quasimin;
pub mod weighted_line;

pub use error::{Error, Result};
pub use extended::Extended;
