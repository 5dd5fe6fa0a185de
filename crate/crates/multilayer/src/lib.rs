//! Analysis of stochastic multilayer networks: a base graph is thinned into
//! `M` independent layers by random node deactivation and link removal, and
//! the layers are merged by keeping every link present in at least `K` of
//! them. This crate computes the law of the merged configuration exactly
//! where that is tractable (lines, trees, small graphs), in the `M -> infinity`
//! limit, and by seeded Monte Carlo everywhere else.
//!
//! - [`model`]: parameters, configurations, validation, layer merging.
//! - [`line`]: closed-form recursions for lines (uniform activation, no
//!   thinning, union merge), cluster-size and active-link transforms.
//! - [`tree`]: bottom-up DP for trees with arbitrary parameters and threshold.
//! - [`general`]: exhaustive layer-merge recursion and brute-force oracles
//!   for small graphs.
//! - [`feasibility`]: clique-edge-cover feasibility test on clique bases.
//! - [`asymptotic`]: Poisson limits, independence conditions, trichotomy.
//! - [`montecarlo`]: reproducible parallel simulation.
//! - [`io`]: the text file formats shared with the command-line tool.

pub mod asymptotic;
pub mod dist;
pub mod error;
pub mod feasibility;
pub mod general;
pub mod graph;
pub mod io;
pub mod line;
pub mod model;
pub mod montecarlo;
pub mod tree;

pub use error::{Error, Result};
pub use graph::BaseGraph;
pub use model::{LinkConfiguration, ModelParams, NonIdenticalParams};
