//! Exact solvers for the Maximum Happy Vertices (MHV) and Maximum Happy
//! Edges (MHE) problems.
//!
//! A *happy* vertex is one whose neighbours all share its color; a *happy*
//! edge is one whose endpoints share a color. Given a graph with a partial
//! coloring over `ell` colors, both problems ask for an extension maximizing
//! the number of happy vertices (resp. edges).
//!
//! The crate provides:
//! - [`graph`]: graphs, colorings, happiness evaluation and the instance
//!   file format shared by every solver;
//! - [`cwexpr`]: a DSL for clique-width `w`-expressions with evaluation,
//!   niceness checking and per-node metadata;
//! - [`mhv_cw`]: an FPT dynamic program for MHV over a `w`-expression;
//! - [`mhe_cw`]: an XP dynamic program for MHE over a nice `w`-expression;
//! - [`interval`]: an `O(ell * n^2)` MHV solver on interval representations;
//! - [`reductions`]: threshold-graph recognition and the SAT-to-MHE
//!   instance generator witnessing hardness on threshold graphs;
//! - [`oracle`]: brute-force ground truth and seeded random generators.

pub mod cwexpr;
pub mod graph;
pub mod interval;
pub mod mhe_cw;
pub mod mhv_cw;
pub mod oracle;
pub mod reductions;
mod solve;

pub use solve::{SolveError, SolveOptions};
