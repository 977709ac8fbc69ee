//! Options and errors shared by the dynamic-programming solvers.

use thiserror::Error;

use crate::cwexpr::CwError;

/// Hard cap on the number of materialized DP states. The clique-width
/// programs are exponential resp. XP, so they must fail loudly instead of
/// exhausting memory.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub state_budget: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { state_budget: DEFAULT_STATE_BUDGET }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    /// Expression validation failed: graph mismatch, partial redundancy, ...
    #[error(transparent)]
    Expr(#[from] CwError),
    #[error("expression is not nice: {0}")]
    NotNice(String),
    #[error("state budget exceeded: {states} states, budget {budget} (set HAPPY_STATE_BUDGET to raise)")]
    StateBudgetExceeded { states: usize, budget: usize },
}
