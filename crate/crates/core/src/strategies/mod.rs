//! Traversal strategies. Every strategy reaches the hidden trees only
//! through [`ExplorationSession`](crate::tree::ExplorationSession), so the
//! session cost counters are the exact query cost of a run.

mod baseline;
mod las_vegas;
mod monte_carlo;
mod split;
mod walk;

use thiserror::Error;

use crate::oracle::{OracleError, Side};
use crate::tree::{BlackBoxTree, ExplorationSession, NodeId, SessionError};

pub use baseline::deterministic_baseline;
pub use las_vegas::{lv_balanced_splits, lv_iso, FoundSplit, ProbeRound, SplitSearch};
pub use monte_carlo::{mc_bidirectional, mc_budgeted, MCParams};
pub use split::{
    bfs_subtree, bidirectional_with_split, is_balanced, split_cost, Split, SplitCost, WalkMode,
};
pub use walk::{capped_walk, random_walk};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StrategyError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("invalid split: node {v} is not at level {h} of tree {side:?}")]
    InvalidSplit { side: Side, v: NodeId, h: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// `l1` is a leaf of the first tree, `l2` of the second, colors equal.
    MatchFound {
        l1: NodeId,
        l2: NodeId,
    },
    NotIsomorphic,
    /// Monte Carlo only: no match found within the error budget.
    ProbablyNotIsomorphic,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::MatchFound { .. } => "match",
            Outcome::NotIsomorphic => "noniso",
            Outcome::ProbablyNotIsomorphic => "probably-noniso",
        }
    }

    pub fn is_match(&self) -> bool {
        matches!(self, Outcome::MatchFound { .. })
    }
}

/// Iteration and restart counters of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WallStats {
    /// Monte Carlo loop iterations, or walks in the split-based search.
    pub iterations: u64,
    /// Budget doublings (Monte Carlo rounds after the first, path-budget
    /// restarts, or split-search rounds after the first).
    pub restarts: u64,
    /// Budget used in each round, in order.
    pub budgets: Vec<u64>,
    /// Split found by the split search, if one ran.
    pub split: Option<FoundSplit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub cost1: u64,
    pub cost2: u64,
    pub stats: WallStats,
}

impl Verdict {
    pub fn total_cost(&self) -> u64 {
        self.cost1 + self.cost2
    }
}

/// Builds a verdict, re-checking through the oracle that a claimed match
/// really has equal colors.
fn verdict<T: BlackBoxTree + ?Sized>(
    s1: &ExplorationSession<'_, T>,
    s2: &ExplorationSession<'_, T>,
    outcome: Outcome,
    stats: WallStats,
) -> Result<Verdict, StrategyError> {
    if let Outcome::MatchFound { l1, l2 } = outcome {
        let (c1, c2) = (s1.color(l1)?, s2.color(l2)?);
        assert!(
            c1.is_some() && c1 == c2,
            "match with unequal colors: {c1:?} vs {c2:?}"
        );
    }
    Ok(Verdict {
        outcome,
        cost1: s1.cost(),
        cost2: s2.cost(),
        stats,
    })
}
