//! Ground-truth machinery: canonization, leaf-constrained isomorphism,
//! exhaustive checking of the invariance axiom, and comparison of explored
//! prefixes truncated at a level.

mod canon;
mod iso;
mod prefix;

use thiserror::Error;

use crate::tree::NodeId;

pub use canon::{ahu_code, trees_isomorphic, AhuCode, Canonizer, NodeLabel, TreeView};
pub use iso::{
    constrained_iso, verify_axiom, verify_mapping, AxiomReport, AxiomViolation, IsoMapping, Side,
    AXIOM_NODE_CAP,
};
pub use prefix::{truncated_iso, ExploredPrefix, PrefixTag};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("tree has {nodes} nodes, exhaustive checking is capped at {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("prefix incomplete: node {node} at depth {depth} has unexplored children")]
    PrefixIncomplete { node: NodeId, depth: usize },
}
