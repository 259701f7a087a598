//! Individualization-refinement search trees of small graphs.
//!
//! The root carries the color-refined uniform coloring. A node whose
//! coloring is not discrete has one child per vertex of its target cell
//! (the non-singleton class of smallest color); the child individualizes
//! that vertex and refines again. Leaves are discrete colorings, colored by
//! the graph relabeled in color order, so equal leaf colors mean an
//! isomorphism between the two leaves.

mod graph;
mod refine;
mod tree;

use thiserror::Error;

pub use graph::{graph_aut_order, parse_graph, Graph};
pub use refine::{color_refine, individualize, Coloring};
pub use tree::{CertificateTable, IrTree, IR_VERTEX_CAP};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        n: usize,
    },
    #[error("graph has {n} vertices, cap is {cap}")]
    TooLarge { n: usize, cap: usize },
}
