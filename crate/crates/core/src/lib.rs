//! Exploration of black-box search trees whose leaf colors obey complete
//! isomorphism invariance: equal colors imply a color-preserving
//! isomorphism mapping one leaf onto the other.
//!
//! * [`tree`]: concrete trees, the tree file format, and the exploration
//!   oracle with exact query-cost accounting.
//! * [`generators`]: instance families, including the complete binary
//!   lower-bound family 𝓜ₕ.
//! * [`oracle`]: ground truth (canonical codes, constrained isomorphisms,
//!   axiom verification, truncated prefix comparison).
//! * [`strategies`]: Monte Carlo bidirectional search, the Las Vegas
//!   balanced-split search, and a deterministic baseline.
//! * [`ir`]: individualization-refinement search trees built from small graphs.
//! * [`bench`]: seeded experiments producing CSV tables and summaries.

pub mod bench;
pub mod generators;
pub mod ir;
pub mod oracle;
pub mod strategies;
pub mod tree;

pub use tree::{BlackBoxTree, ColorId, ExplorationSession, NodeId, SearchTree};
