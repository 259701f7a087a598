//! Concrete search trees and the oracle interface used to explore them.
//!
//! A [`SearchTree`] is the hidden ground truth. Strategies never see it
//! directly; they go through an [`ExplorationSession`], which reveals a
//! node's degree (and color, for leaves) the first time it is visited and
//! counts every distinct non-root node it has ever explored.

mod format;
mod session;

use std::fmt;

use thiserror::Error;

pub use format::{load_tree, save_tree};
pub use session::{AuditedTree, ExplorationSession, NodeInfo, SessionError};

/// Node handle. Dense within one tree, meaningless across trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Leaf color. Only equality carries meaning; the order exists so that
/// serialization is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorId(pub u64);

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("node {0} is unary (exactly one child)")]
    UnaryNode(u64),
    #[error("internal node {0} carries a color")]
    ColoredInternal(u64),
    #[error("leaf {0} has no color")]
    UncoloredLeaf(u64),
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("parent links contain a cycle or unreachable node {0}")]
    Cycle(u64),
    #[error("tree would have {requested} nodes, cap is {cap}")]
    TooLarge { requested: u64, cap: u64 },
}

/// Read access to a hidden tree, the only thing an exploration oracle needs.
///
/// Implemented by [`SearchTree`] and by lazily materialized trees such as the
/// individualization-refinement adapter. Calls take `&self`; lazy
/// implementations use interior mutability.
pub trait BlackBoxTree {
    fn root(&self) -> NodeId;
    fn degree(&self, v: NodeId) -> usize;
    /// The `index`-th child of `v` in the tree's fixed child order.
    fn child(&self, v: NodeId, index: usize) -> NodeId;
    /// Color of `v` if it is a leaf.
    fn color(&self, v: NodeId) -> Option<ColorId>;
}

impl<T: BlackBoxTree + ?Sized> BlackBoxTree for &T {
    fn root(&self) -> NodeId {
        (**self).root()
    }
    fn degree(&self, v: NodeId) -> usize {
        (**self).degree(v)
    }
    fn child(&self, v: NodeId, index: usize) -> NodeId {
        (**self).child(v, index)
    }
    fn color(&self, v: NodeId) -> Option<ColorId> {
        (**self).color(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeRecord {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    color: Option<ColorId>,
}

/// Rooted tree with ordered children and colored leaves. Immutable once
/// built; every constructor validates the model invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTree {
    nodes: Vec<NodeRecord>,
    root: NodeId,
}

/// Ground-truth size figures, for tests and experiment records only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeMetrics {
    pub size: usize,
    pub leaf_count: usize,
    pub height: usize,
    pub max_degree: usize,
}

impl SearchTree {
    /// Hard ceiling on node count for generated or materialized trees.
    pub const MAX_NODES: u64 = 1 << 26;

    /// Builds a tree from `(parent, color)` pairs indexed by node id. Children
    /// of a node are ordered by increasing id.
    pub fn from_parents(entries: &[(Option<u32>, Option<u64>)]) -> Result<Self, TreeError> {
        let n = entries.len();
        let mut nodes: Vec<NodeRecord> = entries
            .iter()
            .map(|&(p, c)| NodeRecord {
                parent: p.map(NodeId),
                children: Vec::new(),
                color: c.map(ColorId),
            })
            .collect();
        let mut roots = Vec::new();
        for (i, &(p, _)) in entries.iter().enumerate() {
            match p {
                None => roots.push(i),
                Some(p) => {
                    let p = p as usize;
                    if p >= n || p == i {
                        return Err(TreeError::Cycle(i as u64));
                    }
                    nodes[p].children.push(NodeId(i as u32));
                }
            }
        }
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let tree = SearchTree {
            nodes,
            root: NodeId(roots[0] as u32),
        };
        tree.validate(|i| i as u64)?;
        Ok(tree)
    }

    /// Builds a tree from child lists indexed by node id. Used by generators
    /// that already hold children in their intended order.
    pub(crate) fn from_children(
        root: NodeId,
        children: Vec<Vec<NodeId>>,
        colors: Vec<Option<ColorId>>,
    ) -> Result<Self, TreeError> {
        let mut nodes: Vec<NodeRecord> = children
            .into_iter()
            .zip(colors)
            .map(|(children, color)| NodeRecord {
                parent: None,
                children,
                color,
            })
            .collect();
        for i in 0..nodes.len() {
            for k in 0..nodes[i].children.len() {
                let c = nodes[i].children[k].index();
                if c >= nodes.len() || nodes[c].parent.is_some() || c == root.index() {
                    return Err(TreeError::Cycle(c as u64));
                }
                nodes[c].parent = Some(NodeId(i as u32));
            }
        }
        let tree = SearchTree { nodes, root };
        tree.validate(|i| i as u64)?;
        Ok(tree)
    }

    /// Copies any black-box tree into a concrete one, in breadth-first
    /// order. Fails once more than `cap` nodes would be needed.
    pub fn materialize<T: BlackBoxTree + ?Sized>(tree: &T, cap: usize) -> Result<Self, TreeError> {
        let mut origin = vec![tree.root()];
        let mut children: Vec<Vec<NodeId>> = Vec::new();
        let mut colors = Vec::new();
        let mut head = 0;
        while head < origin.len() {
            let v = origin[head];
            let degree = tree.degree(v);
            if origin.len() + degree > cap {
                return Err(TreeError::TooLarge {
                    requested: (origin.len() + degree) as u64,
                    cap: cap as u64,
                });
            }
            let first = origin.len() as u32;
            children.push((first..first + degree as u32).map(NodeId).collect());
            origin.extend((0..degree).map(|i| tree.child(v, i)));
            colors.push(if degree == 0 { tree.color(v) } else { None });
            head += 1;
        }
        SearchTree::from_children(NodeId(0), children, colors)
    }

    /// Checks unary nodes, leaf coloring, and that every node hangs off the
    /// root. `label` maps internal indices back to user-facing ids for errors.
    pub(crate) fn validate(&self, label: impl Fn(usize) -> u64) -> Result<(), TreeError> {
        for (i, rec) in self.nodes.iter().enumerate() {
            match (rec.children.len(), rec.color) {
                (1, _) => return Err(TreeError::UnaryNode(label(i))),
                (0, None) => return Err(TreeError::UncoloredLeaf(label(i))),
                (d, Some(_)) if d > 0 => return Err(TreeError::ColoredInternal(label(i))),
                _ => {}
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        let mut count = 0;
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(TreeError::Cycle(label(v.index())));
            }
            count += 1;
            stack.extend(self.nodes[v.index()].children.iter().copied());
        }
        if count != self.nodes.len() {
            let missing = seen.iter().position(|s| !s).unwrap_or(0);
            return Err(TreeError::Cycle(label(missing)));
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v.index()].children
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.nodes[v.index()].parent
    }

    pub fn color(&self, v: NodeId) -> Option<ColorId> {
        self.nodes[v.index()].color
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.nodes[v.index()].children.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Leaves in breadth-first order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.bfs_order()
            .into_iter()
            .filter(|&v| self.is_leaf(v))
            .collect()
    }

    pub fn bfs_order(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        order.push(self.root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend_from_slice(self.children(v));
        }
        order
    }

    /// Depth of every node, indexed by node id.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for v in self.bfs_order() {
            for &c in self.children(v) {
                depth[c.index()] = depth[v.index()] + 1;
            }
        }
        depth
    }

    pub fn depth(&self, mut v: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(v) {
            v = p;
            d += 1;
        }
        d
    }

    /// Number of nodes in the subtree rooted at `v`, including `v`.
    pub fn subtree_size(&self, v: NodeId) -> usize {
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            count += 1;
            stack.extend_from_slice(self.children(u));
        }
        count
    }

    /// Number of nodes at depth at most `radius`.
    pub fn ball_size(&self, radius: usize) -> usize {
        self.depths().into_iter().filter(|&d| d <= radius).count()
    }

    /// Nodes at exactly depth `level`, in breadth-first order.
    pub fn level_nodes(&self, level: usize) -> Vec<NodeId> {
        let depths = self.depths();
        self.bfs_order()
            .into_iter()
            .filter(|v| depths[v.index()] == level)
            .collect()
    }

    /// Path from the root down to `v`, both included.
    pub fn root_path(&self, v: NodeId) -> Vec<NodeId> {
        let mut path = vec![v];
        let mut u = v;
        while let Some(p) = self.parent(u) {
            path.push(p);
            u = p;
        }
        path.reverse();
        path
    }

    pub fn metrics(&self) -> TreeMetrics {
        let depths = self.depths();
        TreeMetrics {
            size: self.nodes.len(),
            leaf_count: self.nodes.iter().filter(|r| r.children.is_empty()).count(),
            height: depths.into_iter().max().unwrap_or(0),
            max_degree: self
                .nodes
                .iter()
                .map(|r| r.children.len())
                .max()
                .unwrap_or(0),
        }
    }

    /// Same tree with every leaf color shifted by `delta`.
    pub fn with_color_offset(&self, delta: u64) -> SearchTree {
        let mut out = self.clone();
        for rec in &mut out.nodes {
            if let Some(c) = rec.color.as_mut() {
                c.0 += delta;
            }
        }
        out
    }

    /// Same tree with leaf colors replaced by `f(color)`.
    pub fn map_colors(&self, mut f: impl FnMut(ColorId) -> ColorId) -> SearchTree {
        let mut out = self.clone();
        for rec in &mut out.nodes {
            if let Some(c) = rec.color.as_mut() {
                *c = f(*c);
            }
        }
        out
    }
}

/// Exact size figures for a tree.
pub fn metrics(tree: &SearchTree) -> TreeMetrics {
    tree.metrics()
}

impl BlackBoxTree for SearchTree {
    fn root(&self) -> NodeId {
        self.root
    }
    fn degree(&self, v: NodeId) -> usize {
        self.nodes[v.index()].children.len()
    }
    fn child(&self, v: NodeId, index: usize) -> NodeId {
        self.nodes[v.index()].children[index]
    }
    fn color(&self, v: NodeId) -> Option<ColorId> {
        self.nodes[v.index()].color
    }
}
