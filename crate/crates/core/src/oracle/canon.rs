use rustc_hash::FxHashMap;

use crate::tree::{ColorId, NodeId, SearchTree};

/// How a node presents itself to canonization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    Leaf(ColorId),
    /// Explored node whose children are (partly) unknown, or that sits on a
    /// truncation boundary. Carries no further information.
    Frontier,
    Internal,
}

/// Minimal rooted-tree view shared by full trees and explored prefixes.
pub trait TreeView {
    fn view_root(&self) -> NodeId;
    fn view_children(&self, v: NodeId) -> &[NodeId];
    fn label(&self, v: NodeId) -> NodeLabel;
    fn node_count(&self) -> usize;
}

impl TreeView for SearchTree {
    fn view_root(&self) -> NodeId {
        self.root()
    }
    fn view_children(&self, v: NodeId) -> &[NodeId] {
        self.children(v)
    }
    fn label(&self, v: NodeId) -> NodeLabel {
        match self.color(v) {
            Some(c) => NodeLabel::Leaf(c),
            None => NodeLabel::Internal,
        }
    }
    fn node_count(&self) -> usize {
        self.len()
    }
}

const TAG_LEAF: u8 = 0x00;
const TAG_FRONTIER: u8 = 0x01;
const TAG_INTERNAL: u8 = 0x02;

/// Canonical byte string of a rooted colored subtree.
///
/// Leaf: `0x00` + color as 8 big-endian bytes. Frontier: `0x01`. Internal:
/// `0x02` + child count (u32 BE) + each child code, sorted bytewise and
/// prefixed by its length (u32 BE).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AhuCode(pub Vec<u8>);

/// Canonical code of the subtree of `view` rooted at `v`.
pub fn ahu_code<V: TreeView + ?Sized>(view: &V, v: NodeId) -> AhuCode {
    // Iterative post-order so deep trees cannot overflow the stack.
    let mut codes: FxHashMap<NodeId, Vec<u8>> = FxHashMap::default();
    let mut stack = vec![(v, false)];
    while let Some((u, expanded)) = stack.pop() {
        let label = view.label(u);
        let kids = view.view_children(u);
        if !expanded && label == NodeLabel::Internal && !kids.is_empty() {
            stack.push((u, true));
            stack.extend(kids.iter().map(|&c| (c, false)));
            continue;
        }
        let code = match label {
            NodeLabel::Leaf(c) => {
                let mut b = Vec::with_capacity(9);
                b.push(TAG_LEAF);
                b.extend_from_slice(&c.0.to_be_bytes());
                b
            }
            NodeLabel::Frontier => vec![TAG_FRONTIER],
            NodeLabel::Internal => {
                let mut parts: Vec<Vec<u8>> = kids
                    .iter()
                    .map(|c| codes.remove(c).expect("child code computed"))
                    .collect();
                parts.sort_unstable();
                let mut b =
                    Vec::with_capacity(5 + parts.iter().map(|p| p.len() + 4).sum::<usize>());
                b.push(TAG_INTERNAL);
                b.extend_from_slice(&(parts.len() as u32).to_be_bytes());
                for p in parts {
                    b.extend_from_slice(&(p.len() as u32).to_be_bytes());
                    b.extend_from_slice(&p);
                }
                b
            }
        };
        codes.insert(u, code);
    }
    AhuCode(codes.remove(&v).expect("root code computed"))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CanonKey {
    Leaf(ColorId),
    Frontier,
    Node(Vec<u32>),
}

/// Interning form of the same canonization: equal ids iff equal codes.
/// One `Canonizer` must be shared by every tree whose ids get compared.
#[derive(Debug, Default)]
pub struct Canonizer {
    table: FxHashMap<CanonKey, u32>,
}

impl Canonizer {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, key: CanonKey) -> u32 {
        let next = self.table.len() as u32;
        *self.table.entry(key).or_insert(next)
    }

    /// Canonical id of every node reachable from the root, indexed by node
    /// id. Nodes deeper than `cutoff` get no id; non-leaf nodes exactly at
    /// `cutoff` are treated as frontier placeholders.
    pub fn ids<V: TreeView + ?Sized>(
        &mut self,
        view: &V,
        cutoff: Option<usize>,
    ) -> Vec<Option<u32>> {
        let n = view.node_count();
        let mut ids = vec![None; n];
        // Breadth-first order with depths, then fill in reverse.
        let mut order = vec![(view.view_root(), 0usize)];
        let mut head = 0;
        while head < order.len() {
            let (v, d) = order[head];
            head += 1;
            if cutoff.is_some_and(|h| d >= h) {
                continue;
            }
            if view.label(v) == NodeLabel::Internal {
                order.extend(view.view_children(v).iter().map(|&c| (c, d + 1)));
            }
        }
        for &(v, d) in order.iter().rev() {
            let key = match view.label(v) {
                NodeLabel::Leaf(c) => CanonKey::Leaf(c),
                NodeLabel::Frontier => CanonKey::Frontier,
                NodeLabel::Internal if cutoff == Some(d) => CanonKey::Frontier,
                NodeLabel::Internal => {
                    let mut kids: Vec<u32> = view
                        .view_children(v)
                        .iter()
                        .map(|c| ids[c.index()].expect("child id computed"))
                        .collect();
                    kids.sort_unstable();
                    CanonKey::Node(kids)
                }
            };
            ids[v.index()] = Some(self.intern(key));
        }
        ids
    }

    pub fn root_id<V: TreeView + ?Sized>(&mut self, view: &V, cutoff: Option<usize>) -> u32 {
        self.ids(view, cutoff)[view.view_root().index()].expect("root id")
    }
}

/// Ground truth: whether a color-preserving isomorphism between the two
/// trees exists.
pub fn trees_isomorphic(t1: &SearchTree, t2: &SearchTree) -> bool {
    let mut canon = Canonizer::new();
    canon.root_id(t1, None) == canon.root_id(t2, None)
}
