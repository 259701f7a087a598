use crate::tree::{BlackBoxTree, ColorId, ExplorationSession, NodeId, SearchTree};

use super::canon::{Canonizer, NodeLabel, TreeView};
use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixTag {
    Leaf(ColorId),
    /// Internal, every child explored.
    Closed,
    /// Internal, some child still unexplored.
    Frontier,
}

#[derive(Debug, Clone)]
struct PrefixNode {
    origin: NodeId,
    depth: usize,
    tag: PrefixTag,
    children: Vec<NodeId>,
}

/// The explored part of a tree: a connected rooted subtree, each node tagged
/// leaf, closed or frontier. Node ids here are local (dense, root = 0);
/// [`ExploredPrefix::origin`] maps back to the source tree.
#[derive(Debug, Clone)]
pub struct ExploredPrefix {
    nodes: Vec<PrefixNode>,
}

impl ExploredPrefix {
    /// Everything the session has explored so far.
    pub fn from_session<T: BlackBoxTree + ?Sized>(session: &ExplorationSession<'_, T>) -> Self {
        Self::collect(session.root(), |v| {
            let info = session.info(v).expect("explored");
            let tag = match (info.color, info.is_leaf(), info.all_children_explored()) {
                (Some(c), true, _) => PrefixTag::Leaf(c),
                (_, _, true) => PrefixTag::Closed,
                _ => PrefixTag::Frontier,
            };
            (info.depth, tag, info.explored_children().collect())
        })
    }

    /// Ground-truth prefix of a full tree down to depth `max_depth`; deeper
    /// internal nodes become frontier. Test-side use only.
    pub fn from_tree(tree: &SearchTree, max_depth: usize) -> Self {
        let depths = tree.depths();
        Self::collect(tree.root(), |v| {
            let d = depths[v.index()];
            match tree.color(v) {
                Some(c) => (d, PrefixTag::Leaf(c), Vec::new()),
                None if d >= max_depth => (d, PrefixTag::Frontier, Vec::new()),
                None => (d, PrefixTag::Closed, tree.children(v).to_vec()),
            }
        })
    }

    fn collect(
        root: NodeId,
        mut describe: impl FnMut(NodeId) -> (usize, PrefixTag, Vec<NodeId>),
    ) -> Self {
        let mut nodes: Vec<PrefixNode> = Vec::new();
        let mut queue = vec![root];
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            let (depth, tag, kids) = describe(v);
            let first = queue.len() as u32;
            let local: Vec<NodeId> = (first..first + kids.len() as u32).map(NodeId).collect();
            queue.extend(kids);
            nodes.push(PrefixNode {
                origin: v,
                depth,
                tag,
                children: local,
            });
        }
        ExploredPrefix { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn origin(&self, local: NodeId) -> NodeId {
        self.nodes[local.index()].origin
    }

    pub fn tag(&self, local: NodeId) -> PrefixTag {
        self.nodes[local.index()].tag
    }

    pub fn depth(&self, local: NodeId) -> usize {
        self.nodes[local.index()].depth
    }

    /// Number of prefix nodes at depth at most `radius`.
    pub fn ball_size(&self, radius: usize) -> usize {
        self.nodes.iter().filter(|n| n.depth <= radius).count()
    }

    /// Every node above depth `h` must have all of its children present.
    pub fn check_complete(&self, h: usize) -> Result<(), OracleError> {
        match self
            .nodes
            .iter()
            .find(|n| n.depth < h && n.tag == PrefixTag::Frontier)
        {
            Some(n) => Err(OracleError::PrefixIncomplete {
                node: n.origin,
                depth: n.depth,
            }),
            None => Ok(()),
        }
    }
}

impl TreeView for ExploredPrefix {
    fn view_root(&self) -> NodeId {
        NodeId(0)
    }
    fn view_children(&self, v: NodeId) -> &[NodeId] {
        &self.nodes[v.index()].children
    }
    fn label(&self, v: NodeId) -> NodeLabel {
        match self.nodes[v.index()].tag {
            PrefixTag::Leaf(c) => NodeLabel::Leaf(c),
            PrefixTag::Closed => NodeLabel::Internal,
            PrefixTag::Frontier => NodeLabel::Frontier,
        }
    }
    fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Whether the two prefixes truncated at depth `h` are isomorphic. Non-leaf
/// nodes at depth `h` are unlabeled placeholders; leaves at depth ≤ `h` keep
/// their colors. Both prefixes must be complete above depth `h`.
pub fn truncated_iso(
    p1: &ExploredPrefix,
    p2: &ExploredPrefix,
    h: usize,
) -> Result<bool, OracleError> {
    p1.check_complete(h)?;
    p2.check_complete(h)?;
    let mut canon = Canonizer::new();
    Ok(canon.root_id(p1, Some(h)) == canon.root_id(p2, Some(h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_mh, iso_shuffle};
    use crate::oracle::ahu_code;
    use crate::tree::load_tree;

    fn full(t: &SearchTree) -> ExploredPrefix {
        ExploredPrefix::from_tree(t, usize::MAX)
    }

    #[test]
    fn m4_against_itself() {
        let m4 = gen_mh(4).unwrap();
        assert!(truncated_iso(&full(&m4), &full(&m4), 2).unwrap());
    }

    #[test]
    fn shallow_leaf_breaks_truncated_iso() {
        let m4 = gen_mh(4).unwrap();
        // Root with a leaf child at depth 1 and an 𝓜₃-like right side.
        let mut doc = String::from("tree 17\n0 - -\n1 0 100\n2 0 -\n");
        let m3 = gen_mh(3).unwrap();
        for v in m3.bfs_order().into_iter().skip(1) {
            let p = m3.parent(v).unwrap().0 + 2;
            let c = m3.color(v).map_or("-".to_string(), |c| c.0.to_string());
            doc.push_str(&format!("{} {} {}\n", v.0 + 2, p, c));
        }
        let pruned = load_tree(&doc).unwrap();
        assert!(!truncated_iso(&full(&m4), &full(&pruned), 2).unwrap());
    }

    #[test]
    fn shuffled_m4_matches_at_every_level() {
        let m4 = gen_mh(4).unwrap();
        let s = iso_shuffle(&m4, 77);
        for h in 0..=4 {
            let (a, b) = (full(&m4), full(&s));
            assert!(truncated_iso(&a, &b, h).unwrap());
            assert_eq!(
                ahu_code(&ExploredPrefix::from_tree(&m4, h), NodeId(0)),
                ahu_code(&ExploredPrefix::from_tree(&s, h), NodeId(0)),
            );
        }
    }

    #[test]
    fn leaf_colors_count_at_full_depth() {
        let m2 = gen_mh(2).unwrap();
        let other = m2.with_color_offset(4);
        assert!(truncated_iso(&full(&m2), &full(&other), 1).unwrap());
        assert!(!truncated_iso(&full(&m2), &full(&other), 2).unwrap());
    }

    #[test]
    fn incomplete_prefix_is_an_error() {
        let m3 = gen_mh(3).unwrap();
        let mut s = ExplorationSession::new(&m3, 0);
        let r = s.root();
        let c = s.next_child(r).unwrap().unwrap();
        s.next_child(c).unwrap();
        let p = ExploredPrefix::from_session(&s);
        assert!(matches!(
            truncated_iso(&p, &p, 2),
            Err(OracleError::PrefixIncomplete { .. })
        ));
        // The root itself still has an unexplored child.
        assert!(matches!(
            truncated_iso(&p, &p, 1),
            Err(OracleError::PrefixIncomplete { .. })
        ));
        assert!(truncated_iso(&p, &p, 0).unwrap());
    }

    #[test]
    fn session_prefix_tags() {
        let m2 = gen_mh(2).unwrap();
        let mut s = ExplorationSession::new(&m2, 0);
        let r = s.root();
        while s.next_child(r).unwrap().is_some() {}
        let p = ExploredPrefix::from_session(&s);
        assert_eq!(p.len(), 3);
        assert_eq!(p.tag(NodeId(0)), PrefixTag::Closed);
        assert_eq!(p.tag(NodeId(1)), PrefixTag::Frontier);
        assert_eq!(p.ball_size(1), 3);
        assert!(truncated_iso(&p, &p, 1).unwrap());
    }
}
