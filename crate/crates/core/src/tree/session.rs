use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{BlackBoxTree, ColorId, NodeId};

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("node {0} has not been explored")]
    NotExplored(NodeId),
}

/// What the oracle has revealed about an explored node, plus the position
/// information the explorer can derive on its own.
#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub parent: Option<NodeId>,
    pub depth: usize,
    pub degree: usize,
    pub color: Option<ColorId>,
    /// Child slots in tree order; `None` until that child is explored.
    children: Vec<Option<NodeId>>,
    /// Smallest child index that may still be unexplored.
    next_index: usize,
}

impl NodeInfo {
    pub fn is_leaf(&self) -> bool {
        self.degree == 0
    }

    /// Explored children, in child order.
    pub fn explored_children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.iter().filter_map(|c| *c)
    }

    pub fn all_children_explored(&self) -> bool {
        self.children.iter().all(Option::is_some)
    }
}

/// The oracle view of one hidden tree.
///
/// The root is explored at creation for free. Every later exploration of a
/// node that was never seen before costs exactly one unit; revisiting explored
/// nodes and `None` returns are free. Randomness comes from a seeded stream
/// owned by the session, so replays are deterministic.
pub struct ExplorationSession<'t, T: BlackBoxTree + ?Sized> {
    tree: &'t T,
    root: NodeId,
    nodes: FxHashMap<NodeId, NodeInfo>,
    /// Exploration order, root first.
    order: Vec<NodeId>,
    cost: u64,
    rng: ChaCha8Rng,
}

impl<'t, T: BlackBoxTree + ?Sized> ExplorationSession<'t, T> {
    pub fn new(tree: &'t T, seed: u64) -> Self {
        let root = tree.root();
        let mut session = ExplorationSession {
            tree,
            root,
            nodes: FxHashMap::default(),
            order: Vec::new(),
            cost: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        session.reveal(root, None, 0);
        session
    }

    fn reveal(&mut self, v: NodeId, parent: Option<NodeId>, depth: usize) {
        let degree = self.tree.degree(v);
        let color = if degree == 0 {
            self.tree.color(v)
        } else {
            None
        };
        self.nodes.insert(
            v,
            NodeInfo {
                parent,
                depth,
                degree,
                color,
                children: vec![None; degree],
                next_index: 0,
            },
        );
        self.order.push(v);
    }

    /// Explores child `index` of `v` if needed; returns it.
    fn visit_child(&mut self, v: NodeId, index: usize) -> NodeId {
        let info = &self.nodes[&v];
        if let Some(c) = info.children[index] {
            return c;
        }
        let depth = info.depth + 1;
        let c = self.tree.child(v, index);
        self.nodes.get_mut(&v).expect("explored").children[index] = Some(c);
        self.reveal(c, Some(v), depth);
        self.cost += 1;
        c
    }

    fn info_or_err(&self, v: NodeId) -> Result<&NodeInfo, SessionError> {
        self.nodes.get(&v).ok_or(SessionError::NotExplored(v))
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Explores the smallest-index child of `v` that is still unexplored.
    /// Returns `None` without cost once every child of `v` is explored.
    pub fn next_child(&mut self, v: NodeId) -> Result<Option<NodeId>, SessionError> {
        let info = self.nodes.get_mut(&v).ok_or(SessionError::NotExplored(v))?;
        while info.next_index < info.degree && info.children[info.next_index].is_some() {
            info.next_index += 1;
        }
        if info.next_index == info.degree {
            return Ok(None);
        }
        let index = info.next_index;
        info.next_index += 1;
        Ok(Some(self.visit_child(v, index)))
    }

    /// A uniformly random child of `v`, explored or not. `None` for leaves.
    pub fn random_child(&mut self, v: NodeId) -> Result<Option<NodeId>, SessionError> {
        let degree = self.info_or_err(v)?.degree;
        if degree == 0 {
            return Ok(None);
        }
        let index = self.rng.gen_range(0..degree);
        Ok(Some(self.visit_child(v, index)))
    }

    pub fn info(&self, v: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(&v)
    }

    pub fn is_explored(&self, v: NodeId) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn degree(&self, v: NodeId) -> Result<usize, SessionError> {
        Ok(self.info_or_err(v)?.degree)
    }

    pub fn color(&self, v: NodeId) -> Result<Option<ColorId>, SessionError> {
        Ok(self.info_or_err(v)?.color)
    }

    pub fn depth(&self, v: NodeId) -> Result<usize, SessionError> {
        Ok(self.info_or_err(v)?.depth)
    }

    /// Snapshot of the explored children of `v`, in child order.
    pub fn explored_children(&self, v: NodeId) -> Result<Vec<NodeId>, SessionError> {
        Ok(self.info_or_err(v)?.explored_children().collect())
    }

    /// Distinct non-root nodes explored so far.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn explored_count(&self) -> usize {
        self.nodes.len()
    }

    /// Explored nodes in the order they were first revealed.
    pub fn exploration_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Wrapper that counts every ground-truth access an oracle makes.
///
/// A session over an `AuditedTree` must fetch each node's degree exactly once
/// and issue exactly `cost` child lookups; anything else means some code path
/// read the hidden tree outside the oracle.
pub struct AuditedTree<T> {
    inner: T,
    degree_calls: Cell<u64>,
    child_calls: Cell<u64>,
    color_calls: Cell<u64>,
}

impl<T: BlackBoxTree> AuditedTree<T> {
    pub fn new(inner: T) -> Self {
        AuditedTree {
            inner,
            degree_calls: Cell::new(0),
            child_calls: Cell::new(0),
            color_calls: Cell::new(0),
        }
    }

    pub fn degree_calls(&self) -> u64 {
        self.degree_calls.get()
    }

    pub fn child_calls(&self) -> u64 {
        self.child_calls.get()
    }

    pub fn color_calls(&self) -> u64 {
        self.color_calls.get()
    }
}

impl<T: BlackBoxTree> BlackBoxTree for AuditedTree<T> {
    fn root(&self) -> NodeId {
        self.inner.root()
    }
    fn degree(&self, v: NodeId) -> usize {
        self.degree_calls.set(self.degree_calls.get() + 1);
        self.inner.degree(v)
    }
    fn child(&self, v: NodeId, index: usize) -> NodeId {
        self.child_calls.set(self.child_calls.get() + 1);
        self.inner.child(v, index)
    }
    fn color(&self, v: NodeId) -> Option<ColorId> {
        self.color_calls.set(self.color_calls.get() + 1);
        self.inner.color(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_mh;
    use crate::tree::SearchTree;
    use proptest::prelude::*;

    #[test]
    fn first_next_child_is_left_child() {
        let t = gen_mh(1).unwrap();
        let mut s = ExplorationSession::new(&t, 0);
        assert_eq!(s.cost(), 0);
        let c = s.next_child(t.root()).unwrap();
        assert_eq!(c, Some(t.children(t.root())[0]));
        assert_eq!(s.cost(), 1);
    }

    #[test]
    fn next_child_exhausts() {
        let t = gen_mh(1).unwrap();
        let mut s = ExplorationSession::new(&t, 0);
        let r = t.root();
        assert!(s.next_child(r).unwrap().is_some());
        assert!(s.next_child(r).unwrap().is_some());
        assert_eq!(s.next_child(r).unwrap(), None);
        assert_eq!(s.next_child(r).unwrap(), None);
        assert_eq!(s.cost(), 2);
    }

    #[test]
    fn leaf_queries_return_none_for_free() {
        let t = SearchTree::from_parents(&[(None, Some(3))]).unwrap();
        let mut s = ExplorationSession::new(&t, 0);
        assert_eq!(s.next_child(t.root()).unwrap(), None);
        assert_eq!(s.random_child(t.root()).unwrap(), None);
        assert_eq!(s.cost(), 0);
        assert_eq!(s.color(t.root()).unwrap(), Some(ColorId(3)));
    }

    #[test]
    fn unexplored_node_is_a_contract_error() {
        let t = gen_mh(2).unwrap();
        let mut s = ExplorationSession::new(&t, 0);
        let deep = t.leaves()[0];
        assert_eq!(s.next_child(deep), Err(SessionError::NotExplored(deep)));
        assert_eq!(s.random_child(deep), Err(SessionError::NotExplored(deep)));
    }

    #[test]
    fn repeated_random_child_is_free() {
        let t = gen_mh(1).unwrap();
        let mut s = ExplorationSession::new(&t, 9);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..50 {
            let c = s.random_child(t.root()).unwrap().unwrap();
            seen.insert(c);
            assert_eq!(s.cost(), seen.len() as u64);
        }
        assert_eq!(s.cost(), 2);
    }

    #[test]
    fn next_child_skips_children_found_by_random_child() {
        let t = gen_mh(1).unwrap();
        let mut s = ExplorationSession::new(&t, 1);
        let picked = s.random_child(t.root()).unwrap().unwrap();
        let other = s.next_child(t.root()).unwrap().unwrap();
        assert_ne!(picked, other);
        assert_eq!(s.next_child(t.root()).unwrap(), None);
        assert_eq!(s.cost(), 2);
    }

    #[test]
    fn random_child_is_uniform_on_two_children() {
        // 10^4 draws, each side must land in [0.47, 0.53].
        let t = gen_mh(1).unwrap();
        let mut s = ExplorationSession::new(&t, 2024);
        let left = t.children(t.root())[0];
        let hits = (0..10_000)
            .filter(|_| s.random_child(t.root()).unwrap() == Some(left))
            .count();
        let frac = hits as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "left fraction {frac}");
    }

    #[test]
    fn audited_tree_sees_one_fetch_per_node() {
        let t = AuditedTree::new(gen_mh(4).unwrap());
        let mut s = ExplorationSession::new(&t, 3);
        for _ in 0..20 {
            let mut v = s.root();
            while let Some(c) = s.random_child(v).unwrap() {
                v = c;
            }
        }
        assert_eq!(t.child_calls(), s.cost());
        assert_eq!(t.degree_calls(), s.explored_count() as u64);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Next(usize),
        Random(usize),
    }

    fn run(t: &SearchTree, seed: u64, ops: &[Op]) -> (Vec<NodeId>, u64) {
        let mut s = ExplorationSession::new(t, seed);
        for op in ops {
            let explored = s.exploration_order().to_vec();
            match *op {
                Op::Next(k) => {
                    let v = explored[k % explored.len()];
                    s.next_child(v).unwrap();
                }
                Op::Random(k) => {
                    let v = explored[k % explored.len()];
                    s.random_child(v).unwrap();
                }
            }
            assert_eq!(s.cost(), s.explored_count() as u64 - 1);
        }
        (s.exploration_order().to_vec(), s.cost())
    }

    proptest! {
        #[test]
        fn cost_tracks_distinct_explorations(
            seed in any::<u64>(),
            ops in prop::collection::vec(
                prop_oneof![any::<usize>().prop_map(Op::Next), any::<usize>().prop_map(Op::Random)],
                0..60,
            ),
        ) {
            let t = crate::generators::iso_shuffle(&gen_mh(4).unwrap(), seed);
            let a = run(&t, seed, &ops);
            let b = run(&t, seed, &ops);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn next_child_enumerates_stored_order(h in 1usize..5, seed in any::<u64>()) {
            let t = crate::generators::iso_shuffle(&gen_mh(h).unwrap(), seed);
            let mut s = ExplorationSession::new(&t, seed);
            let r = t.root();
            let mut got = Vec::new();
            while let Some(c) = s.next_child(r).unwrap() {
                got.push(c);
            }
            prop_assert_eq!(got.as_slice(), t.children(r));
            prop_assert_eq!(s.next_child(r).unwrap(), None);
        }
    }
}
