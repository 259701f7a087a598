use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::oracle::{truncated_iso, ExploredPrefix, Side};
use crate::tree::{BlackBoxTree, ExplorationSession, NodeId, SearchTree, SessionError};

use super::walk::capped_walk;
use super::{verdict, Outcome, StrategyError, Verdict, WallStats};

/// A node `v` at level `h` of one of the two trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub side: Side,
    pub v: NodeId,
    pub h: usize,
}

/// `s1` bounds the work in the tree without the split node, `s2` the work
/// in the tree that hosts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCost {
    pub s1: usize,
    pub s2: usize,
}

/// How the split-based search walks from each level-`h` node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WalkMode {
    #[default]
    Random,
    /// Always descend into the first child (first explored child if any).
    FirstChild,
}

/// Incremental breadth-first scan of the subtree under one node, one child
/// visit per [`Scan::visit`]. Children already explored are visited first,
/// then fresh ones via `next_child`; both count as visits.
pub(crate) struct Scan {
    limit: Option<usize>,
    queue: VecDeque<(NodeId, usize)>,
    current: Option<(NodeId, usize)>,
    pending: VecDeque<NodeId>,
    leaves: Vec<NodeId>,
    visits: u64,
}

impl Scan {
    pub(crate) fn new<T: BlackBoxTree + ?Sized>(
        session: &ExplorationSession<'_, T>,
        v: NodeId,
        limit: Option<usize>,
    ) -> Result<Self, SessionError> {
        let mut scan = Scan {
            limit,
            queue: VecDeque::new(),
            current: None,
            pending: VecDeque::new(),
            leaves: Vec::new(),
            visits: 0,
        };
        if limit == Some(0) || session.degree(v)? == 0 {
            scan.leaves.push(v);
        } else {
            scan.queue.push_back((v, 0));
        }
        Ok(scan)
    }

    /// Skips over nodes with nothing left to visit (free). True when the
    /// whole scan is finished.
    pub(crate) fn settle<T: BlackBoxTree + ?Sized>(
        &mut self,
        session: &ExplorationSession<'_, T>,
    ) -> Result<bool, SessionError> {
        loop {
            if let Some((u, _)) = self.current {
                let info = session.info(u).ok_or(SessionError::NotExplored(u))?;
                if !self.pending.is_empty() || !info.all_children_explored() {
                    return Ok(false);
                }
                self.current = None;
            }
            match self.queue.pop_front() {
                None => return Ok(true),
                Some((u, d)) => {
                    self.pending = session.explored_children(u)?.into();
                    self.current = Some((u, d));
                }
            }
        }
    }

    /// Visits the next child. Only valid after `settle` returned false.
    pub(crate) fn visit<T: BlackBoxTree + ?Sized>(
        &mut self,
        session: &mut ExplorationSession<'_, T>,
    ) -> Result<NodeId, SessionError> {
        let (u, d) = self.current.expect("settled scan has a current node");
        let c = match self.pending.pop_front() {
            Some(c) => c,
            None => session.next_child(u)?.expect("unexplored child remains"),
        };
        self.visits += 1;
        if self.limit == Some(d + 1) || session.degree(c)? == 0 {
            self.leaves.push(c);
        } else {
            self.queue.push_back((c, d + 1));
        }
        Ok(c)
    }

    pub(crate) fn visits(&self) -> u64 {
        self.visits
    }

    pub(crate) fn into_leaves(self) -> Vec<NodeId> {
        self.leaves
    }
}

/// Breadth-first scan below `v` down to `h` levels (unbounded if `None`),
/// giving up once more than `s` child visits would be needed.
///
/// Returns the leaves of the scanned subtree (nodes at level `h` count as
/// leaves) and the number of visits, or `None` when the limit was exceeded.
/// Visits of already explored nodes count toward `s` but are free in the
/// session cost. With `h = 0`, or when `v` is itself a leaf, the answer is
/// `[v]` at zero visits.
pub fn bfs_subtree<T: BlackBoxTree + ?Sized>(
    session: &mut ExplorationSession<'_, T>,
    v: NodeId,
    h: Option<usize>,
    s: Option<u64>,
) -> Result<Option<(Vec<NodeId>, u64)>, SessionError> {
    let mut scan = Scan::new(session, v, h)?;
    while !scan.settle(session)? {
        scan.visit(session)?;
        if s.is_some_and(|s| scan.visits > s) {
            return Ok(None);
        }
    }
    let visits = scan.visits;
    Ok(Some((scan.into_leaves(), visits)))
}

fn first_child_walk<T: BlackBoxTree + ?Sized>(
    session: &mut ExplorationSession<'_, T>,
    v: NodeId,
    cap: usize,
) -> Result<Option<NodeId>, SessionError> {
    let mut u = v;
    let mut steps = 0;
    while session.degree(u)? > 0 {
        if steps == cap {
            return Ok(None);
        }
        u = match session.explored_children(u)?.first() {
            Some(&c) => c,
            None => session.next_child(u)?.expect("internal node has a child"),
        };
        steps += 1;
    }
    Ok(Some(u))
}

/// The search with a given split, run on `a` (hosting the split node) and
/// `b`. Returns leaves `(in a, in b)` on success.
fn search_with_split<T: BlackBoxTree + ?Sized>(
    a: &mut ExplorationSession<'_, T>,
    b: &mut ExplorationSession<'_, T>,
    split: Split,
    mode: WalkMode,
    stats: &mut WallStats,
) -> Result<Option<(NodeId, NodeId)>, StrategyError> {
    let h = split.h;
    let (ra, rb) = (a.root(), b.root());
    let (frontier_b, s) = bfs_subtree(b, rb, Some(h), None)?.expect("no cost limit");
    if bfs_subtree(a, ra, Some(h), Some(s))?.is_none() {
        return Ok(None);
    }
    let (pa, pb) = (
        ExploredPrefix::from_session(a),
        ExploredPrefix::from_session(b),
    );
    if !truncated_iso(&pa, &pb, h)? {
        return Ok(None);
    }
    if !a.is_explored(split.v) || a.depth(split.v)? != h {
        return Err(StrategyError::InvalidSplit {
            side: split.side,
            v: split.v,
            h,
        });
    }

    let (below_v, _) = bfs_subtree(a, split.v, None, None)?.expect("no cost limit");
    let mut colors = FxHashMap::default();
    for l in below_v {
        colors.entry(a.color(l)?.expect("leaf")).or_insert(l);
    }

    // Path budget for the walks; doubled on overrun, and the walk phase
    // restarts with everything explored so far kept.
    let ball = s + 1;
    let mut budget = ball * (ball as f64 + 2.0).log2().ceil() as u64;
    loop {
        stats.budgets.push(budget);
        let mut steps = 0u64;
        let mut overrun = false;
        for &n in &frontier_b {
            let cap = (budget - steps) as usize;
            let leaf = match mode {
                WalkMode::Random => capped_walk(b, n, cap)?,
                WalkMode::FirstChild => first_child_walk(b, n, cap)?,
            };
            let Some(l) = leaf else {
                overrun = true;
                break;
            };
            stats.iterations += 1;
            steps += (b.depth(l)? - b.depth(n)?) as u64;
            if let Some(&la) = colors.get(&b.color(l)?.expect("leaf")) {
                return Ok(Some((la, l)));
            }
        }
        if !overrun {
            return Ok(None);
        }
        budget *= 2;
        stats.restarts += 1;
    }
}

/// Zero-error search given a split: scans both balls of radius `split.h`
/// (the split tree limited to the other tree's cost), compares them, then
/// collects every leaf under the split node and walks once from each
/// level-`h` node of the other tree, looking for a color collision.
pub fn bidirectional_with_split<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
    split: Split,
    mode: WalkMode,
) -> Result<Verdict, StrategyError> {
    let mut stats = WallStats::default();
    let outcome = run_split(s1, s2, split, mode, &mut stats)?;
    verdict(s1, s2, outcome, stats)
}

/// Runs the split search with the split tree first and maps the leaves
/// back to tree order.
pub(crate) fn run_split<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
    split: Split,
    mode: WalkMode,
    stats: &mut WallStats,
) -> Result<Outcome, StrategyError> {
    let outcome = match split.side {
        Side::First => match search_with_split(s1, s2, split, mode, stats)? {
            Some((l1, l2)) => Outcome::MatchFound { l1, l2 },
            None => Outcome::NotIsomorphic,
        },
        Side::Second => match search_with_split(s2, s1, split, mode, stats)? {
            Some((l2, l1)) => Outcome::MatchFound { l1, l2 },
            None => Outcome::NotIsomorphic,
        },
    };
    Ok(outcome)
}

fn other(tree: Side) -> Side {
    match tree {
        Side::First => Side::Second,
        Side::Second => Side::First,
    }
}

fn pick<'a>(t1: &'a SearchTree, t2: &'a SearchTree, side: Side) -> &'a SearchTree {
    match side {
        Side::First => t1,
        Side::Second => t2,
    }
}

/// Exact cost of a split, from the full trees. `s1` is the size of the
/// other tree's ball of radius `h`; `s2` equals `s1` when the two balls
/// differ and is the size of the subtree under `v` otherwise.
pub fn split_cost(t1: &SearchTree, t2: &SearchTree, split: Split) -> SplitCost {
    let host = pick(t1, t2, split.side);
    let rest = pick(t1, t2, other(split.side));
    let s1 = rest.ball_size(split.h);
    let same = truncated_iso(
        &ExploredPrefix::from_tree(host, split.h),
        &ExploredPrefix::from_tree(rest, split.h),
        split.h,
    )
    .expect("full trees are complete prefixes");
    let s2 = if same { host.subtree_size(split.v) } else { s1 };
    SplitCost { s1, s2 }
}

/// `max(s1, s2) <= 4 d min(sqrt|T1|, sqrt|T2|)`, `d` the largest degree in
/// either tree (taken as 1 when both trees are single leaves).
pub fn is_balanced(t1: &SearchTree, t2: &SearchTree, split: Split) -> bool {
    let cost = split_cost(t1, t2, split);
    let d = t1.metrics().max_degree.max(t2.metrics().max_degree).max(1);
    let bound = 4.0 * d as f64 * (t1.len().min(t2.len()) as f64).sqrt();
    cost.s1.max(cost.s2) as f64 <= bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_mh, gen_noniso_pair, iso_shuffle};
    use crate::tree::load_tree;

    #[test]
    fn full_scan_of_m3() {
        let m3 = gen_mh(3).unwrap();
        let mut s = ExplorationSession::new(&m3, 0);
        let s_root = s.root();
        let (leaves, visits) = bfs_subtree(&mut s, s_root, None, None).unwrap().unwrap();
        assert_eq!(leaves.len(), 8);
        assert_eq!(visits, 14);
        assert_eq!(s.cost(), 14);
        // A rerun visits the same nodes for free.
        let (again, visits) = bfs_subtree(&mut s, s_root, None, None).unwrap().unwrap();
        assert_eq!((again.len(), visits, s.cost()), (8, 14, 14));
    }

    #[test]
    fn zero_height_returns_the_node() {
        let m3 = gen_mh(3).unwrap();
        let mut s = ExplorationSession::new(&m3, 0);
        let r = s.root();
        assert_eq!(
            bfs_subtree(&mut s, r, Some(0), Some(0)).unwrap(),
            Some((vec![r], 0))
        );
        assert_eq!(s.cost(), 0);
    }

    #[test]
    fn cost_limit_is_exact() {
        let m3 = gen_mh(3).unwrap();
        let mut s = ExplorationSession::new(&m3, 0);
        let r = s.root();
        assert_eq!(bfs_subtree(&mut s, r, None, Some(5)).unwrap(), None);
        assert!(bfs_subtree(&mut s, r, None, Some(14)).unwrap().is_some());
        let mut s = ExplorationSession::new(&m3, 0);
        assert_eq!(bfs_subtree(&mut s, r, None, Some(13)).unwrap(), None);
    }

    #[test]
    fn height_limit_returns_level_nodes() {
        let m4 = gen_mh(4).unwrap();
        let mut s = ExplorationSession::new(&m4, 0);
        let r = s.root();
        let (level2, visits) = bfs_subtree(&mut s, r, Some(2), None).unwrap().unwrap();
        assert_eq!((level2.len(), visits), (4, 6));
        assert!(level2.iter().all(|&v| s.depth(v).unwrap() == 2));
    }

    #[test]
    fn m4_level_two_split_cost() {
        let m4 = gen_mh(4).unwrap();
        let t = iso_shuffle(&m4, 1);
        let v = m4.level_nodes(2)[1];
        let split = Split {
            side: Side::First,
            v,
            h: 2,
        };
        assert_eq!(split_cost(&m4, &t, split), SplitCost { s1: 7, s2: 7 });
        assert!(is_balanced(&m4, &t, split));
        let root = Split {
            side: Side::First,
            v: m4.root(),
            h: 0,
        };
        assert_eq!(split_cost(&m4, &t, root), SplitCost { s1: 1, s2: 31 });
    }

    #[test]
    fn root_split_of_large_mh_is_unbalanced() {
        for h in 3..6 {
            let m = gen_mh(2 * h).unwrap();
            let root = Split {
                side: Side::Second,
                v: m.root(),
                h: 0,
            };
            assert!(!is_balanced(&m, &m, root), "h = {h}");
        }
        let leaf = gen_mh(0).unwrap();
        let root = Split {
            side: Side::First,
            v: leaf.root(),
            h: 0,
        };
        assert!(is_balanced(&leaf, &leaf, root));
    }

    #[test]
    fn differing_balls_cost_s1_twice() {
        // Level-1 degrees 2 vs 3.
        let a = load_tree("tree 5\n0 - -\n1 0 -\n2 0 3\n3 1 1\n4 1 2\n").unwrap();
        let b = load_tree("tree 4\n0 - -\n1 0 1\n2 0 2\n3 0 3\n").unwrap();
        let split = Split {
            side: Side::First,
            v: NodeId(1),
            h: 1,
        };
        assert_eq!(split_cost(&a, &b, split), SplitCost { s1: 4, s2: 4 });
    }

    #[test]
    fn split_search_on_shuffled_mh_always_matches() {
        for h in [2usize, 5, 8] {
            let m = gen_mh(h).unwrap();
            let t = iso_shuffle(&m, h as u64);
            let level = h.div_ceil(2);
            for (i, &v) in m.level_nodes(level).iter().enumerate().take(6) {
                for mode in [WalkMode::Random, WalkMode::FirstChild] {
                    let mut s1 = ExplorationSession::new(&m, i as u64);
                    let mut s2 = ExplorationSession::new(&t, i as u64 + 7);
                    let split = Split {
                        side: Side::First,
                        v,
                        h: level,
                    };
                    let out = bidirectional_with_split(&mut s1, &mut s2, split, mode).unwrap();
                    assert!(out.outcome.is_match(), "h {h} mode {mode:?}");
                }
            }
        }
    }

    #[test]
    fn split_in_second_tree_maps_leaves_back() {
        let m = gen_mh(6).unwrap();
        let t = iso_shuffle(&m, 3);
        let v = t.level_nodes(3)[5];
        let mut s1 = ExplorationSession::new(&m, 0);
        let mut s2 = ExplorationSession::new(&t, 1);
        let split = Split {
            side: Side::Second,
            v,
            h: 3,
        };
        let out = bidirectional_with_split(&mut s1, &mut s2, split, WalkMode::Random).unwrap();
        let Outcome::MatchFound { l1, l2 } = out.outcome else {
            panic!("expected a match")
        };
        assert_eq!(m.color(l1), t.color(l2));
    }

    #[test]
    fn disjoint_colors_are_rejected() {
        let (a, b) = gen_noniso_pair(5, 2).unwrap();
        let v = a.level_nodes(3)[0];
        let mut s1 = ExplorationSession::new(&a, 0);
        let mut s2 = ExplorationSession::new(&b, 1);
        let split = Split {
            side: Side::First,
            v,
            h: 3,
        };
        let out = bidirectional_with_split(&mut s1, &mut s2, split, WalkMode::Random).unwrap();
        assert_eq!(out.outcome, Outcome::NotIsomorphic);
        assert_eq!(out.stats.iterations, 8);
    }

    #[test]
    fn shape_mismatch_skips_the_walks() {
        let a = gen_mh(4).unwrap();
        let b = load_tree("tree 7\n0 - -\n1 0 1\n2 0 -\n3 2 2\n4 2 -\n5 4 3\n6 4 4\n").unwrap();
        let v = a.level_nodes(2)[0];
        let mut s1 = ExplorationSession::new(&a, 0);
        let mut s2 = ExplorationSession::new(&b, 1);
        let split = Split {
            side: Side::First,
            v,
            h: 2,
        };
        let out = bidirectional_with_split(&mut s1, &mut s2, split, WalkMode::Random).unwrap();
        assert_eq!(out.outcome, Outcome::NotIsomorphic);
        assert_eq!(out.stats.iterations, 0);
        assert!(out.stats.budgets.is_empty());
    }

    #[test]
    fn wrong_level_is_an_error() {
        let m = gen_mh(4).unwrap();
        let v = m.level_nodes(3)[0];
        let mut s1 = ExplorationSession::new(&m, 0);
        let mut s2 = ExplorationSession::new(&m, 1);
        let split = Split {
            side: Side::First,
            v,
            h: 2,
        };
        assert!(matches!(
            bidirectional_with_split(&mut s1, &mut s2, split, WalkMode::Random),
            Err(StrategyError::InvalidSplit { .. })
        ));
    }

    #[test]
    fn tight_path_budget_forces_restarts() {
        // The radius-1 ball has 3 nodes, so the first budget is 9 steps: one
        // walk of length 9. Whichever level-1 node is walked second needs a
        // restart.
        let m = gen_mh(10).unwrap();
        let t = iso_shuffle(&m, 4);
        let mut restarts = Vec::new();
        for v in m.level_nodes(1) {
            let mut s1 = ExplorationSession::new(&m, 0);
            let mut s2 = ExplorationSession::new(&t, 1);
            let split = Split {
                side: Side::First,
                v,
                h: 1,
            };
            let out = bidirectional_with_split(&mut s1, &mut s2, split, WalkMode::Random).unwrap();
            assert!(out.outcome.is_match());
            assert_eq!(out.stats.budgets[0], 9);
            assert!(out.stats.budgets.windows(2).all(|w| w[1] == 2 * w[0]));
            restarts.push(out.stats.restarts);
        }
        restarts.sort();
        assert_eq!(restarts, vec![0, 1]);
    }
}
