use std::collections::BTreeMap;
use std::fmt;

use crate::tree::{ColorId, NodeId, SearchTree};

use super::canon::Canonizer;
use super::OracleError;

/// Node cap per tree for [`verify_axiom`].
pub const AXIOM_NODE_CAP: usize = 2048;

/// A vertex bijection between two trees, indexed by first-tree node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoMapping {
    pub forward: Vec<NodeId>,
}

impl IsoMapping {
    pub fn image(&self, v: NodeId) -> NodeId {
        self.forward[v.index()]
    }
}

fn path_to_root(tree: &SearchTree, v: NodeId) -> Vec<NodeId> {
    tree.root_path(v)
}

/// Pairs two equal-code subtrees node by node.
fn map_equal(
    t1: &SearchTree,
    ids1: &[Option<u32>],
    t2: &SearchTree,
    ids2: &[Option<u32>],
    a: NodeId,
    b: NodeId,
    forward: &mut [Option<NodeId>],
) {
    let mut stack = vec![(a, b)];
    while let Some((x, y)) = stack.pop() {
        forward[x.index()] = Some(y);
        stack.extend(pair_children(ids1, ids2, t1.children(x), t2.children(y)));
    }
}

/// Matches two child lists with equal code multisets by sorting on code.
fn pair_children(
    ids1: &[Option<u32>],
    ids2: &[Option<u32>],
    k1: &[NodeId],
    k2: &[NodeId],
) -> Vec<(NodeId, NodeId)> {
    let mut s1: Vec<NodeId> = k1.to_vec();
    let mut s2: Vec<NodeId> = k2.to_vec();
    s1.sort_by_key(|c| ids1[c.index()]);
    s2.sort_by_key(|c| ids2[c.index()]);
    s1.into_iter().zip(s2).collect()
}

fn constrained_with_ids(
    t1: &SearchTree,
    ids1: &[Option<u32>],
    l1: NodeId,
    t2: &SearchTree,
    ids2: &[Option<u32>],
    l2: NodeId,
) -> Option<IsoMapping> {
    if !t1.is_leaf(l1) || !t2.is_leaf(l2) {
        return None;
    }
    let p1 = path_to_root(t1, l1);
    let p2 = path_to_root(t2, l2);
    if p1.len() != p2.len() {
        return None;
    }
    // The image of the root-to-l1 path is forced; codes must agree level by level.
    if p1
        .iter()
        .zip(&p2)
        .any(|(a, b)| ids1[a.index()] != ids2[b.index()])
    {
        return None;
    }
    let mut forward: Vec<Option<NodeId>> = vec![None; t1.len()];
    for k in 0..p1.len() {
        let (a, b) = (p1[k], p2[k]);
        forward[a.index()] = Some(b);
        let Some((&a_next, &b_next)) = p1.get(k + 1).zip(p2.get(k + 1)) else {
            continue;
        };
        let rest1: Vec<NodeId> = t1
            .children(a)
            .iter()
            .copied()
            .filter(|&c| c != a_next)
            .collect();
        let rest2: Vec<NodeId> = t2
            .children(b)
            .iter()
            .copied()
            .filter(|&c| c != b_next)
            .collect();
        for (x, y) in pair_children(ids1, ids2, &rest1, &rest2) {
            map_equal(t1, ids1, t2, ids2, x, y, &mut forward);
        }
    }
    let forward: Option<Vec<NodeId>> = forward.into_iter().collect();
    forward.map(|forward| IsoMapping { forward })
}

/// A color-preserving isomorphism from `t1` to `t2` that sends leaf `l1` to
/// leaf `l2`, if one exists.
pub fn constrained_iso(
    t1: &SearchTree,
    l1: NodeId,
    t2: &SearchTree,
    l2: NodeId,
) -> Option<IsoMapping> {
    let mut canon = Canonizer::new();
    let ids1 = canon.ids(t1, None);
    let ids2 = canon.ids(t2, None);
    constrained_with_ids(t1, &ids1, l1, t2, &ids2, l2)
}

/// Independent check of a claimed isomorphism: bijective, root to root,
/// parent relation and leaf colors preserved.
pub fn verify_mapping(t1: &SearchTree, t2: &SearchTree, map: &IsoMapping) -> bool {
    if t1.len() != t2.len() || map.forward.len() != t1.len() {
        return false;
    }
    let mut hit = vec![false; t2.len()];
    for &y in &map.forward {
        if !t2.contains(y) || std::mem::replace(&mut hit[y.index()], true) {
            return false;
        }
    }
    if map.image(t1.root()) != t2.root() {
        return false;
    }
    t1.node_ids().all(|v| {
        let w = map.image(v);
        let parent_ok = t1.parent(v).map(|p| map.image(p)) == t2.parent(w);
        parent_ok && t1.children(v).len() == t2.children(w).len() && t1.color(v) == t2.color(w)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub color: ColorId,
    pub a: (Side, NodeId),
    pub b: (Side, NodeId),
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |s: Side| match s {
            Side::First => "tree1",
            Side::Second => "tree2",
        };
        write!(
            f,
            "color {}: {} leaf {} and {} leaf {} admit no color-preserving isomorphism",
            self.color,
            name(self.a.0),
            self.a.1,
            name(self.b.0),
            self.b.1
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub pairs_checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn leaves_by_color(t: &SearchTree) -> BTreeMap<ColorId, Vec<NodeId>> {
    let mut map: BTreeMap<ColorId, Vec<NodeId>> = BTreeMap::new();
    for l in t.leaves() {
        map.entry(t.color(l).expect("leaf")).or_default().push(l);
    }
    map
}

/// Exhaustively checks the invariance axiom: every pair of same-colored
/// leaves, within `t1`, within `t2` and across, must be related by a
/// color-preserving isomorphism.
pub fn verify_axiom(t1: &SearchTree, t2: Option<&SearchTree>) -> Result<AxiomReport, OracleError> {
    for t in std::iter::once(t1).chain(t2) {
        if t.len() > AXIOM_NODE_CAP {
            return Err(OracleError::TooLarge {
                nodes: t.len(),
                cap: AXIOM_NODE_CAP,
            });
        }
    }
    let mut canon = Canonizer::new();
    let ids1 = canon.ids(t1, None);
    let ids2 = t2.map(|t| canon.ids(t, None));
    let mut report = AxiomReport::default();

    let mut check = |ta: &SearchTree,
                     ia: &[Option<u32>],
                     sa: Side,
                     a: NodeId,
                     tb: &SearchTree,
                     ib: &[Option<u32>],
                     sb: Side,
                     b: NodeId| {
        report.pairs_checked += 1;
        if constrained_with_ids(ta, ia, a, tb, ib, b).is_none() {
            report.violations.push(AxiomViolation {
                color: ta.color(a).expect("leaf"),
                a: (sa, a),
                b: (sb, b),
            });
        }
    };

    let groups1 = leaves_by_color(t1);
    for leaves in groups1.values() {
        for (i, &a) in leaves.iter().enumerate() {
            for &b in &leaves[i + 1..] {
                check(t1, &ids1, Side::First, a, t1, &ids1, Side::First, b);
            }
        }
    }
    if let (Some(t2), Some(ids2)) = (t2, ids2.as_deref()) {
        let groups2 = leaves_by_color(t2);
        for leaves in groups2.values() {
            for (i, &a) in leaves.iter().enumerate() {
                for &b in &leaves[i + 1..] {
                    check(t2, ids2, Side::Second, a, t2, ids2, Side::Second, b);
                }
            }
        }
        for (color, leaves1) in &groups1 {
            let Some(leaves2) = groups2.get(color) else {
                continue;
            };
            for &a in leaves1 {
                for &b in leaves2 {
                    check(t1, &ids1, Side::First, a, t2, ids2, Side::Second, b);
                }
            }
        }
    }
    Ok(report)
}
