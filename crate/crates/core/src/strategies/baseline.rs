use rustc_hash::FxHashMap;

use crate::tree::{BlackBoxTree, ColorId, ExplorationSession, NodeId};

use super::split::Scan;
use super::{verdict, Outcome, StrategyError, Verdict, WallStats};

/// Breadth-first search in both trees, one child visit at a time,
/// alternating between them, until a leaf color shows up in both.
///
/// Once one tree is fully explored its color set is complete, so the first
/// leaf seen in the other tree settles the question.
pub fn deterministic_baseline<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
) -> Result<Verdict, StrategyError> {
    let mut stats = WallStats::default();
    let mut scans = [
        Scan::new(s1, s1.root(), None)?,
        Scan::new(s2, s2.root(), None)?,
    ];
    let mut seen: [FxHashMap<ColorId, NodeId>; 2] = Default::default();
    let mut exhausted = [false; 2];

    let roots = [
        (s1.root(), s1.color(s1.root())?),
        (s2.root(), s2.color(s2.root())?),
    ];
    for (i, (r, color)) in roots.into_iter().enumerate() {
        if let Some(c) = color {
            if let Some((l1, l2)) = record(&mut seen, i, r, c) {
                return verdict(s1, s2, Outcome::MatchFound { l1, l2 }, stats);
            }
        }
    }

    loop {
        for i in [0, 1] {
            if exhausted[i] {
                continue;
            }
            let step = if i == 0 {
                step(&mut scans[0], s1)?
            } else {
                step(&mut scans[1], s2)?
            };
            match step {
                None => exhausted[i] = true,
                Some((c, color)) => {
                    stats.iterations += 1;
                    if let Some(color) = color {
                        if let Some((l1, l2)) = record(&mut seen, i, c, color) {
                            return verdict(s1, s2, Outcome::MatchFound { l1, l2 }, stats);
                        }
                    }
                }
            }
        }
        let decided = (exhausted[0] && !seen[1].is_empty())
            || (exhausted[1] && !seen[0].is_empty())
            || (exhausted[0] && exhausted[1]);
        if decided {
            return verdict(s1, s2, Outcome::NotIsomorphic, stats);
        }
    }
}

/// Records leaf `l` of tree `i`; returns the match as (tree 1, tree 2) when
/// the other tree already has the color.
fn record(
    seen: &mut [FxHashMap<ColorId, NodeId>; 2],
    i: usize,
    l: NodeId,
    c: ColorId,
) -> Option<(NodeId, NodeId)> {
    if let Some(&o) = seen[1 - i].get(&c) {
        return Some(if i == 0 { (l, o) } else { (o, l) });
    }
    seen[i].entry(c).or_insert(l);
    None
}

/// One visit of the scan, with the color if the visited node is a leaf.
/// `None` once the tree is fully explored.
fn step<T: BlackBoxTree + ?Sized>(
    scan: &mut Scan,
    session: &mut ExplorationSession<'_, T>,
) -> Result<Option<(NodeId, Option<ColorId>)>, StrategyError> {
    if scan.settle(session)? {
        return Ok(None);
    }
    let c = scan.visit(session)?;
    Ok(Some((c, session.color(c)?)))
}
