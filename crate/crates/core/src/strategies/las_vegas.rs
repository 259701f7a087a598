use rand::Rng;

use crate::oracle::{truncated_iso, ExploredPrefix, Side};
use crate::tree::{BlackBoxTree, ExplorationSession, NodeId};

use super::split::{run_split, Scan, Split, WalkMode};
use super::{verdict, Outcome, StrategyError, Verdict, WallStats};

/// Child visits the two probes had made when a probing round ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeRound {
    pub budget: u64,
    pub level: usize,
    pub visits: [u64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoundSplit {
    pub split: Split,
    /// Budget `s` of the round that produced the split.
    pub budget: u64,
    /// Child visits needed to scan the other tree down to the split level.
    pub ball_visits: u64,
    /// Child visits of the winning probe (0 for a leaf split).
    pub probe_visits: u64,
    pub rounds: u32,
    pub probes: Vec<ProbeRound>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitSearch {
    Found(FoundSplit),
    NotIsomorphic { rounds: u32 },
}

/// Breadth-first levels of one tree, explored a whole level at a time.
struct Levels {
    levels: Vec<Vec<NodeId>>,
    /// Child visits needed to complete levels `1..=k`, at index `k`.
    visits: Vec<u64>,
}

impl Levels {
    fn new(root: NodeId) -> Self {
        Levels {
            levels: vec![vec![root]],
            visits: vec![0],
        }
    }

    /// Visits needed to complete the next level. Degrees of explored nodes
    /// are known, so this costs nothing.
    fn next_need<T: BlackBoxTree + ?Sized>(
        &self,
        s: &ExplorationSession<'_, T>,
    ) -> Result<u64, StrategyError> {
        let mut need = 0;
        for &u in self.levels.last().expect("root level") {
            need += s.degree(u)? as u64;
        }
        Ok(need)
    }

    fn used(&self) -> u64 {
        *self.visits.last().expect("root level")
    }

    fn expand<T: BlackBoxTree + ?Sized>(
        &mut self,
        s: &mut ExplorationSession<'_, T>,
        need: u64,
    ) -> Result<(), StrategyError> {
        let mut next = Vec::new();
        for &u in self.levels.last().expect("root level") {
            next.extend(s.explored_children(u)?);
            while let Some(c) = s.next_child(u)? {
                next.push(c);
            }
        }
        self.levels.push(next);
        self.visits.push(self.used() + need);
        Ok(())
    }

    fn shallowest_leaf<T: BlackBoxTree + ?Sized>(
        &self,
        s: &ExplorationSession<'_, T>,
        level: usize,
    ) -> Result<Option<NodeId>, StrategyError> {
        for &u in &self.levels[level] {
            if s.degree(u)? == 0 {
                return Ok(Some(u));
            }
        }
        Ok(None)
    }
}

enum Scanned {
    /// Both trees agree down to this level and the next level does not fit.
    Reached(usize),
    NotIsomorphic,
}

/// Level-synchronized scan of both trees with at most `s` child visits
/// each, comparing the truncated prefixes after every level.
fn scan_levels<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
    l1: &mut Levels,
    l2: &mut Levels,
    s: u64,
) -> Result<Scanned, StrategyError> {
    let mut h = 0;
    loop {
        let same = truncated_iso(
            &ExploredPrefix::from_session(s1),
            &ExploredPrefix::from_session(s2),
            h,
        )?;
        if !same {
            return Ok(Scanned::NotIsomorphic);
        }
        let (need1, need2) = (l1.next_need(s1)?, l2.next_need(s2)?);
        if need1 == 0 && need2 == 0 {
            return Ok(Scanned::Reached(h));
        }
        let fits1 = l1.used() + need1 <= s;
        let fits2 = l2.used() + need2 <= s;
        match (fits1, fits2) {
            (false, false) => return Ok(Scanned::Reached(h)),
            (true, true) => {
                l1.expand(s1, need1)?;
                l2.expand(s2, need2)?;
                h += 1;
            }
            _ => return Ok(Scanned::NotIsomorphic),
        }
    }
}

enum Probed {
    Won(usize, u64),
    BothFailed,
}

enum ProbeStep {
    Finished,
    OutOfBudget,
    Continue,
}

/// One probe move: a single child visit unless the probe is finished or
/// has used its `s` visits.
fn probe_step<T: BlackBoxTree + ?Sized>(
    scan: &mut Scan,
    session: &mut ExplorationSession<'_, T>,
    s: u64,
) -> Result<ProbeStep, StrategyError> {
    if scan.settle(session)? {
        return Ok(ProbeStep::Finished);
    }
    if scan.visits() == s {
        return Ok(ProbeStep::OutOfBudget);
    }
    scan.visit(session)?;
    Ok(if scan.settle(session)? {
        ProbeStep::Finished
    } else {
        ProbeStep::Continue
    })
}

/// Two breadth-first probes, one child visit at a time, strictly
/// alternating and starting with the first tree. A probe wins by finishing
/// its subtree within `s` visits.
fn race<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
    starts: [NodeId; 2],
    s: u64,
    visits: &mut [u64; 2],
) -> Result<Probed, StrategyError> {
    let mut scans = [
        Scan::new(s1, starts[0], None)?,
        Scan::new(s2, starts[1], None)?,
    ];
    let mut active = [true, true];
    while active[0] || active[1] {
        for i in 0..2 {
            if !active[i] {
                continue;
            }
            let step = if i == 0 {
                probe_step(&mut scans[0], s1, s)?
            } else {
                probe_step(&mut scans[1], s2, s)?
            };
            visits[i] = scans[i].visits();
            match step {
                ProbeStep::Finished => return Ok(Probed::Won(i, visits[i])),
                ProbeStep::OutOfBudget => active[i] = false,
                ProbeStep::Continue => {}
            }
        }
    }
    Ok(Probed::BothFailed)
}

fn side(i: usize) -> Side {
    if i == 0 {
        Side::First
    } else {
        Side::Second
    }
}

/// Searches for a balanced split with a doubling budget `s = 1, 2, 4, ...`.
///
/// Each round scans both trees level by level while a whole level still
/// fits in `s` child visits per tree, giving up on isomorphism as soon as
/// the scanned prefixes differ or only one tree can complete a level. A
/// leaf inside the scanned ball gives the split at its own level, the
/// shallowest one and the first tree preferred. Otherwise one uniformly
/// random node on the deepest scanned level is probed in each tree; the
/// first probe to finish its subtree within `s` visits gives the split.
pub fn lv_balanced_splits<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
) -> Result<SplitSearch, StrategyError> {
    let mut s: u64 = 1;
    let mut rounds = 0;
    let mut probes = Vec::new();
    loop {
        rounds += 1;
        let (mut l1, mut l2) = (Levels::new(s1.root()), Levels::new(s2.root()));
        let h = match scan_levels(s1, s2, &mut l1, &mut l2, s)? {
            Scanned::NotIsomorphic => return Ok(SplitSearch::NotIsomorphic { rounds }),
            Scanned::Reached(h) => h,
        };
        for level in 0..=h {
            let leaf1 = l1.shallowest_leaf(s1, level)?.map(|v| (0, v));
            let leaf = match leaf1 {
                Some(hit) => Some(hit),
                None => l2.shallowest_leaf(s2, level)?.map(|v| (1, v)),
            };
            if let Some((i, v)) = leaf {
                let other = if i == 0 { &l2 } else { &l1 };
                return Ok(SplitSearch::Found(FoundSplit {
                    split: Split {
                        side: side(i),
                        v,
                        h: level,
                    },
                    budget: s,
                    ball_visits: other.visits[level],
                    probe_visits: 0,
                    rounds,
                    probes,
                }));
            }
        }

        let v1 = l1.levels[h][s1.rng().gen_range(0..l1.levels[h].len())];
        let v2 = l2.levels[h][s2.rng().gen_range(0..l2.levels[h].len())];
        let mut visits = [0; 2];
        let result = race(s1, s2, [v1, v2], s, &mut visits)?;
        probes.push(ProbeRound {
            budget: s,
            level: h,
            visits,
        });
        if let Probed::Won(i, probe_visits) = result {
            let (v, other) = if i == 0 { (v1, &l2) } else { (v2, &l1) };
            return Ok(SplitSearch::Found(FoundSplit {
                split: Split {
                    side: side(i),
                    v,
                    h,
                },
                budget: s,
                ball_visits: other.visits[h],
                probe_visits,
                rounds,
                probes,
            }));
        }
        s = s.checked_mul(2).expect("budget overflow");
    }
}

/// Zero-error isomorphism search: the split search followed by the
/// split-based search on the same sessions.
///
/// In the returned stats, `budgets` is the split-search budget sequence,
/// `restarts` counts its extra rounds plus path-budget restarts, and
/// `iterations` counts walks.
pub fn lv_iso<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
) -> Result<Verdict, StrategyError> {
    let search = lv_balanced_splits(s1, s2)?;
    let rounds = match &search {
        SplitSearch::Found(f) => f.rounds,
        SplitSearch::NotIsomorphic { rounds } => *rounds,
    };
    let mut stats = WallStats {
        budgets: (0..rounds).map(|k| 1u64 << k).collect(),
        restarts: u64::from(rounds - 1),
        ..WallStats::default()
    };
    let SplitSearch::Found(found) = search else {
        return verdict(s1, s2, Outcome::NotIsomorphic, stats);
    };
    let mut walk_stats = WallStats::default();
    let outcome = run_split(s1, s2, found.split, WalkMode::Random, &mut walk_stats)?;
    stats.iterations = walk_stats.iterations;
    stats.restarts += walk_stats.restarts;
    stats.split = Some(found);
    verdict(s1, s2, outcome, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_mh, gen_noniso_pair, gen_orbit_tree, iso_shuffle, OrbitTreeSpec};
    use crate::oracle::trees_isomorphic;
    use crate::strategies::split_cost;
    use crate::tree::{load_tree, SearchTree};

    fn run(t1: &SearchTree, t2: &SearchTree, seed: u64) -> (SplitSearch, u64, u64) {
        let mut s1 = ExplorationSession::new(t1, seed);
        let mut s2 = ExplorationSession::new(t2, seed ^ 0x5555);
        let out = lv_balanced_splits(&mut s1, &mut s2).unwrap();
        (out, s1.cost(), s2.cost())
    }

    #[test]
    fn single_leaf_pair_splits_at_the_root() {
        let leaf = SearchTree::from_parents(&[(None, Some(1))]).unwrap();
        let (out, c1, c2) = run(&leaf, &leaf, 0);
        let SplitSearch::Found(f) = out else { panic!() };
        assert_eq!(
            f.split,
            Split {
                side: Side::First,
                v: leaf.root(),
                h: 0
            }
        );
        assert_eq!((f.rounds, c1, c2), (1, 0, 0));
    }

    #[test]
    fn shape_difference_at_level_one() {
        let m3 = gen_mh(3).unwrap();
        let other = load_tree("tree 5\n0 - -\n1 0 1\n2 0 -\n3 2 2\n4 2 3\n").unwrap();
        for seed in 0..10 {
            let (out, _, _) = run(&m3, &other, seed);
            assert!(matches!(out, SplitSearch::NotIsomorphic { .. }));
        }
    }

    #[test]
    fn m12_splits_are_found_at_the_middle() {
        let m = gen_mh(12).unwrap();
        let t = iso_shuffle(&m, 8);
        for seed in 0..10 {
            let (out, _, _) = run(&m, &t, seed);
            let SplitSearch::Found(f) = out else { panic!() };
            assert_eq!(f.budget, 128);
            assert_eq!(f.split.h, 6);
            assert!(f.probe_visits <= f.budget && f.ball_visits <= f.budget);
            let (t1, t2) = (&m, &t);
            let cost = split_cost(t1, t2, f.split);
            assert_eq!((cost.s1, cost.s2), (127, 127));
        }
    }

    #[test]
    fn probes_alternate_strictly() {
        let spec = OrbitTreeSpec {
            target_size: 400,
            ..OrbitTreeSpec::default()
        };
        for seed in 0..30 {
            let t = gen_orbit_tree(&spec, seed).unwrap();
            let u = iso_shuffle(&t, seed + 1);
            let (out, _, _) = run(&t, &u, seed);
            let SplitSearch::Found(f) = out else { panic!() };
            for p in &f.probes {
                assert!(p.visits[0].abs_diff(p.visits[1]) <= 1, "{p:?}");
                assert!(p.visits[0] <= p.budget && p.visits[1] <= p.budget);
            }
        }
    }

    #[test]
    fn first_tree_wins_ties() {
        let m = gen_mh(6).unwrap();
        for seed in 0..10 {
            let (out, _, _) = run(&m, &m, seed);
            let SplitSearch::Found(f) = out else { panic!() };
            assert_eq!(f.split.side, Side::First);
        }
    }

    #[test]
    fn lv_iso_decides_correctly() {
        let spec = OrbitTreeSpec {
            target_size: 300,
            duplication_prob: 0.6,
            ..OrbitTreeSpec::default()
        };
        for seed in 0..40 {
            let a = gen_orbit_tree(&spec, seed).unwrap();
            let b = if seed % 2 == 0 {
                iso_shuffle(&a, seed + 3)
            } else {
                // Unrelated trees must not share colors.
                gen_orbit_tree(&spec, seed + 1000)
                    .unwrap()
                    .with_color_offset(1 << 32)
            };
            let mut s1 = ExplorationSession::new(&a, seed);
            let mut s2 = ExplorationSession::new(&b, seed + 1);
            let v = lv_iso(&mut s1, &mut s2).unwrap();
            assert_eq!(
                v.outcome.is_match(),
                trees_isomorphic(&a, &b),
                "seed {seed}"
            );
        }
        let (a, b) = gen_noniso_pair(6, 0).unwrap();
        let mut s1 = ExplorationSession::new(&a, 0);
        let mut s2 = ExplorationSession::new(&b, 1);
        assert_eq!(
            lv_iso(&mut s1, &mut s2).unwrap().outcome,
            Outcome::NotIsomorphic
        );
    }
}
