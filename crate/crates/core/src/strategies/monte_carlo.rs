use rustc_hash::FxHashMap;

use crate::tree::{BlackBoxTree, ColorId, ExplorationSession, NodeId};

use super::walk::{capped_walk, random_walk};
use super::{verdict, Outcome, StrategyError, Verdict, WallStats};

/// Parameters of the Monte Carlo search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCParams {
    /// Error bound on isomorphic inputs, in (0, 1).
    pub epsilon: f64,
    /// Walks in round `s` of the budgeted search are capped at
    /// `ceil(walk_cap_c * log2 s)` steps.
    pub walk_cap_c: f64,
}

impl Default for MCParams {
    fn default() -> Self {
        MCParams {
            epsilon: 0.125,
            walk_cap_c: 4.0,
        }
    }
}

impl MCParams {
    pub fn new(epsilon: f64) -> Result<Self, StrategyError> {
        let p = MCParams {
            epsilon,
            ..MCParams::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(StrategyError::InvalidParam(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.walk_cap_c >= 1.0 && self.walk_cap_c.is_finite()) {
            return Err(StrategyError::InvalidParam(format!(
                "walk cap constant must be at least 1, got {}",
                self.walk_cap_c
            )));
        }
        Ok(())
    }

    /// `ceil(-log2 epsilon)`, computed exactly as the least `e` with
    /// `2^-e <= epsilon`.
    pub fn e(&self) -> u32 {
        let mut e = 0;
        while 0.5f64.powi(e as i32) > self.epsilon {
            e += 1;
        }
        e
    }

    fn walk_cap(&self, s: u64) -> usize {
        (self.walk_cap_c * (s as f64).log2()).ceil() as usize
    }
}

/// Collision bookkeeping shared by both Monte Carlo variants. Each set
/// holds at most one leaf per color: a second leaf of a stored color is an
/// automorphism hit and is never inserted.
#[derive(Default)]
struct Collector {
    seen1: FxHashMap<ColorId, NodeId>,
    seen2: FxHashMap<ColorId, NodeId>,
    automorphisms: u32,
}

impl Collector {
    /// One loop iteration on the fresh leaves `l1`, `l2` (either may be
    /// missing when its walk was aborted). Returns a matching pair if found.
    fn step(
        &mut self,
        l1: Option<(NodeId, ColorId)>,
        l2: Option<(NodeId, ColorId)>,
    ) -> Option<(NodeId, NodeId)> {
        if let (Some((a, ca)), Some((b, cb))) = (l1, l2) {
            if ca == cb {
                return Some((a, b));
            }
        }
        if let Some((a, ca)) = l1 {
            if let Some(&b) = self.seen2.get(&ca) {
                return Some((a, b));
            }
        }
        if let Some((b, cb)) = l2 {
            if let Some(&a) = self.seen1.get(&cb) {
                return Some((a, b));
            }
        }
        let aut1 = l1.is_some_and(|(_, c)| self.seen1.contains_key(&c));
        let aut2 = l2.is_some_and(|(_, c)| self.seen2.contains_key(&c));
        if let (Some((a, c)), false) = (l1, aut1) {
            self.seen1.insert(c, a);
        }
        if let (Some((b, c)), false) = (l2, aut2) {
            self.seen2.insert(c, b);
        }
        if aut1 || aut2 {
            self.automorphisms += 1;
        }
        None
    }
}

fn leaf_color<T: BlackBoxTree + ?Sized>(
    s: &ExplorationSession<'_, T>,
    l: NodeId,
) -> Result<(NodeId, ColorId), StrategyError> {
    Ok((l, s.color(l)?.expect("walks end at leaves")))
}

/// Bidirectional random-walk search with error probability at most
/// `epsilon` on isomorphic inputs. Never reports a match on
/// non-isomorphic inputs.
pub fn mc_bidirectional<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
    params: &MCParams,
) -> Result<Verdict, StrategyError> {
    params.validate()?;
    let e = params.e();
    let mut col = Collector::default();
    let mut stats = WallStats::default();
    while col.automorphisms <= e {
        stats.iterations += 1;
        let (r1, r2) = (s1.root(), s2.root());
        let l1 = random_walk(s1, r1)?;
        let l2 = random_walk(s2, r2)?;
        let hit = col.step(Some(leaf_color(s1, l1)?), Some(leaf_color(s2, l2)?));
        if let Some((l1, l2)) = hit {
            return verdict(s1, s2, Outcome::MatchFound { l1, l2 }, stats);
        }
    }
    verdict(s1, s2, Outcome::ProbablyNotIsomorphic, stats)
}

/// The doubling variant: round `s` allows `s` capped walks per tree and
/// starts from empty leaf sets, while everything explored stays explored.
/// A round that runs out of walks doubles `s`; only an automorphism count
/// above `e` inside one round ends the search without a match.
pub fn mc_budgeted<T: BlackBoxTree + ?Sized>(
    s1: &mut ExplorationSession<'_, T>,
    s2: &mut ExplorationSession<'_, T>,
    params: &MCParams,
) -> Result<Verdict, StrategyError> {
    params.validate()?;
    let e = params.e();
    let mut stats = WallStats::default();
    let mut s: u64 = 2;
    loop {
        stats.budgets.push(s);
        let cap = params.walk_cap(s);
        let mut col = Collector::default();
        for _ in 0..s {
            stats.iterations += 1;
            let (r1, r2) = (s1.root(), s2.root());
            let l1 = match capped_walk(s1, r1, cap)? {
                Some(l) => Some(leaf_color(s1, l)?),
                None => None,
            };
            let l2 = match capped_walk(s2, r2, cap)? {
                Some(l) => Some(leaf_color(s2, l)?),
                None => None,
            };
            if let Some((l1, l2)) = col.step(l1, l2) {
                return verdict(s1, s2, Outcome::MatchFound { l1, l2 }, stats);
            }
            if col.automorphisms > e {
                return verdict(s1, s2, Outcome::ProbablyNotIsomorphic, stats);
            }
        }
        s = s.checked_mul(2).expect("budget overflow");
        stats.restarts += 1;
    }
}
