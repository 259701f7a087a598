//! Seeded experiments. Trial `i` of a run with base seed `b` uses seed
//! `b + i`; everything random in the trial (instance, both sessions) is
//! derived from that one number, so reruns reproduce every CSV byte.

mod experiments;
mod runner;
mod stats;

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{
    gen_mh, gen_noniso_pair, gen_orbit_tree, gen_pruned_pair, iso_shuffle, GenError, OrbitTreeSpec,
};
use crate::ir::IrError;
use crate::oracle::OracleError;
use crate::strategies::{
    deterministic_baseline, is_balanced, lv_iso, mc_bidirectional, mc_budgeted, MCParams, Outcome,
    StrategyError, Verdict,
};
use crate::tree::{ColorId, ExplorationSession, SearchTree, SessionError};

pub use experiments::{
    default_ir_corpus, error_rate_experiment, ir_occurrence_experiment, scaling_experiment,
    separation_experiment, soundness_experiment, split_probability_experiment,
    BALANCED_SPLIT_FLOOR, DET_EXPONENT_WINDOW, SQRT_EXPONENT_WINDOW,
};
pub use runner::Execution;
pub use stats::{clopper_pearson, loglog_slope, mean, median, rate_threshold};

/// CSV header shared by every experiment.
pub const CSV_HEADER: &str = "trial,seed,h,n,N,d,verdict,cost1,cost2,restarts,balanced";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Instance families. Every family yields a pair of trees.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// 𝓜ₕ against an iso-shuffled copy.
    IsoMh { h: usize },
    /// Two 𝓜ₕ shapes with disjoint colors.
    DisjointMh { h: usize },
    /// 𝓜ₕ against a root with three 𝓜ₕ₋₁ children, disjoint colors.
    ShapeMismatch { h: usize },
    /// A random orbit tree against a shuffled copy (`iso`) or against an
    /// unrelated orbit tree with disjoint colors.
    Orbit { spec: OrbitTreeSpec, iso: bool },
    /// Pruned subtrees of 𝓜₂ₕ, planted (YES) or independent (NO).
    Pruned {
        h: usize,
        prune_prob: f64,
        planted: bool,
    },
    /// Two equal single-leaf trees.
    SingleLeaf,
    /// Rotates through small YES and NO instances of every family above.
    Mixed,
}

impl Family {
    /// The same family at height `h`, for families that have one.
    pub fn with_height(&self, h: usize) -> Result<Family, BenchError> {
        Ok(match self {
            Family::IsoMh { .. } => Family::IsoMh { h },
            Family::DisjointMh { .. } => Family::DisjointMh { h },
            Family::ShapeMismatch { .. } => Family::ShapeMismatch { h },
            Family::Pruned {
                prune_prob,
                planted,
                ..
            } => Family::Pruned {
                h,
                prune_prob: *prune_prob,
                planted: *planted,
            },
            other => {
                return Err(BenchError::Config(format!(
                    "{other:?} has no height parameter"
                )))
            }
        })
    }

    pub fn generate(&self, seed: u64) -> Result<(SearchTree, SearchTree), BenchError> {
        Ok(match self {
            Family::IsoMh { h } => {
                let m = gen_mh(*h)?;
                let s = iso_shuffle(&m, seed);
                (m, s)
            }
            Family::DisjointMh { h } => gen_noniso_pair(*h, seed)?,
            Family::ShapeMismatch { h } => {
                let a = gen_mh(*h)?;
                let b = iso_shuffle(&ternary_root(*h)?, seed);
                (a, b)
            }
            Family::Orbit { spec, iso } => {
                let a = gen_orbit_tree(spec, seed)?;
                let b = if *iso {
                    iso_shuffle(&a, seed ^ 0x5eed)
                } else {
                    gen_orbit_tree(spec, seed.wrapping_add(1 << 20))?.with_color_offset(1 << 40)
                };
                (a, b)
            }
            Family::Pruned {
                h,
                prune_prob,
                planted,
            } => gen_pruned_pair(*h, *prune_prob, seed, *planted)?,
            Family::SingleLeaf => {
                let leaf = SearchTree::from_parents(&[(None, Some(0))]).expect("single leaf");
                (leaf.clone(), leaf)
            }
            Family::Mixed => mixed_member(seed).generate(seed)?,
        })
    }
}

fn ternary_root(h: usize) -> Result<SearchTree, BenchError> {
    if h == 0 {
        return Err(BenchError::Config("shape mismatch needs h >= 1".into()));
    }
    let sub = gen_mh(h - 1)?;
    let size = sub.len() as u32;
    let mut entries = vec![(None, None)];
    for k in 0..3u32 {
        let off = 1 + k * size;
        for v in sub.node_ids() {
            let parent = sub.parent(v).map_or(0, |p| off + p.0);
            let color = sub.color(v).map(|c| (1 << 40) + u64::from(k * size) + c.0);
            entries.push((Some(parent), color));
        }
    }
    Ok(SearchTree::from_parents(&entries).expect("three copies under one root"))
}

fn mixed_member(seed: u64) -> Family {
    let spec = OrbitTreeSpec {
        target_size: 120,
        ..OrbitTreeSpec::default()
    };
    let h = 2 + (seed / 8 % 7) as usize;
    match seed % 8 {
        0 | 1 => Family::IsoMh { h },
        2 => Family::DisjointMh { h },
        3 => Family::Orbit { spec, iso: true },
        4 => Family::Orbit { spec, iso: false },
        5 => Family::Pruned {
            h: 2 + h % 3,
            prune_prob: 0.3,
            planted: true,
        },
        6 => Family::Pruned {
            h: 2 + h % 3,
            prune_prob: 0.3,
            planted: false,
        },
        _ => Family::ShapeMismatch { h: h.min(6) },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    Mc { epsilon: f64 },
    McBudgeted { epsilon: f64 },
    Lv,
    Det,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Mc { .. } => "mc",
            StrategyKind::McBudgeted { .. } => "mc-budgeted",
            StrategyKind::Lv => "lv",
            StrategyKind::Det => "det",
        }
    }

    /// Claimed error probability on YES instances.
    pub fn epsilon(&self) -> f64 {
        match self {
            StrategyKind::Mc { epsilon } | StrategyKind::McBudgeted { epsilon } => *epsilon,
            StrategyKind::Lv | StrategyKind::Det => 0.0,
        }
    }

    /// Same strategy with a new error bound; no effect on zero-error ones.
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        match self {
            StrategyKind::Mc { .. } => StrategyKind::Mc { epsilon },
            StrategyKind::McBudgeted { .. } => StrategyKind::McBudgeted { epsilon },
            other => other,
        }
    }

    pub fn run<T: crate::BlackBoxTree + ?Sized>(
        &self,
        s1: &mut ExplorationSession<'_, T>,
        s2: &mut ExplorationSession<'_, T>,
    ) -> Result<Verdict, StrategyError> {
        match self {
            StrategyKind::Mc { epsilon } => mc_bidirectional(s1, s2, &MCParams::new(*epsilon)?),
            StrategyKind::McBudgeted { epsilon } => mc_budgeted(s1, s2, &MCParams::new(*epsilon)?),
            StrategyKind::Lv => lv_iso(s1, s2),
            StrategyKind::Det => deterministic_baseline(s1, s2),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = BenchError;

    /// `mc`, `mc-budgeted`, `lv` or `det`; Monte Carlo variants start at
    /// the default error bound.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let epsilon = MCParams::default().epsilon;
        Ok(match s {
            "mc" => StrategyKind::Mc { epsilon },
            "mc-budgeted" => StrategyKind::McBudgeted { epsilon },
            "lv" => StrategyKind::Lv,
            "det" => StrategyKind::Det,
            _ => return Err(BenchError::Config(format!("unknown strategy {s:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub family: Family,
    /// Trial `i` uses `strategies[i % len]`.
    pub strategies: Vec<StrategyKind>,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(name: &str, family: Family, strategy: StrategyKind, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            family,
            strategies: vec![strategy],
            trials,
            seed,
            out: None,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(BenchError::Config("no strategy given".into()));
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: u64) -> u64 {
        self.seed.wrapping_add(trial)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub h: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub d: usize,
    pub verdict: String,
    pub cost1: u64,
    pub cost2: u64,
    pub restarts: u64,
    /// Whether the split used was balanced; empty when no split was used.
    pub balanced: Option<bool>,
}

impl TrialRecord {
    /// Instance columns filled from the pair; the rest zeroed.
    pub fn for_pair(trial: u64, seed: u64, t1: &SearchTree, t2: &SearchTree) -> Self {
        let (m1, m2) = (t1.metrics(), t2.metrics());
        TrialRecord {
            trial,
            seed,
            h: m1.height.max(m2.height),
            n: m1.size.min(m2.size),
            big_n: m1.size.max(m2.size),
            d: m1.max_degree.max(m2.max_degree),
            verdict: String::new(),
            cost1: 0,
            cost2: 0,
            restarts: 0,
            balanced: None,
        }
    }
}

/// A pass/fail statement about an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub records: Vec<TrialRecord>,
    /// Summary figures as `(key, value)` lines.
    pub summary: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        if self.records.is_empty() {
            w.write_record(CSV_HEADER.split(','))?;
        }
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Human-readable summary, one line per figure and per check.
    pub fn summary_text(&self) -> String {
        let mut s = format!("experiment {}\n", self.name);
        for (k, v) in &self.summary {
            s += &format!("  {k}: {v}\n");
        }
        for c in &self.checks {
            s += &format!(
                "  {} {}: {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        s
    }
}

/// Everything one strategy run produced.
#[derive(Debug, Clone)]
pub struct Trial {
    pub record: TrialRecord,
    pub verdict: Verdict,
    /// Whether the pair shares a leaf color, i.e. a match exists.
    pub expects_match: bool,
    /// Whether a reported match was re-checked against the trees' colors.
    pub match_colors_agree: bool,
}

/// Seeds for the instance and the two sessions of one trial.
pub fn trial_seeds(seed: u64) -> (u64, u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (rng.gen(), rng.gen(), rng.gen())
}

/// Whether some leaf color occurs in both trees.
pub fn shares_color(t1: &SearchTree, t2: &SearchTree) -> bool {
    let colors: FxHashSet<ColorId> = t1
        .leaves()
        .into_iter()
        .filter_map(|l| t1.color(l))
        .collect();
    t2.leaves()
        .into_iter()
        .any(|l| t2.color(l).is_some_and(|c| colors.contains(&c)))
}

/// Runs trial `trial` of `cfg`.
pub fn play_trial(cfg: &ExperimentConfig, trial: u64) -> Result<Trial, BenchError> {
    let seed = cfg.trial_seed(trial);
    let strategy = cfg.strategies[(trial % cfg.strategies.len() as u64) as usize];
    let (inst, a, b) = trial_seeds(seed);
    let (t1, t2) = cfg.family.generate(inst)?;
    play_pair(trial, seed, &t1, &t2, strategy, (a, b))
}

/// Runs `strategy` on a given pair with the given session seeds.
pub fn play_pair(
    trial: u64,
    seed: u64,
    t1: &SearchTree,
    t2: &SearchTree,
    strategy: StrategyKind,
    session_seeds: (u64, u64),
) -> Result<Trial, BenchError> {
    let mut s1 = ExplorationSession::new(t1, session_seeds.0);
    let mut s2 = ExplorationSession::new(t2, session_seeds.1);
    let verdict = strategy.run(&mut s1, &mut s2)?;
    let mut record = TrialRecord::for_pair(trial, seed, t1, t2);
    record.verdict = verdict.outcome.label().to_string();
    record.cost1 = verdict.cost1;
    record.cost2 = verdict.cost2;
    record.restarts = verdict.stats.restarts;
    record.balanced = verdict
        .stats
        .split
        .as_ref()
        .map(|f| is_balanced(t1, t2, f.split));
    let match_colors_agree = match verdict.outcome {
        Outcome::MatchFound { l1, l2 } => t1.color(l1).is_some() && t1.color(l1) == t2.color(l2),
        _ => true,
    };
    Ok(Trial {
        record,
        verdict,
        expects_match: shares_color(t1, t2),
        match_colors_agree,
    })
}
