use rustc_hash::FxHashMap;

use super::{
    clopper_pearson, loglog_slope, mean, median, play_trial, rate_threshold, trial_seeds,
    BenchError, Check, ExperimentConfig, ExperimentReport, Family, StrategyKind, Trial,
    TrialRecord,
};
use crate::ir::{graph_aut_order, CertificateTable, Graph, IrTree};
use crate::strategies::{bfs_subtree, is_balanced, lv_balanced_splits, split_cost, SplitSearch};
use crate::tree::{ColorId, ExplorationSession, SearchTree};

/// Accepted window for exponents of square-root strategies.
pub const SQRT_EXPONENT_WINDOW: (f64, f64) = (0.45, 0.65);
/// Accepted window for the exponent of the deterministic baseline.
pub const DET_EXPONENT_WINDOW: (f64, f64) = (0.95, 1.05);
/// Smallest accepted fraction of balanced splits.
pub const BALANCED_SPLIT_FLOOR: f64 = 0.70;

fn run_all(cfg: &ExperimentConfig) -> Result<Vec<Trial>, BenchError> {
    cfg.validate()?;
    cfg.execution.map(cfg.trials, |i| play_trial(cfg, i))
}

fn report(cfg: &ExperimentConfig, trials: &[Trial]) -> ExperimentReport {
    ExperimentReport {
        name: cfg.name.clone(),
        records: trials.iter().map(|t| t.record.clone()).collect(),
        summary: Vec::new(),
        checks: Vec::new(),
    }
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Failure rate of the configured strategy. On YES instances a failure is
/// any verdict other than a match and the rate must stay within three
/// standard deviations of the strategy's error bound; on NO instances a
/// failure is a match and none are allowed.
pub fn error_rate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    let trials = run_all(cfg)?;
    let mut rep = report(cfg, &trials);
    let yes: Vec<&Trial> = trials.iter().filter(|t| t.expects_match).collect();
    let no = trials.len() - yes.len();
    let yes_fail = yes.iter().filter(|t| !t.verdict.outcome.is_match()).count() as u64;
    let no_fail = trials
        .iter()
        .filter(|t| !t.expects_match && t.verdict.outcome.is_match())
        .count();
    let epsilon = cfg
        .strategies
        .iter()
        .map(|s| s.epsilon())
        .fold(0.0, f64::max);
    rep.summary.push(kv("yes_trials", yes.len()));
    rep.summary.push(kv("no_trials", no));
    rep.summary.push(kv("epsilon", epsilon));
    if !yes.is_empty() {
        let n = yes.len() as u64;
        let rate = yes_fail as f64 / n as f64;
        let (lo, hi) = clopper_pearson(yes_fail, n, 0.95);
        let limit = rate_threshold(epsilon, n);
        rep.summary
            .push(kv("failure_fraction", format!("{rate:.4}")));
        rep.summary
            .push(kv("failure_ci95", format!("[{lo:.4}, {hi:.4}]")));
        rep.checks.push(Check::new(
            "yes-failure-rate",
            rate <= limit,
            format!("{yes_fail}/{n} = {rate:.4}, limit {limit:.4}"),
        ));
    }
    if no > 0 {
        rep.checks.push(Check::new(
            "no-instance-soundness",
            no_fail == 0,
            format!("{no_fail} matches on {no} NO instances"),
        ));
    }
    Ok(rep)
}

/// Cost growth across heights: trials are grouped by height, trial indices
/// run on across groups, and the exponent is the log-log slope of the
/// median total cost against the smaller tree size.
pub fn scaling_experiment(
    cfg: &ExperimentConfig,
    heights: &[usize],
    window: (f64, f64),
) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    if heights.is_empty() {
        return Err(BenchError::Config("no heights given".into()));
    }
    let per_h = cfg.trials;
    let mut rep = ExperimentReport {
        name: cfg.name.clone(),
        records: Vec::new(),
        summary: Vec::new(),
        checks: Vec::new(),
    };
    let mut points = Vec::new();
    for (k, &h) in heights.iter().enumerate() {
        let family = cfg.family.with_height(h)?;
        let sub = ExperimentConfig {
            family,
            ..cfg.clone()
        };
        let offset = k as u64 * per_h;
        let trials = cfg.execution.map(per_h, |i| play_trial(&sub, offset + i))?;
        let costs: Vec<u64> = trials.iter().map(|t| t.verdict.total_cost()).collect();
        let n = trials[0].record.n;
        let med = median(&costs);
        rep.summary.push(kv(
            &format!("h={h}"),
            format!("n={n} median={med} mean={:.1}", mean(&costs)),
        ));
        points.push((n as f64, med));
        rep.records.extend(trials.into_iter().map(|t| t.record));
    }
    match loglog_slope(&points) {
        Some(slope) => {
            rep.summary.push(kv("exponent", format!("{slope:.4}")));
            rep.checks.push(Check::new(
                "exponent",
                window.0 <= slope && slope <= window.1,
                format!("{slope:.4} in [{}, {}]", window.0, window.1),
            ));
        }
        None => rep.summary.push(kv("exponent", "n/a")),
    }
    Ok(rep)
}

/// Runs the split search alone and reports how often the split it returns
/// is balanced, and whether any split costs more than the budget it was
/// found with.
pub fn split_probability_experiment(
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let rows = cfg.execution.map(cfg.trials, |i| {
        let seed = cfg.trial_seed(i);
        let (inst, a, b) = trial_seeds(seed);
        let (t1, t2) = cfg.family.generate(inst)?;
        let mut s1 = ExplorationSession::new(&t1, a);
        let mut s2 = ExplorationSession::new(&t2, b);
        let search = lv_balanced_splits(&mut s1, &mut s2)?;
        let mut r = TrialRecord::for_pair(i, seed, &t1, &t2);
        r.cost1 = s1.cost();
        r.cost2 = s2.cost();
        let within = match &search {
            SplitSearch::Found(f) => {
                r.verdict = "split".into();
                r.restarts = u64::from(f.rounds - 1);
                r.balanced = Some(is_balanced(&t1, &t2, f.split));
                let c = split_cost(&t1, &t2, f.split);
                c.s1.max(c.s2) as u64 <= f.budget
            }
            SplitSearch::NotIsomorphic { rounds } => {
                r.verdict = "noniso".into();
                r.restarts = u64::from(rounds - 1);
                true
            }
        };
        Ok::<_, BenchError>((r, within))
    })?;
    let found = rows.iter().filter(|(r, _)| r.balanced.is_some()).count();
    let balanced = rows
        .iter()
        .filter(|(r, _)| r.balanced == Some(true))
        .count();
    let over = rows.iter().filter(|(_, w)| !w).count();
    let mut rep = ExperimentReport {
        name: cfg.name.clone(),
        records: rows.into_iter().map(|(r, _)| r).collect(),
        summary: vec![kv("splits", found), kv("balanced", balanced)],
        checks: Vec::new(),
    };
    if found > 0 {
        let frac = balanced as f64 / found as f64;
        rep.summary
            .push(kv("balanced_fraction", format!("{frac:.4}")));
        rep.checks.push(Check::new(
            "balanced-fraction",
            frac >= BALANCED_SPLIT_FLOOR,
            format!("{balanced}/{found} = {frac:.4}, floor {BALANCED_SPLIT_FLOOR}"),
        ));
    } else {
        rep.summary.push(kv("balanced_fraction", "n/a"));
    }
    rep.checks.push(Check::new(
        "split-cost-within-budget",
        over == 0,
        format!("{over} splits cost more than their budget"),
    ));
    Ok(rep)
}

/// Small graphs with known automorphism groups, by name.
pub fn default_ir_corpus() -> Vec<(String, Graph)> {
    let rigid =
        Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 1), (5, 2)]).expect("valid");
    vec![
        ("K2".into(), Graph::complete(2)),
        ("P4".into(), Graph::path(4)),
        ("C4".into(), Graph::cycle(4)),
        ("C5".into(), Graph::cycle(5)),
        ("K3".into(), Graph::complete(3)),
        ("star3".into(), Graph::star(3)),
        ("rigid6".into(), rigid),
    ]
}

/// Explores the tree fully through a session; returns the leaf color
/// counts and the session cost.
fn explore_ir(tree: &IrTree, seed: u64) -> Result<(FxHashMap<ColorId, u64>, u64), BenchError> {
    let mut s = ExplorationSession::new(tree, seed);
    let root = s.root();
    let (leaves, _) = bfs_subtree(&mut s, root, None, None)?.expect("no visit limit");
    let mut counts = FxHashMap::default();
    for l in leaves {
        let c = s.color(l)?.expect("bfs returns leaves");
        *counts.entry(c).or_insert(0) += 1;
    }
    Ok((counts, s.cost()))
}

/// For each graph, builds the tree of the graph and of a random relabeling
/// (sharing one certificate table) and checks that every leaf color occurs
/// exactly |Aut(G)| times and that both trees have the same color counts.
/// Row `i` describes graph `i`; `cost1`/`cost2` are the costs of exploring
/// the two trees completely.
pub fn ir_occurrence_experiment(
    graphs: &[(String, Graph)],
    seed: u64,
    execution: super::Execution,
) -> Result<ExperimentReport, BenchError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let rows = execution.map(graphs.len() as u64, |i| {
        let (name, g) = &graphs[i as usize];
        let tseed = seed.wrapping_add(i);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(tseed);
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rng);
        let table = CertificateTable::new();
        let t1 = IrTree::new(g.clone(), table.clone())?;
        let t2 = IrTree::new(g.relabel(&perm), table)?;
        let (c1, cost1) = explore_ir(&t1, tseed)?;
        let (c2, cost2) = explore_ir(&t2, tseed)?;
        let aut = graph_aut_order(g)?;
        let pass = c1.values().all(|&k| k == aut) && c1 == c2;
        let m = SearchTree::materialize(&t1, 1 << 20)
            .map_err(|e| BenchError::Config(e.to_string()))?
            .metrics();
        let record = TrialRecord {
            trial: i,
            seed: tseed,
            h: m.height,
            n: m.size,
            big_n: m.size,
            d: m.max_degree,
            verdict: if pass { "pass" } else { "fail" }.into(),
            cost1,
            cost2,
            restarts: 0,
            balanced: None,
        };
        let detail = format!("|Aut| = {aut}, occurrences {:?}", sorted_counts(&c1));
        Ok::<_, BenchError>((record, Check::new(name, pass, detail)))
    })?;
    let (records, checks) = rows.into_iter().unzip();
    Ok(ExperimentReport {
        name: "ir-occurrence".into(),
        records,
        summary: vec![kv("graphs", graphs.len())],
        checks,
    })
}

fn sorted_counts(c: &FxHashMap<ColorId, u64>) -> Vec<u64> {
    let mut v: Vec<u64> = c.values().copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// The baseline on disjoint-color 𝓜ₕ pairs against the budgeted Monte
/// Carlo search on iso 𝓜ₕ pairs. The baseline must exhaust one tree
/// (2^(h+1) − 2 explorations) on every run, while the Monte Carlo median
/// total cost stays below a quarter of that. Rows `0..trials` are baseline
/// runs, the next `trials` rows Monte Carlo runs.
pub fn separation_experiment(
    h: usize,
    trials: u64,
    seed: u64,
    epsilon: f64,
    execution: super::Execution,
) -> Result<ExperimentReport, BenchError> {
    let det = ExperimentConfig {
        execution,
        ..ExperimentConfig::new(
            "separation",
            Family::DisjointMh { h },
            StrategyKind::Det,
            trials,
            seed,
        )
    };
    let mc = ExperimentConfig {
        execution,
        ..ExperimentConfig::new(
            "separation",
            Family::IsoMh { h },
            StrategyKind::McBudgeted { epsilon },
            trials,
            seed,
        )
    };
    det.validate()?;
    let det_runs = execution.map(trials, |i| play_trial(&det, i))?;
    let mc_runs = execution.map(trials, |i| play_trial(&mc, trials + i))?;
    let full = (1u64 << (h + 1)) - 2;
    let short = det_runs
        .iter()
        .filter(|t| t.verdict.cost1.max(t.verdict.cost2) < full)
        .count();
    let mc_costs: Vec<u64> = mc_runs.iter().map(|t| t.verdict.total_cost()).collect();
    let mc_median = median(&mc_costs);
    let bound = full as f64 / 4.0;
    let mut rep = ExperimentReport {
        name: "separation".into(),
        records: det_runs
            .iter()
            .chain(&mc_runs)
            .map(|t| t.record.clone())
            .collect(),
        summary: vec![
            kv("exhaustive_cost", full),
            kv(
                "det_min_max_cost",
                det_runs
                    .iter()
                    .map(|t| t.verdict.cost1.max(t.verdict.cost2))
                    .min()
                    .unwrap_or(0),
            ),
            kv("mc_median_total_cost", mc_median),
        ],
        checks: Vec::new(),
    };
    rep.checks.push(Check::new(
        "det-exhausts",
        short == 0,
        format!("{short}/{trials} baseline runs below {full}"),
    ));
    rep.checks.push(Check::new(
        "mc-below-quarter",
        mc_median < bound,
        format!("median {mc_median} < {bound}"),
    ));
    Ok(rep)
}

/// Mixed YES and NO instances under every configured strategy. Every match
/// must carry equal leaf colors; zero-error strategies must never be wrong,
/// Monte Carlo ones never match on a NO instance.
pub fn soundness_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    let trials = run_all(cfg)?;
    let mut rep = report(cfg, &trials);
    let bad_colors = trials.iter().filter(|t| !t.match_colors_agree).count();
    let false_match = trials
        .iter()
        .filter(|t| !t.expects_match && t.verdict.outcome.is_match())
        .count();
    let exact_wrong = trials
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            let s = cfg.strategies[i % cfg.strategies.len()];
            s.epsilon() == 0.0 && t.verdict.outcome.is_match() != t.expects_match
        })
        .count();
    let matches = trials
        .iter()
        .filter(|t| t.verdict.outcome.is_match())
        .count();
    let yes = trials.iter().filter(|t| t.expects_match).count();
    rep.summary.push(kv("trials", trials.len()));
    rep.summary.push(kv("yes_instances", yes));
    rep.summary.push(kv("matches", matches));
    rep.checks.push(Check::new(
        "match-colors-equal",
        bad_colors == 0,
        format!("{bad_colors} matches with unequal colors"),
    ));
    rep.checks.push(Check::new(
        "no-false-match",
        false_match == 0,
        format!("{false_match} matches on NO instances"),
    ));
    rep.checks.push(Check::new(
        "zero-error-strategies-exact",
        exact_wrong == 0,
        format!("{exact_wrong} wrong verdicts from lv/det"),
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::super::Execution;
    use super::*;

    #[test]
    fn single_height_scaling_has_no_exponent() {
        let cfg = ExperimentConfig::new("s", Family::IsoMh { h: 4 }, StrategyKind::Lv, 5, 1);
        let rep = scaling_experiment(&cfg, &[4], SQRT_EXPONENT_WINDOW).unwrap();
        assert!(rep
            .summary
            .contains(&("exponent".to_string(), "n/a".to_string())));
        assert!(rep.checks.is_empty());
        assert_eq!(rep.records.len(), 5);
    }

    #[test]
    fn no_instances_never_fail_monte_carlo() {
        let cfg = ExperimentConfig::new(
            "e",
            Family::DisjointMh { h: 5 },
            StrategyKind::Mc { epsilon: 0.5 },
            40,
            3,
        );
        let rep = error_rate_experiment(&cfg).unwrap();
        assert!(rep.passed(), "{}", rep.summary_text());
        assert!(rep.records.iter().all(|r| r.verdict == "probably-noniso"));
    }

    #[test]
    fn single_leaf_splits_are_always_balanced() {
        let cfg = ExperimentConfig::new("p", Family::SingleLeaf, StrategyKind::Lv, 20, 0);
        let rep = split_probability_experiment(&cfg).unwrap();
        assert!(rep.passed());
        assert!(rep.records.iter().all(|r| r.balanced == Some(true)));
    }

    #[test]
    fn shape_mismatch_gives_no_splits() {
        let cfg =
            ExperimentConfig::new("p", Family::ShapeMismatch { h: 4 }, StrategyKind::Lv, 20, 0);
        let rep = split_probability_experiment(&cfg).unwrap();
        assert!(rep
            .records
            .iter()
            .all(|r| r.verdict == "noniso" && r.balanced.is_none()));
        assert!(rep
            .summary
            .contains(&("balanced_fraction".to_string(), "n/a".to_string())));
    }

    #[test]
    fn ir_corpus_passes_with_k2_counts() {
        let rep = ir_occurrence_experiment(&default_ir_corpus(), 5, Execution::Sequential).unwrap();
        assert!(rep.passed(), "{}", rep.summary_text());
        let k2 = &rep.records[0];
        assert_eq!((k2.n, k2.cost1, k2.cost2), (3, 2, 2));
        let rigid = rep.records.last().unwrap();
        assert_eq!((rigid.n, rigid.cost1), (1, 0));
    }

    #[test]
    fn parallel_and_sequential_csv_are_identical() {
        let mut cfg = ExperimentConfig::new("m", Family::Mixed, StrategyKind::Lv, 60, 11);
        cfg.strategies = vec![
            StrategyKind::Lv,
            StrategyKind::Det,
            StrategyKind::McBudgeted { epsilon: 0.25 },
        ];
        let a = soundness_experiment(&cfg).unwrap();
        cfg.execution = Execution::Sequential;
        let b = soundness_experiment(&cfg).unwrap();
        assert_eq!(a.csv_string(), b.csv_string());
        assert!(a.passed(), "{}", a.summary_text());
    }
}
