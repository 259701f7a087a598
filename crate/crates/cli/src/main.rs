use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use leafmatch::bench::{
    default_ir_corpus, error_rate_experiment, ir_occurrence_experiment, play_pair,
    scaling_experiment, separation_experiment, soundness_experiment, split_probability_experiment,
    trial_seeds, Execution, ExperimentConfig, ExperimentReport, Family, StrategyKind,
    DET_EXPONENT_WINDOW, SQRT_EXPONENT_WINDOW,
};
use leafmatch::generators::{
    gen_mh, gen_noniso_pair, gen_orbit_tree, gen_pruned_pair, iso_shuffle, OrbitTreeSpec,
};
use leafmatch::ir::{parse_graph, IrTree};
use leafmatch::oracle::verify_axiom;
use leafmatch::tree::{load_tree, save_tree};
use leafmatch::SearchTree;

/// Exit status when a check or threshold fails.
const BREACH: u8 = 2;

#[derive(Parser)]
#[command(
    name = "leafmatch",
    version,
    about = "Search black-box trees for matching leaf colors"
)]
struct Cli {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of trials (per height for scaling); each experiment has its own default.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance in the tree format.
    Gen {
        family: GenFamily,
        #[arg(long, default_value_t = 4)]
        h: usize,
        /// Approximate node count for orbit trees.
        #[arg(long, default_value_t = 200)]
        size: usize,
        #[arg(long, default_value_t = 0.3)]
        prune: f64,
        /// Pruned pairs: make the second tree a shuffled copy of the first.
        #[arg(long)]
        planted: bool,
        /// Where to write the second tree of a pair.
        #[arg(long)]
        out2: Option<PathBuf>,
    },
    /// Check the invariance axiom on one tree or a pair.
    VerifyAxiom {
        #[arg(long)]
        tree1: PathBuf,
        #[arg(long)]
        tree2: Option<PathBuf>,
    },
    /// Run one strategy on a pair of trees and print its CSV row.
    Run {
        #[arg(long)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0.125)]
        epsilon: f64,
        #[arg(long)]
        tree1: PathBuf,
        #[arg(long)]
        tree2: PathBuf,
    },
    /// Run a seeded experiment; CSV goes to --out, the summary to stderr.
    Bench {
        experiment: ExperimentArg,
        #[arg(long)]
        strategy: Option<StrategyArg>,
        #[arg(long)]
        family: Option<FamilyArg>,
        #[arg(long)]
        h: Option<usize>,
        /// Comma-separated heights for scaling.
        #[arg(long, value_delimiter = ',')]
        heights: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.125)]
        epsilon: f64,
        /// Graph files for ir-occurrence instead of the built-in corpus.
        #[arg(long, num_args = 1..)]
        graphs: Option<Vec<PathBuf>>,
        /// Run trials one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Build the individualization-refinement tree of a graph file.
    IrTree {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    /// Complete binary tree with distinct leaf colors.
    Mh,
    /// An iso-shuffled copy of Mh.
    Shuffle,
    /// Mh pair with disjoint colors (needs --out2).
    Noniso,
    Orbit,
    /// Pruned pair (needs --out2).
    Pruned,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Mc,
    McBudgeted,
    Lv,
    Det,
}

impl StrategyArg {
    fn kind(self, epsilon: f64) -> StrategyKind {
        match self {
            StrategyArg::Mc => StrategyKind::Mc { epsilon },
            StrategyArg::McBudgeted => StrategyKind::McBudgeted { epsilon },
            StrategyArg::Lv => StrategyKind::Lv,
            StrategyArg::Det => StrategyKind::Det,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    ErrorRate,
    Scaling,
    SplitProbability,
    IrOccurrence,
    Separation,
    Soundness,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    IsoMh,
    DisjointMh,
    ShapeMismatch,
    OrbitIso,
    OrbitNoniso,
    PrunedPlanted,
    Pruned,
    SingleLeaf,
    Mixed,
}

impl FamilyArg {
    fn family(self, h: usize) -> Family {
        let spec = OrbitTreeSpec::default();
        match self {
            FamilyArg::IsoMh => Family::IsoMh { h },
            FamilyArg::DisjointMh => Family::DisjointMh { h },
            FamilyArg::ShapeMismatch => Family::ShapeMismatch { h },
            FamilyArg::OrbitIso => Family::Orbit { spec, iso: true },
            FamilyArg::OrbitNoniso => Family::Orbit { spec, iso: false },
            FamilyArg::PrunedPlanted => Family::Pruned {
                h,
                prune_prob: 0.3,
                planted: true,
            },
            FamilyArg::Pruned => Family::Pruned {
                h,
                prune_prob: 0.3,
                planted: false,
            },
            FamilyArg::SingleLeaf => Family::SingleLeaf,
            FamilyArg::Mixed => Family::Mixed,
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn read_tree(path: &Path) -> Result<SearchTree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_tree(&text).with_context(|| format!("parsing {}", path.display()))
}

fn gen(
    cli: &Cli,
    family: GenFamily,
    h: usize,
    size: usize,
    prune: f64,
    planted: bool,
    out2: Option<&Path>,
) -> Result<u8> {
    let (first, second) = match family {
        GenFamily::Mh => (gen_mh(h)?, None),
        GenFamily::Shuffle => (iso_shuffle(&gen_mh(h)?, cli.seed), None),
        GenFamily::Orbit => {
            let spec = OrbitTreeSpec {
                target_size: size,
                ..OrbitTreeSpec::default()
            };
            (gen_orbit_tree(&spec, cli.seed)?, None)
        }
        GenFamily::Noniso => {
            let (a, b) = gen_noniso_pair(h, cli.seed)?;
            (a, Some(b))
        }
        GenFamily::Pruned => {
            let (a, b) = gen_pruned_pair(h, prune, cli.seed, planted)?;
            (a, Some(b))
        }
    };
    write_out(cli.out.as_deref(), &save_tree(&first))?;
    if let Some(b) = second {
        let Some(p) = out2 else {
            bail!("this family produces a pair; give --out2 for the second tree");
        };
        write_out(Some(p), &save_tree(&b))?;
    }
    Ok(0)
}

fn finish(cli: &Cli, rep: &ExperimentReport) -> Result<u8> {
    write_out(cli.out.as_deref(), &rep.csv_string())?;
    eprint!("{}", rep.summary_text());
    Ok(if rep.passed() { 0 } else { BREACH })
}

#[allow(clippy::too_many_arguments)]
fn bench(
    cli: &Cli,
    experiment: ExperimentArg,
    strategy: Option<StrategyArg>,
    family: Option<FamilyArg>,
    h: Option<usize>,
    heights: Option<&[usize]>,
    epsilon: f64,
    graphs: Option<&[PathBuf]>,
    sequential: bool,
) -> Result<u8> {
    let execution = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let config = |name: &str,
                  default_family: FamilyArg,
                  default_h: usize,
                  default_strategy: StrategyArg,
                  trials: u64| {
        let mut cfg = ExperimentConfig::new(
            name,
            family
                .unwrap_or(default_family)
                .family(h.unwrap_or(default_h)),
            strategy.unwrap_or(default_strategy).kind(epsilon),
            cli.trials.unwrap_or(trials),
            cli.seed,
        );
        cfg.execution = execution;
        cfg
    };
    let rep = match experiment {
        ExperimentArg::ErrorRate => error_rate_experiment(&config(
            "error-rate",
            FamilyArg::IsoMh,
            10,
            StrategyArg::Mc,
            1000,
        ))?,
        ExperimentArg::Scaling => {
            let s = strategy.unwrap_or(StrategyArg::McBudgeted);
            let (default_family, window, default_heights) = match s {
                StrategyArg::Det => (
                    FamilyArg::DisjointMh,
                    DET_EXPONENT_WINDOW,
                    vec![8, 10, 12, 14],
                ),
                StrategyArg::Lv => (FamilyArg::IsoMh, SQRT_EXPONENT_WINDOW, vec![8, 10, 12, 14]),
                _ => (
                    FamilyArg::IsoMh,
                    SQRT_EXPONENT_WINDOW,
                    vec![8, 10, 12, 14, 16],
                ),
            };
            let cfg = config("scaling", default_family, 8, s, 200);
            scaling_experiment(&cfg, heights.unwrap_or(&default_heights), window)?
        }
        ExperimentArg::SplitProbability => split_probability_experiment(&config(
            "split-probability",
            FamilyArg::IsoMh,
            12,
            StrategyArg::Lv,
            1000,
        ))?,
        ExperimentArg::IrOccurrence => {
            let corpus = match graphs {
                None => default_ir_corpus(),
                Some(paths) => paths
                    .iter()
                    .map(|p| {
                        let text = fs::read_to_string(p)
                            .with_context(|| format!("reading {}", p.display()))?;
                        let g = parse_graph(&text)
                            .with_context(|| format!("parsing {}", p.display()))?;
                        Ok((p.display().to_string(), g))
                    })
                    .collect::<Result<_>>()?,
            };
            ir_occurrence_experiment(&corpus, cli.seed, execution)?
        }
        ExperimentArg::Separation => separation_experiment(
            h.unwrap_or(12),
            cli.trials.unwrap_or(100),
            cli.seed,
            epsilon,
            execution,
        )?,
        ExperimentArg::Soundness => {
            let mut cfg = config("soundness", FamilyArg::Mixed, 4, StrategyArg::Lv, 10_000);
            if strategy.is_none() {
                cfg.strategies = [
                    StrategyArg::Mc,
                    StrategyArg::McBudgeted,
                    StrategyArg::Lv,
                    StrategyArg::Det,
                ]
                .map(|s| s.kind(epsilon))
                .to_vec();
            }
            soundness_experiment(&cfg)?
        }
    };
    finish(cli, &rep)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Gen {
            family,
            h,
            size,
            prune,
            planted,
            out2,
        } => gen(cli, *family, *h, *size, *prune, *planted, out2.as_deref()),
        Command::VerifyAxiom { tree1, tree2 } => {
            let t1 = read_tree(tree1)?;
            let t2 = tree2.as_deref().map(read_tree).transpose()?;
            let report = verify_axiom(&t1, t2.as_ref())?;
            let mut text = format!("pairs checked: {}\n", report.pairs_checked);
            for v in &report.violations {
                text += &format!("violation: {v}\n");
            }
            text += if report.passed() { "PASS\n" } else { "FAIL\n" };
            write_out(cli.out.as_deref(), &text)?;
            Ok(if report.passed() { 0 } else { BREACH })
        }
        Command::Run {
            strategy,
            epsilon,
            tree1,
            tree2,
        } => {
            let (t1, t2) = (read_tree(tree1)?, read_tree(tree2)?);
            let (_, a, b) = trial_seeds(cli.seed);
            let trial = play_pair(0, cli.seed, &t1, &t2, strategy.kind(*epsilon), (a, b))?;
            let rep = ExperimentReport {
                name: "run".into(),
                records: vec![trial.record],
                summary: vec![("outcome".into(), format!("{:?}", trial.verdict.outcome))],
                checks: Vec::new(),
            };
            finish(cli, &rep)
        }
        Command::Bench {
            experiment,
            strategy,
            family,
            h,
            heights,
            epsilon,
            graphs,
            sequential,
        } => bench(
            cli,
            *experiment,
            *strategy,
            *family,
            *h,
            heights.as_deref(),
            *epsilon,
            graphs.as_deref(),
            *sequential,
        ),
        Command::IrTree { graph } => {
            let text = fs::read_to_string(graph)
                .with_context(|| format!("reading {}", graph.display()))?;
            let g = parse_graph(&text).with_context(|| format!("parsing {}", graph.display()))?;
            let tree = IrTree::standalone(g)?;
            let t = SearchTree::materialize(&tree, 1 << 22)?;
            write_out(cli.out.as_deref(), &save_tree(&t))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
