use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn leafmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leafmatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(rel)
        .display()
        .to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEADER: &str = "trial,seed,h,n,N,d,verdict,cost1,cost2,restarts,balanced";

#[test]
fn gen_then_verify_then_run() {
    let (t1, t2) = (scratch("m4.tree"), scratch("m4s.tree"));
    let (p1, p2) = (t1.to_str().unwrap(), t2.to_str().unwrap());
    assert!(leafmatch(&["gen", "mh", "--h", "4", "--out", p1])
        .status
        .success());
    assert!(
        leafmatch(&["gen", "shuffle", "--h", "4", "--seed", "3", "--out", p2])
            .status
            .success()
    );
    let v = leafmatch(&["verify-axiom", "--tree1", p1, "--tree2", p2]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).ends_with("PASS\n"));
    for strategy in ["mc", "mc-budgeted", "lv", "det"] {
        let r = leafmatch(&[
            "run",
            "--strategy",
            strategy,
            "--epsilon",
            "0.125",
            "--seed",
            "7",
            "--tree1",
            p1,
            "--tree2",
            p2,
        ]);
        assert_eq!(r.status.code(), Some(0), "{strategy}");
        let out = stdout(&r);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some(HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&row[..6], &["0", "7", "4", "31", "31", "2"]);
    }
}

#[test]
fn run_is_reproducible() {
    let (t1, t2) = (scratch("r1.tree"), scratch("r2.tree"));
    let (p1, p2) = (t1.to_str().unwrap(), t2.to_str().unwrap());
    leafmatch(&[
        "gen",
        "pruned",
        "--h",
        "3",
        "--planted",
        "--seed",
        "5",
        "--out",
        p1,
        "--out2",
        p2,
    ]);
    let args = [
        "run",
        "--strategy",
        "mc-budgeted",
        "--seed",
        "11",
        "--tree1",
        p1,
        "--tree2",
        p2,
    ];
    assert_eq!(stdout(&leafmatch(&args)), stdout(&leafmatch(&args)));
}

#[test]
fn axiom_violation_exits_with_breach_code() {
    let v = leafmatch(&[
        "verify-axiom",
        "--tree1",
        &data("trees/negative_depths.tree"),
    ]);
    assert_eq!(v.status.code(), Some(2));
    let out = stdout(&v);
    assert!(out.contains("tree1 leaf 1 and tree1 leaf 3"), "{out}");
    assert!(out.ends_with("FAIL\n"));
}

#[test]
fn errors_exit_with_one() {
    let r = leafmatch(&[
        "run",
        "--strategy",
        "lv",
        "--tree1",
        "/nonexistent",
        "--tree2",
        "/nonexistent",
    ]);
    assert_eq!(r.status.code(), Some(1));
    let pair = leafmatch(&["gen", "noniso", "--h", "2"]);
    assert_eq!(pair.status.code(), Some(1), "pair without --out2");
    let g = scratch("loop.txt");
    fs::write(&g, "e 1 1\n").unwrap();
    let r = leafmatch(&["ir-tree", "--graph", g.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("self-loop"));
}

#[test]
fn ir_tree_of_c4_has_eight_leaves() {
    let out = scratch("c4.tree");
    let r = leafmatch(&[
        "ir-tree",
        "--graph",
        &data("graphs/c4.txt"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let leaves = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.ends_with(" -"))
        .count()
        - 1;
    assert_eq!(leaves, 8, "{text}");
}

#[test]
fn bench_writes_csv_and_reports() {
    let out = scratch("split.csv");
    let r = leafmatch(&[
        "bench",
        "split-probability",
        "--h",
        "6",
        "--trials",
        "20",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some(HEADER));
    assert_eq!(csv.lines().count(), 21);
    assert!(String::from_utf8_lossy(&r.stderr).contains("PASS balanced-fraction"));
}

#[test]
fn bench_reports_breach_with_code_two() {
    // At h = 3 a quarter of the exhaustive cost is 3.5, below the cost of
    // a single pair of walks, so the Monte Carlo side must breach.
    let r = leafmatch(&["bench", "separation", "--h", "3", "--trials", "5"]);
    assert_eq!(
        r.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let err = String::from_utf8_lossy(&r.stderr).to_string();
    assert!(
        err.contains("PASS det-exhausts") && err.contains("FAIL mc-below-quarter"),
        "{err}"
    );
}

#[test]
fn ir_occurrence_over_corpus_files() {
    let names = ["k2", "p4", "c4", "c5", "k3", "star3", "rigid6"];
    let paths: Vec<String> = names
        .iter()
        .map(|n| data(&format!("graphs/{n}.txt")))
        .collect();
    let mut args = vec!["bench", "ir-occurrence", "--graphs"];
    args.extend(paths.iter().map(String::as_str));
    let r = leafmatch(&args);
    assert_eq!(r.status.code(), Some(0));
    let out = stdout(&r);
    assert_eq!(out.lines().count(), names.len() + 1);
    assert!(out.lines().skip(1).all(|l| l.contains(",pass,")));
}
