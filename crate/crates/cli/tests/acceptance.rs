//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use dynconn_core::datasets::{gen_graph, DatasetSpec};
use dynconn_core::harness::{read_csv, BenchReport, OpClass};
use dynconn_core::oracle::OracleGraph;
use dynconn_core::verify::count_mismatches;
use dynconn_core::workload::{generate_churn, Operation};
use dynconn_core::{
    ClusterForest, ConnectivityStructure, DTree, EdgeKey, EdgeKind, Hdt, Hk, Hks, LinkCutForest,
    ReferenceForest,
};

const BIN: &str = env!("CARGO_BIN_EXE_dynconn");

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
}

fn verdict(id: usize, pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        id,
        pass,
        detail: detail.into(),
    }
}

fn floor_log2(x: usize) -> usize {
    (usize::BITS - 1 - x.max(1).leading_zeros()) as usize
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dynconn-accept-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn dynconn(args: &[&str]) -> std::process::Output {
    let out = Command::new(BIN).args(args).output().expect("run dynconn");
    assert!(
        out.status.success(),
        "dynconn {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn bench_csv(args: &[&str], out: &Path) -> BenchReport {
    let mut all = vec!["bench"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", out.to_str().unwrap()]);
    dynconn(&all);
    read_csv(std::fs::File::open(out).unwrap()).unwrap()
}

// ---- criteria 1, 3, 4: oracle runs with shape checks after every step ----

const N1: usize = 100;
const M1: usize = 300;
const OPS1: usize = 5_000;
const SEEDS1: u64 = 50;
const RATES1: [usize; 3] = [3, 10, 50];

#[derive(Default)]
struct RunTally {
    workloads: usize,
    ops: usize,
    mismatched_pairs: u64,
    height_violations: usize,
    tour_violations: usize,
    first_problem: Option<String>,
}

impl RunTally {
    fn problem(&mut self, msg: String) {
        self.first_problem.get_or_insert(msg);
    }
}

fn churn(seed: u64, u_r: usize) -> Vec<Operation> {
    let base = gen_graph(&DatasetSpec::Gnm(N1, M1), seed).unwrap().edges;
    generate_churn(&base, u_r, OPS1, seed).unwrap()
}

/// Replay on `s`; after each step compare with the oracle and run `check`,
/// which returns (height problem, tour problem).
fn run_one<S: ConnectivityStructure>(
    mut s: S,
    ops: &[Operation],
    tally: &mut RunTally,
    mut check: impl FnMut(&mut S) -> (Option<String>, Option<String>),
) {
    s.ensure_vertex(N1 - 1);
    let mut oracle = OracleGraph::new(N1);
    for op in ops {
        match *op {
            Operation::Insert(k) => {
                s.insert_edge(k.a(), k.b()).unwrap();
                oracle.insert(k);
            }
            Operation::Delete(k) => {
                s.delete_edge(k.a(), k.b());
                oracle.remove(k);
            }
            Operation::QueryBatch { .. } => continue,
        }
        tally.ops += 1;
        let bad = count_mismatches(&mut s, &oracle);
        if bad > 0 {
            tally.mismatched_pairs += bad;
            tally.problem(format!("{}: {bad} pairs disagree", s.name()));
        }
        let (h, t) = check(&mut s);
        if let Some(e) = h {
            tally.height_violations += 1;
            tally.problem(format!("{}: {e}", s.name()));
        }
        if let Some(e) = t {
            tally.tour_violations += 1;
            tally.problem(format!("{}: {e}", s.name()));
        }
    }
    tally.workloads += 1;
}

fn hierarchy_check(s: &mut ClusterForest, n: usize) -> (Option<String>, Option<String>) {
    let bound = floor_log2(n);
    let mut problem = s.shape_audit().err();
    let rep = s.shape_report();
    if problem.is_none() && rep.max_rank_roots > bound {
        problem = Some(format!("{} rank roots under one host", rep.max_rank_roots));
    }
    if problem.is_none() && (rep.max_rank_tree_height as f64) > (n as f64).log2() {
        problem = Some(format!("rank tree of height {}", rep.max_rank_tree_height));
    }
    if problem.is_none() && s.name().starts_with("ST") && s.max_height() > bound + 1 {
        problem = Some(format!("height {} above {}", s.max_height(), bound + 1));
    }
    (problem, None)
}

fn tour_check<S: ConnectivityStructure>(s: &mut S) -> (Option<String>, Option<String>) {
    (None, s.shape_audit().err())
}

fn oracle_runs() -> (RunTally, Duration) {
    let mut tally = RunTally::default();
    let start = Instant::now();
    for &u_r in &RATES1 {
        for seed in 0..SEEDS1 {
            let ops = churn(seed, u_r);
            let t = &mut tally;
            run_one(DTree::new(), &ops, t, |_| (None, None));
            run_one(LinkCutForest::new(), &ops, t, |_| (None, None));
            run_one(Hks::new(seed), &ops, t, tour_check);
            run_one(Hk::new(seed), &ops, t, tour_check);
            run_one(Hdt::new(seed), &ops, t, tour_check);
            for forest in [
                ClusterForest::st(),
                ClusterForest::stv(),
                ClusterForest::lt(),
                ClusterForest::ltv(),
                ClusterForest::lzt(2),
            ] {
                run_one(forest, &ops, t, |s| hierarchy_check(s, N1));
            }
        }
    }
    (tally, start.elapsed())
}

// ---- criterion 2: level histograms against the literal simulator ----

fn trimmed(mut h: Vec<usize>) -> Vec<usize> {
    while h.last() == Some(&0) {
        h.pop();
    }
    h
}

fn criterion2() -> Verdict {
    let n = 64;
    let mut compared = 0;
    for seed in 0..20u64 {
        let base = gen_graph(&DatasetSpec::Gnm(n, 3 * n), 100 + seed)
            .unwrap()
            .edges;
        let ops = generate_churn(&base, RATES1[seed as usize % 3], 2_000, seed).unwrap();
        let mut structures: Vec<Box<dyn ConnectivityStructure>> = vec![
            Box::new(Hdt::new(seed)),
            Box::new(ClusterForest::st()),
            Box::new(ClusterForest::lt()),
        ];
        let mut reference = ReferenceForest::new();
        for (step, op) in ops.iter().enumerate() {
            match *op {
                Operation::Insert(k) => {
                    reference.insert(k.a(), k.b()).unwrap();
                    for s in &mut structures {
                        s.insert_edge(k.a(), k.b()).unwrap();
                    }
                }
                Operation::Delete(k) => {
                    reference.delete(k.a(), k.b());
                    for s in &mut structures {
                        s.delete_edge(k.a(), k.b());
                    }
                }
                Operation::QueryBatch { .. } => continue,
            }
            let want = trimmed(reference.level_histogram());
            let want_edges: Vec<(EdgeKey, usize, EdgeKind)> = reference.edges().collect();
            for s in &structures {
                let got = trimmed(s.graph().level_histogram());
                let got_edges: Vec<_> = s
                    .graph()
                    .sorted_edges()
                    .iter()
                    .map(|e| (e.key, e.level, e.kind))
                    .collect();
                if got != want || got_edges != want_edges {
                    return verdict(
                        2,
                        false,
                        format!("{} seed {seed} step {step}: {got:?} vs {want:?}", s.name()),
                    );
                }
                compared += 1;
            }
        }
    }
    verdict(
        2,
        true,
        format!("{compared} histogram and per-edge level comparisons, HDT/ST/LT, n=64"),
    )
}

// ---- criterion 5: memory ordering ----

fn criterion5(dir: &Path) -> Verdict {
    let rep = bench_csv(
        &[
            "--structure",
            "all",
            "--dataset",
            "gnm:10000,100000",
            "--ur",
            "1000000",
            "--test-num",
            "0",
            "--seed",
            "1",
            "--jobs",
            "1",
        ],
        &dir.join("memory.csv"),
    );
    let mem: BTreeMap<String, u64> = rep
        .rows
        .iter()
        .filter(|r| r.op_class == OpClass::Insert)
        .map(|r| (r.structure.clone(), r.memory_bytes))
        .collect();
    if rep.rows.iter().any(|r| r.op_class == OpClass::Delete) || mem.len() != 10 {
        return verdict(
            5,
            false,
            "expected an insert-only run of all ten structures",
        );
    }
    let m = |k: &str| mem[k] as f64;
    let margin = 1.05;
    let hk_max = mem
        .iter()
        .all(|(k, &v)| k == "HK" || m("HK") >= margin * v as f64);
    let pass = m("D-tree") * margin <= m("ST")
        && m("ST") <= m("STV")
        && m("STV") * margin <= m("LT")
        && hk_max;
    let detail = format!(
        "D-tree {} < ST {} <= STV {} < LT {}; HK {} is max",
        mem["D-tree"], mem["ST"], mem["STV"], mem["LT"], mem["HK"]
    );
    verdict(5, pass, detail)
}

// ---- criterion 6: directional delete times ----

fn mean_delete(rep: &BenchReport, s: &str) -> f64 {
    rep.row(s, OpClass::Delete)
        .map_or(f64::NAN, |r| r.mean_ns as f64)
}

fn criterion6(dir: &Path) -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for seed in ["1", "2", "3"] {
        let common = [
            "--ur",
            "1000",
            "--test-num",
            "0",
            "--seed",
            seed,
            "--jobs",
            "1",
        ];
        let mut a = vec!["--structure", "hdt,hks", "--dataset", "path:100000"];
        a.extend_from_slice(&common);
        let path = bench_csv(&a, &dir.join(format!("path{seed}.csv")));
        let mut b = vec!["--structure", "lct,dtree", "--dataset", "gnm:10000,100000"];
        b.extend_from_slice(&common);
        let gnm = bench_csv(&b, &dir.join(format!("gnm{seed}.csv")));
        let r1 = mean_delete(&path, "HDT") / mean_delete(&path, "HKS");
        let r2 = mean_delete(&gnm, "LCT") / mean_delete(&gnm, "D-tree");
        pass &= r1 >= 10.0 && r2 >= 10.0;
        notes.push(format!(
            "seed {seed}: HDT/HKS {r1:.0}x, LCT/D-tree {r2:.0}x"
        ));
    }
    verdict(6, pass, notes.join("; "))
}

// ---- criterion 7: determinism through the CLI ----

fn stable_columns(path: &Path) -> Vec<String> {
    let rep = read_csv(std::fs::File::open(path).unwrap()).unwrap();
    rep.rows.iter().map(|r| r.stable_fields()).collect()
}

fn criterion7(dir: &Path) -> Verdict {
    let wl = [
        "--dataset",
        "powerlaw:3000,12000",
        "--ur",
        "20",
        "--seed",
        "77",
        "--test-num",
        "10",
        "--queries-per-point",
        "500",
        "--shuffle",
    ];
    let mut files = Vec::new();
    let mut csvs = Vec::new();
    for run in 0..2 {
        let w = dir.join(format!("w{run}.txt"));
        let mut g = vec!["gen-workload"];
        g.extend_from_slice(&wl);
        g.extend_from_slice(&["--out", w.to_str().unwrap()]);
        dynconn(&g);
        files.push(std::fs::read(&w).unwrap());
        let c = dir.join(format!("c{run}.csv"));
        let mut b = vec!["--structure", "all", "--jobs", "2"];
        b.extend_from_slice(&wl);
        bench_csv(&b, &c);
        csvs.push(stable_columns(&c));
    }
    let same_wl = files[0] == files[1] && !files[0].is_empty();
    let same_csv = csvs[0] == csvs[1] && csvs[0].len() == 30;
    verdict(
        7,
        same_wl && same_csv,
        format!(
            "workload files identical: {same_wl}; non-timing CSV columns identical: {same_csv}"
        ),
    )
}

// ---- criterion 8: sampler chi-square ----

fn sampler_config(c: usize) -> (Hk, usize) {
    let (n, edges, deletes) = match c {
        0 => (8, gen_graph(&DatasetSpec::Complete(8), 0).unwrap().edges, 0),
        1 => {
            let mut e = gen_graph(&DatasetSpec::Star(12), 0).unwrap().edges;
            for (u, v) in [
                (1, 2),
                (1, 3),
                (1, 4),
                (1, 5),
                (2, 3),
                (6, 7),
                (8, 9),
                (9, 10),
                (8, 10),
            ] {
                e.push(EdgeKey::new(u, v).unwrap());
            }
            (12, e, 0)
        }
        2 => (
            40,
            gen_graph(&DatasetSpec::Gnm(40, 160), 1).unwrap().edges,
            0,
        ),
        3 => (
            60,
            gen_graph(
                &DatasetSpec::PowerLaw {
                    n: 60,
                    m: 240,
                    exponent: 2.5,
                },
                2,
            )
            .unwrap()
            .edges,
            0,
        ),
        _ => {
            // K9 and K8 joined by a bridge; deleting the bridge finds no
            // replacement and pushes the smaller clique to level 1
            let mut e = Vec::new();
            for (lo, hi) in [(0, 9), (9, 17)] {
                for u in lo..hi {
                    for v in u + 1..hi {
                        e.push(EdgeKey::new(u, v).unwrap());
                    }
                }
            }
            e.insert(0, EdgeKey::new(8, 9).unwrap());
            (17, e, 1)
        }
    };
    let mut hk = Hk::new(c as u64);
    hk.ensure_vertex(n - 1);
    for k in &edges {
        hk.insert_edge(k.a(), k.b()).unwrap();
    }
    // delete the first `deletes` tree edges
    let mut gone = 0;
    for k in &edges {
        if gone == deletes {
            break;
        }
        if hk.graph().record(*k).map(|r| r.kind) == Some(EdgeKind::Tree) {
            hk.delete_edge(k.a(), k.b());
            gone += 1;
        }
    }
    let level = hk
        .graph()
        .edges()
        .filter(|r| r.kind == EdgeKind::NonTree)
        .map(|r| r.level)
        .max();
    (hk, level.unwrap_or(0))
}

/// Vertices in `v`'s tree among tree edges of level >= `level`.
fn level_tree(hk: &Hk, level: usize, v: usize) -> HashSet<usize> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for r in hk.graph().edges() {
        if r.kind == EdgeKind::Tree && r.level >= level {
            adj.entry(r.key.a()).or_default().push(r.key.b());
            adj.entry(r.key.b()).or_default().push(r.key.a());
        }
    }
    let mut seen = HashSet::from([v]);
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for &y in adj.get(&x).into_iter().flatten() {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen
}

fn criterion8() -> Verdict {
    let draws = 10_000;
    let mut notes = Vec::new();
    let mut pass = true;
    for c in 0..5 {
        let (mut hk, level) = sampler_config(c);
        let v = hk
            .graph()
            .edges()
            .find(|r| r.kind == EdgeKind::NonTree && r.level == level)
            .map(|r| r.key.a())
            .expect("configuration has non-tree edges");
        let tree = level_tree(&hk, level, v);
        // every non-tree entry (x -> y) at this level with x in the tree has weight 1
        let mut entries: Vec<(usize, usize)> = Vec::new();
        for r in hk.graph().edges() {
            if r.kind == EdgeKind::NonTree && r.level == level {
                for (x, y) in [(r.key.a(), r.key.b()), (r.key.b(), r.key.a())] {
                    if tree.contains(&x) {
                        entries.push((x, y));
                    }
                }
            }
        }
        entries.sort_unstable();
        let mut count: HashMap<(usize, usize), f64> = HashMap::new();
        for _ in 0..draws {
            let e = hk.sample_entry(level, v).unwrap();
            *count.entry(e).or_default() += 1.0;
        }
        let unexpected = count.keys().any(|e| entries.binary_search(e).is_err());
        let expected = draws as f64 / entries.len() as f64;
        let stat: f64 = entries
            .iter()
            .map(|e| (count.get(e).copied().unwrap_or(0.0) - expected).powi(2) / expected)
            .sum();
        let p = 1.0
            - ChiSquared::new((entries.len() - 1) as f64)
                .unwrap()
                .cdf(stat);
        pass &= p > 0.01 && !unexpected;
        notes.push(format!(
            "cfg{c} (level {level}, {} entries) p={p:.3}",
            entries.len()
        ));
    }
    verdict(8, pass, notes.join("; "))
}

#[test]
fn acceptance() {
    let dir = scratch("run");
    let mut verdicts = Vec::new();

    let (tally, took) = oracle_runs();
    let runs = format!(
        "{} structure runs, {} operations",
        tally.workloads, tally.ops
    );
    let why = tally.first_problem.clone().unwrap_or_default();
    verdicts.push(verdict(
        1,
        tally.mismatched_pairs == 0 && took < Duration::from_secs(600),
        format!(
            "{runs}, {} mismatched pairs, {:.0}s including criteria 3-4 checks {why}",
            tally.mismatched_pairs,
            took.as_secs_f64()
        ),
    ));
    verdicts.push(criterion2());
    verdicts.push(verdict(
        3,
        tally.height_violations == 0,
        format!("{} height violations over {runs}", tally.height_violations),
    ));
    verdicts.push(verdict(
        4,
        tally.tour_violations == 0,
        format!("{} tour violations over {runs}", tally.tour_violations),
    ));
    verdicts.push(criterion5(&dir));
    verdicts.push(criterion6(&dir));
    verdicts.push(criterion7(&dir));
    verdicts.push(criterion8());

    std::fs::remove_dir_all(&dir).ok();
    verdicts.sort_by_key(|v| v.id);
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag}  {}", v.id, v.detail);
    }
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
