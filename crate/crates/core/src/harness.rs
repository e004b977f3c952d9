//! Workload replay with per-operation timing, and the CSV report.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::connectivity::{build, BuildOptions, StructureKind};
use crate::datasets::Dataset;
use crate::graph::GraphError;
use crate::memory::MemoryModel;
use crate::workload::{
    batch_seed, generate_query_pairs, generate_updates, place_testing_points, Operation,
    WorkloadConfig, WorkloadError,
};

pub const CSV_HEADER: [&str; 12] = [
    "structure",
    "dataset",
    "u_r",
    "op_class",
    "count",
    "total_ns",
    "mean_ns",
    "p99_ns",
    "memory_bytes",
    "max_height",
    "seed",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpClass {
    Insert,
    Delete,
    Query,
}

impl OpClass {
    pub const ALL: [OpClass; 3] = [OpClass::Insert, OpClass::Delete, OpClass::Query];

    pub fn as_str(&self) -> &'static str {
        match self {
            OpClass::Insert => "insert",
            OpClass::Delete => "delete",
            OpClass::Query => "query",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Timeout,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub structure: String,
    pub dataset: String,
    pub u_r: usize,
    pub op_class: OpClass,
    pub count: u64,
    pub total_ns: u64,
    pub mean_ns: u64,
    pub p99_ns: u64,
    pub memory_bytes: u64,
    pub max_height: usize,
    pub seed: u64,
    pub status: RunStatus,
}

impl BenchRow {
    /// The columns that do not depend on the clock.
    pub fn stable_fields(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.structure,
            self.dataset,
            self.u_r,
            self.op_class.as_str(),
            self.count,
            self.memory_bytes,
            self.max_height,
            self.seed,
            self.status.as_str()
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, structure: &str, class: OpClass) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.structure == structure && r.op_class == class)
    }

    pub fn extend(&mut self, other: BenchReport) {
        self.rows.extend(other.rows);
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad report: {0}")]
    BadReport(String),
}

#[derive(Clone, Debug)]
pub struct RunParams {
    pub beta: usize,
    pub timeout: Option<Duration>,
    pub memory: MemoryModel,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            beta: 2,
            timeout: None,
            memory: MemoryModel::default(),
        }
    }
}

#[derive(Default)]
struct Timings {
    samples: [Vec<u64>; 3],
}

impl Timings {
    fn push(&mut self, class: OpClass, ns: u64) {
        self.samples[class as usize].push(ns);
    }
}

fn p99(samples: &mut [u64]) -> u64 {
    if samples.is_empty() {
        return 0;
    }
    // nearest rank
    let rank = (samples.len() * 99).div_ceil(100).max(1) - 1;
    *samples.select_nth_unstable(rank).1
}

fn elapsed_ns(t: Instant) -> u64 {
    t.elapsed().as_nanos().min(u64::MAX as u128) as u64
}

/// Build `dataset`'s workload under `cfg` and replay it on `kind`.
pub fn run_benchmark(
    dataset: &Dataset,
    label: &str,
    kind: StructureKind,
    cfg: &WorkloadConfig,
    params: &RunParams,
) -> Result<BenchReport, HarnessError> {
    let updates = generate_updates(&dataset.edges, cfg)?;
    let ops = place_testing_points(&updates, cfg.test_num, cfg.queries_per_point)?;
    replay(&ops, dataset.n, label, kind, cfg.u_r, cfg.seed, params)
}

/// Replay a prepared operation stream on a fresh `kind` over `n` vertices.
pub fn replay(
    ops: &[Operation],
    n: usize,
    label: &str,
    kind: StructureKind,
    u_r: usize,
    seed: u64,
    params: &RunParams,
) -> Result<BenchReport, HarnessError> {
    let opts = BuildOptions {
        seed,
        beta: params.beta,
        vertices: n,
    };
    let mut s = build(kind, &opts);
    let mut t = Timings::default();
    let start = Instant::now();
    let mut status = RunStatus::Ok;
    for op in ops {
        if params.timeout.is_some_and(|b| start.elapsed() > b) {
            status = RunStatus::Timeout;
            break;
        }
        match *op {
            Operation::Insert(k) => {
                let t0 = Instant::now();
                s.insert_edge(k.a(), k.b())?;
                t.push(OpClass::Insert, elapsed_ns(t0));
            }
            Operation::Delete(k) => {
                let t0 = Instant::now();
                s.delete_edge(k.a(), k.b());
                t.push(OpClass::Delete, elapsed_ns(t0));
            }
            Operation::QueryBatch { id, pairs } => {
                for (u, v) in generate_query_pairs(n, pairs, batch_seed(seed, id)) {
                    let t0 = Instant::now();
                    std::hint::black_box(s.connected(u, v));
                    t.push(OpClass::Query, elapsed_ns(t0));
                }
            }
        }
    }
    let memory_bytes = s.memory_bytes(&params.memory);
    let max_height = s.max_height();
    let mut report = BenchReport::default();
    for class in OpClass::ALL {
        let samples = &mut t.samples[class as usize];
        // a timed-out run still reports every class so the cutoff is visible
        if samples.is_empty() && status == RunStatus::Ok {
            continue;
        }
        let count = samples.len() as u64;
        let total_ns: u64 = samples.iter().sum();
        report.rows.push(BenchRow {
            structure: kind.name().to_string(),
            dataset: label.to_string(),
            u_r,
            op_class: class,
            count,
            total_ns,
            mean_ns: total_ns / count.max(1),
            p99_ns: p99(samples),
            memory_bytes,
            max_height,
            seed,
            status,
        });
    }
    Ok(report)
}

pub fn write_csv<W: Write>(report: &BenchReport, out: W, header: bool) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for r in &report.rows {
        w.write_record([
            r.structure.clone(),
            r.dataset.clone(),
            r.u_r.to_string(),
            r.op_class.as_str().to_string(),
            r.count.to_string(),
            r.total_ns.to_string(),
            r.mean_ns.to_string(),
            r.p99_ns.to_string(),
            r.memory_bytes.to_string(),
            r.max_height.to_string(),
            r.seed.to_string(),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<BenchReport, HarnessError> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    if rd.headers()?.iter().ne(CSV_HEADER) {
        return Err(HarnessError::BadReport("unexpected header".into()));
    }
    let mut report = BenchReport::default();
    for rec in rd.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        fn num<T: FromStr>(s: &str) -> Result<T, HarnessError> {
            s.parse()
                .map_err(|_| HarnessError::BadReport(format!("bad number `{s}`")))
        }
        let op_class = match field(3) {
            "insert" => OpClass::Insert,
            "delete" => OpClass::Delete,
            "query" => OpClass::Query,
            o => return Err(HarnessError::BadReport(format!("bad op_class `{o}`"))),
        };
        let status = match field(11) {
            "ok" => RunStatus::Ok,
            "timeout" => RunStatus::Timeout,
            o => return Err(HarnessError::BadReport(format!("bad status `{o}`"))),
        };
        report.rows.push(BenchRow {
            structure: field(0).to_string(),
            dataset: field(1).to_string(),
            u_r: num(field(2))?,
            op_class,
            count: num(field(4))?,
            total_ns: num(field(5))?,
            mean_ns: num(field(6))?,
            p99_ns: num(field(7))?,
            memory_bytes: num(field(8))?,
            max_height: num(field(9))?,
            seed: num(field(10))?,
            status,
        });
    }
    Ok(report)
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
