use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dynconn_core::datasets::{gen_graph, Dataset, DatasetSpec};
use dynconn_core::harness::{replay, run_benchmark, write_csv, BenchReport, RunParams};
use dynconn_core::verify::{verify_structure, VerifyOptions};
use dynconn_core::workload::{generate_updates, place_testing_points, Workload, WorkloadConfig};
use dynconn_core::{MemoryModel, StructureKind};

#[derive(Parser)]
#[command(name = "dynconn", version, about = "Dynamic connectivity benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a workload on one or all structures and report timings as CSV.
    Bench(BenchArgs),
    /// Check structures against a BFS oracle on random churn.
    Verify(VerifyArgs),
    /// Write the workload a bench run would use.
    GenWorkload(GenArgs),
}

#[derive(Args)]
struct WorkloadArgs {
    /// file:PATH, star:N, path:N, complete:N, gnm:N,M or powerlaw:N,M[,EXP]
    #[arg(long)]
    dataset: String,
    /// Insertions per deletion.
    #[arg(long = "ur", default_value_t = 100)]
    u_r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    test_num: usize,
    #[arg(long, default_value_t = 100_000)]
    queries_per_point: usize,
    /// Shuffle the edge order before inserting.
    #[arg(long)]
    shuffle: bool,
}

impl WorkloadArgs {
    fn config(&self) -> WorkloadConfig {
        WorkloadConfig {
            u_r: self.u_r,
            test_num: self.test_num,
            queries_per_point: self.queries_per_point,
            seed: self.seed,
            shuffle: self.shuffle,
        }
    }

    fn dataset(&self) -> Result<(DatasetSpec, Dataset)> {
        let spec: DatasetSpec = self.dataset.parse()?;
        let data = gen_graph(&spec, self.seed).with_context(|| format!("dataset {spec}"))?;
        Ok((spec, data))
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Structure name, or `all`.
    #[arg(long, default_value = "all")]
    structure: String,
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Replay this workload file instead of generating one.
    #[arg(long = "workload")]
    workload_file: Option<PathBuf>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// Buffer threshold for LzT.
    #[arg(long, default_value_t = 2)]
    beta: usize,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append rows to an existing CSV instead of replacing it.
    #[arg(long)]
    append: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Size of the edge pool; defaults to 3n.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    ops: usize,
    #[arg(long = "ur", default_value_t = 10)]
    u_r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "all")]
    structure: String,
    #[arg(long, default_value_t = 2)]
    beta: usize,
    /// Skip the per-operation structural audit.
    #[arg(long)]
    no_audit: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long)]
    out: PathBuf,
}

fn structures(name: &str) -> Result<Vec<StructureKind>> {
    if name.eq_ignore_ascii_case("all") {
        return Ok(StructureKind::ALL.to_vec());
    }
    name.split(',')
        .map(|s| s.parse().map_err(anyhow::Error::from))
        .collect()
}

fn memory_model() -> Result<MemoryModel> {
    match std::env::var_os("DYNCONN_MEMMODEL") {
        Some(p) => {
            let text = fs::read_to_string(&p)
                .with_context(|| format!("reading {}", Path::new(&p).display()))?;
            Ok(MemoryModel::parse_overrides(&text)?)
        }
        None => Ok(MemoryModel::default()),
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let kinds = structures(&a.structure)?;
    let params = RunParams {
        beta: a.beta,
        timeout: a.timeout_secs.map(Duration::from_secs),
        memory: memory_model()?,
    };
    let w = &a.workload;
    let (spec, data) = w.dataset()?;
    if data.duplicates_dropped + data.self_loops_dropped > 0 {
        eprintln!(
            "note: dropped {} duplicate edges and {} self-loops",
            data.duplicates_dropped, data.self_loops_dropped
        );
    }
    if matches!(spec, DatasetSpec::PowerLaw { .. }) {
        eprintln!("note: power-law graph uses weighted endpoint sampling");
    }
    let label = spec.to_string();
    let file = match &a.workload_file {
        Some(p) => Some(Workload::parse(&fs::read_to_string(p)?)?),
        None => None,
    };
    let run = |k: StructureKind| -> Result<BenchReport> {
        let rep = match &file {
            Some(wl) => {
                let n = data.n.max(wl.vertex_count());
                replay(&wl.ops, n, &label, k, wl.u_r, wl.seed, &params)?
            }
            None => run_benchmark(&data, &label, k, &w.config(), &params)?,
        };
        Ok(rep)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()?;
    let results: Vec<Result<BenchReport>> =
        pool.install(|| kinds.par_iter().map(|&k| run(k)).collect());
    let mut report = BenchReport::default();
    for r in results {
        report.extend(r?);
    }
    match &a.out {
        Some(path) => {
            let fresh = !a.append || fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
            let f = OpenOptions::new()
                .create(true)
                .write(true)
                .append(a.append)
                .truncate(!a.append)
                .open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            write_csv(&report, f, fresh)?;
        }
        None => write_csv(&report, io::stdout().lock(), true)?,
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let kinds = structures(&a.structure)?;
    let opts = VerifyOptions {
        n: a.n,
        m: a.m.unwrap_or(3 * a.n),
        ops: a.ops,
        u_r: a.u_r,
        seed: a.seed,
        beta: a.beta,
        audit: !a.no_audit,
    };
    let reports: Vec<_> = kinds
        .par_iter()
        .map(|&k| (k, verify_structure(k, &opts)))
        .collect();
    let mut ok = true;
    let mut out = io::stdout().lock();
    for (k, r) in reports {
        let verdict = if r.passed() { "ok" } else { "FAIL" };
        writeln!(
            out,
            "{k:<7}{verdict:<5}ops={} pairs={} mismatches={} audit_failures={}",
            r.ops, r.pairs_checked, r.mismatched_pairs, r.audit_failures
        )?;
        for e in &r.errors {
            writeln!(out, "    {e}")?;
        }
        ok &= r.passed();
    }
    Ok(ok)
}

fn gen_workload(a: GenArgs) -> Result<()> {
    let w = &a.workload;
    let (_, data) = w.dataset()?;
    let cfg = w.config();
    let ops = place_testing_points(
        &generate_updates(&data.edges, &cfg)?,
        cfg.test_num,
        cfg.queries_per_point,
    )?;
    let wl = Workload {
        seed: cfg.seed,
        u_r: cfg.u_r,
        ops,
    };
    fs::write(&a.out, wl.to_text()).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let res = match Cli::parse().cmd {
        Cmd::Bench(a) => bench(a),
        Cmd::Verify(a) => verify(a).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                bail!("verification failed")
            }
        }),
        Cmd::GenWorkload(a) => gen_workload(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
