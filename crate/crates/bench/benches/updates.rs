use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use std::hint::black_box;

use dynconn_core::datasets::{gen_graph, DatasetSpec};
use dynconn_core::workload::{generate_query_pairs, generate_updates, Operation, WorkloadConfig};
use dynconn_core::{build, BuildOptions, ConnectivityStructure, StructureKind};

const N: usize = 2_000;
const M: usize = 8_000;

fn fresh(kind: StructureKind) -> Box<dyn ConnectivityStructure> {
    build(
        kind,
        &BuildOptions {
            seed: 1,
            vertices: N,
            ..Default::default()
        },
    )
}

fn apply(s: &mut dyn ConnectivityStructure, ops: &[Operation]) {
    for op in ops {
        match *op {
            Operation::Insert(k) => {
                s.insert_edge(k.a(), k.b()).unwrap();
            }
            Operation::Delete(k) => {
                s.delete_edge(k.a(), k.b());
            }
            Operation::QueryBatch { .. } => {}
        }
    }
}

fn workloads(c: &mut Criterion) {
    let g = gen_graph(&DatasetSpec::Gnm(N, M), 1).unwrap();
    let mut group = c.benchmark_group("replay");
    group.sample_size(10);
    for u_r in [M + 1, 5] {
        let cfg = WorkloadConfig {
            u_r,
            seed: 1,
            ..Default::default()
        };
        let ops = generate_updates(&g.edges, &cfg).unwrap();
        for kind in StructureKind::ALL {
            group.bench_with_input(BenchmarkId::new(kind.name(), u_r), &ops, |b, ops| {
                b.iter_batched(
                    || fresh(kind),
                    |mut s| apply(s.as_mut(), ops),
                    BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

fn queries(c: &mut Criterion) {
    let g = gen_graph(&DatasetSpec::Gnm(N, N), 2).unwrap();
    let pairs = generate_query_pairs(N, 1_000, 3);
    let mut group = c.benchmark_group("query");
    for kind in StructureKind::ALL {
        let mut s = fresh(kind);
        for k in &g.edges {
            s.insert_edge(k.a(), k.b()).unwrap();
        }
        group.bench_function(kind.name(), |b| {
            b.iter(|| {
                for &(u, v) in &pairs {
                    black_box(s.connected(u, v));
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, workloads, queries);
criterion_main!(benches);
