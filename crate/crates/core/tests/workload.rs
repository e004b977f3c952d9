use std::collections::HashSet;

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use dynconn_core::workload::*;
use dynconn_core::EdgeKey;

fn edge_list() -> impl Strategy<Value = Vec<EdgeKey>> {
    prop::collection::btree_set((0usize..30, 0usize..30), 0..120).prop_map(|s| {
        let mut seen = HashSet::new();
        s.into_iter()
            .filter_map(|(u, v)| EdgeKey::new(u, v).ok())
            .filter(|k| seen.insert(*k))
            .collect()
    })
}

proptest! {
    #[test]
    fn deletes_hit_present_edges(edges in edge_list(), u_r in 1usize..8, seed: u64, shuffle: bool) {
        let cfg = WorkloadConfig { u_r, seed, shuffle, ..Default::default() };
        let ops = generate_updates(&edges, &cfg).unwrap();
        let mut present = HashSet::new();
        let (mut ins, mut del) = (0, 0);
        for op in &ops {
            match op {
                Operation::Insert(k) => { prop_assert!(present.insert(*k)); ins += 1; }
                Operation::Delete(k) => { prop_assert!(present.remove(k)); del += 1; }
                Operation::QueryBatch { .. } => prop_assert!(false),
            }
        }
        prop_assert_eq!(ins, edges.len());
        prop_assert_eq!(del, edges.len() / u_r);
        prop_assert_eq!(&ops, &generate_updates(&edges, &cfg).unwrap());
    }

    #[test]
    fn marker_count(updates in 1usize..400, test_num in 1usize..50) {
        let ops: Vec<Operation> = (0..updates).map(|i| Operation::Insert(EdgeKey::new(i, i + 1).unwrap())).collect();
        match place_testing_points(&ops, test_num, 1) {
            Ok(out) => {
                prop_assert!(updates >= test_num);
                let markers = out.iter().filter(|o| !o.is_update()).count();
                prop_assert_eq!(markers, test_num);
                prop_assert_eq!(out.len(), updates + test_num);
            }
            Err(WorkloadError::TooFewUpdates { .. }) => prop_assert!(updates < test_num),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn serialized_form_round_trips(edges in edge_list(), u_r in 1usize..5, seed: u64) {
        let cfg = WorkloadConfig { u_r, seed, ..Default::default() };
        let updates = generate_updates(&edges, &cfg).unwrap();
        let ops = place_testing_points(&updates, updates.len().min(3), 7).unwrap();
        let w = Workload { seed, u_r, ops };
        let text = w.to_text();
        prop_assert_eq!(Workload::parse(&text).unwrap(), w);
    }
}

#[test]
fn query_pairs_uniform() {
    let n = 100;
    let draws = 100_000;
    let mut freq = vec![0u64; n];
    for (u, v) in generate_query_pairs(n, draws, 17) {
        assert_ne!(u, v);
        freq[u] += 1;
        freq[v] += 1;
    }
    let expected = 2.0 * draws as f64 / n as f64;
    let stat: f64 = freq
        .iter()
        .map(|&f| (f as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.01, "p = {p}");
}
