use super::*;
use crate::graph::EdgeClass;
use crate::oracle::OracleGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all() -> Vec<ClusterForest> {
    vec![
        ClusterForest::st(),
        ClusterForest::stv(),
        ClusterForest::lt(),
        ClusterForest::ltv(),
        ClusterForest::lzt(2),
        ClusterForest::lzt(5),
    ]
}

fn apply(f: &mut ClusterForest, ops: &[(bool, usize, usize)]) {
    for &(ins, u, v) in ops {
        if ins {
            f.insert_edge(u, v).unwrap();
        } else {
            f.delete_edge(u, v);
        }
        f.audit()
            .unwrap_or_else(|e| panic!("{} after ({u},{v}): {e}", f.name()));
    }
}

/// Raises (3,4), (6,7), (7,8) to level 1 through helper vertices 0, 9..=14.
fn level_one_prefix() -> Vec<(bool, usize, usize)> {
    let mut ops = vec![];
    for (u, v) in [(3, 4), (4, 0), (0, 9), (9, 10)] {
        ops.push((true, u, v));
    }
    for (u, v) in [(4, 0), (0, 9), (9, 10)] {
        ops.push((false, u, v));
    }
    for (u, v) in [(6, 7), (7, 8), (8, 11), (11, 12), (12, 13), (13, 14)] {
        ops.push((true, u, v));
    }
    for (u, v) in [(8, 11), (11, 12), (12, 13), (13, 14)] {
        ops.push((false, u, v));
    }
    ops
}

fn example_five() -> Vec<(bool, usize, usize)> {
    let mut ops = level_one_prefix();
    for (u, v) in [(2, 3), (2, 5), (1, 5), (3, 6), (1, 2), (1, 3), (5, 8)] {
        ops.push((true, u, v));
    }
    ops
}

#[test]
fn prefix_levels() {
    for mut f in all() {
        apply(&mut f, &level_one_prefix());
        assert_eq!(f.classify_edge(3, 4), EdgeClass::Tree(1));
        assert_eq!(f.classify_edge(6, 7), EdgeClass::Tree(1));
        assert_eq!(f.classify_edge(7, 8), EdgeClass::Tree(1));
    }
}

#[test]
fn side_pushed_down_and_replaced() {
    for mut f in all() {
        apply(&mut f, &example_five());
        let out = f.delete_edge(2, 3);
        f.audit().unwrap();
        assert_eq!(
            out,
            UpdateOutcome::SplitReconnected(EdgeKey::new(1, 3).unwrap()),
            "{}",
            f.name()
        );
        assert_eq!(f.classify_edge(1, 3), EdgeClass::Tree(0));
        assert_eq!(f.classify_edge(1, 2), EdgeClass::NonTree(1));
        assert_eq!(f.classify_edge(2, 5), EdgeClass::Tree(1));
        assert_eq!(f.classify_edge(1, 5), EdgeClass::Tree(1));
        assert_eq!(f.classify_edge(5, 8), EdgeClass::NonTree(0));
        // {1,2,5} is now one level-1 cluster
        let l = f.leaf[2];
        let c = f.cluster_parent(l);
        assert_eq!(f.nodes[c].level, 1);
        assert_eq!(f.leaves_below(c), vec![1, 2, 5]);
    }
}

#[test]
fn merged_adjacency_visits_more() {
    let mut st = ClusterForest::st();
    let mut stv = ClusterForest::stv();
    apply(&mut st, &example_five());
    apply(&mut stv, &example_five());
    let (a, b) = (st.edge_visits(), stv.edge_visits());
    st.delete_edge(2, 3);
    stv.delete_edge(2, 3);
    assert!(stv.edge_visits() - b >= st.edge_visits() - a);
}

#[test]
fn bridge_split() {
    for mut f in all() {
        apply(&mut f, &[(true, 0, 1), (true, 1, 2), (true, 2, 3)]);
        assert_eq!(f.delete_edge(1, 2), UpdateOutcome::SplitPermanent);
        f.audit().unwrap();
        assert!(!f.connected(0, 3));
        assert!(f.connected(0, 1));
        assert_eq!(f.delete_edge(1, 2), UpdateOutcome::MissingIgnored);
    }
}

#[test]
fn lazy_buffer_promotes() {
    let mut f = ClusterForest::lzt(2);
    f.ensure_vertex(1);
    let r = f.find_root(0).unwrap();
    assert_eq!(f.nodes[f.nodes[r].left].kind, NodeKind::BufferRoot);
    f.insert_edge(0, 1).unwrap();
    let r = f.find_root(0).unwrap();
    assert_eq!(f.nodes[r].left, NIL);
    let z = f.nodes[r].right;
    assert_eq!(f.nodes[z].kind, NodeKind::LazyRoot);
    assert_eq!(f.nodes[f.nodes[z].left].kind, NodeKind::BottomRoot);
    f.audit().unwrap();
}

#[test]
fn rank_roots_stay_few() {
    let mut f = ClusterForest::lt();
    for v in 1..1000 {
        f.insert_edge(0, v).unwrap();
    }
    f.audit().unwrap();
    let rep = f.shape_report();
    assert!(rep.max_rank_roots <= 9, "{rep:?}");
    assert!(rep.max_rank_tree_height <= 9);
}

#[test]
fn random_against_oracle() {
    for seed in 0..4u64 {
        for mut f in all() {
            let n = 14;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut oracle = OracleGraph::new(n);
            f.ensure_vertex(n - 1);
            for _ in 0..500 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u == v {
                    continue;
                }
                let k = EdgeKey::new(u, v).unwrap();
                if oracle.contains(k) && rng.gen_bool(0.6) {
                    f.delete_edge(u, v);
                    oracle.remove(k);
                } else if !oracle.contains(k) {
                    f.insert_edge(u, v).unwrap();
                    oracle.insert(k);
                }
                f.audit().unwrap_or_else(|e| panic!("{}: {e}", f.name()));
                let labels = oracle.labels();
                for a in 0..n {
                    for b in 0..n {
                        assert_eq!(f.connected(a, b), labels[a] == labels[b], "{}", f.name());
                    }
                }
            }
        }
    }
}
