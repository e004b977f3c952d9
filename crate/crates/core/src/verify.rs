//! Oracle equivalence runs: replay a churn workload on a structure and a
//! BFS oracle side by side, comparing connectivity after every operation.

use std::collections::HashMap;

use crate::connectivity::{build, BuildOptions, ConnectivityStructure, StructureKind};
use crate::datasets::{gen_graph, DatasetSpec};
use crate::oracle::OracleGraph;
use crate::workload::{generate_churn, Operation};

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub n: usize,
    pub m: usize,
    pub ops: usize,
    pub u_r: usize,
    pub seed: u64,
    pub beta: usize,
    /// Run the structure's full self-check after every operation.
    pub audit: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n: 100,
            m: 300,
            ops: 5000,
            u_r: 10,
            seed: 0,
            beta: 2,
            audit: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub ops: usize,
    /// Vertex pairs compared against the oracle, summed over all steps.
    pub pairs_checked: u64,
    pub mismatched_pairs: u64,
    pub audit_failures: usize,
    /// First few problems, for display.
    pub errors: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatched_pairs == 0 && self.audit_failures == 0 && self.errors.is_empty()
    }

    fn note(&mut self, msg: String) {
        if self.errors.len() < 5 {
            self.errors.push(msg);
        }
    }
}

/// Pairs on which the structure's component ids disagree with the oracle.
/// Comparing the two partitions covers every pair at once.
pub fn count_mismatches(s: &mut dyn ConnectivityStructure, oracle: &OracleGraph) -> u64 {
    let labels = oracle.labels();
    let ids: Vec<Option<usize>> = (0..labels.len()).map(|v| s.component_id(v)).collect();
    // joint class sizes against each side's class sizes
    let mut joint: HashMap<(usize, Option<usize>), u64> = HashMap::new();
    let mut by_oracle: HashMap<usize, u64> = HashMap::new();
    let mut by_ids: HashMap<usize, u64> = HashMap::new();
    for (v, &l) in labels.iter().enumerate() {
        *joint.entry((l, ids[v])).or_default() += 1;
        *by_oracle.entry(l).or_default() += 1;
        if let Some(c) = ids[v] {
            *by_ids.entry(c).or_default() += 1;
        }
    }
    let pairs = |c: u64| c * c.saturating_sub(1) / 2;
    let both: u64 = joint
        .iter()
        .filter(|((_, c), _)| c.is_some())
        .map(|(_, &k)| pairs(k))
        .sum();
    let oracle_pairs: u64 = by_oracle.values().map(|&k| pairs(k)).sum();
    let id_pairs: u64 = by_ids.values().map(|&k| pairs(k)).sum();
    (oracle_pairs - both) + (id_pairs - both)
}

pub fn verify_structure(kind: StructureKind, opts: &VerifyOptions) -> VerifyReport {
    verify_with(kind, opts, |_| Ok(()))
}

/// Like [`verify_structure`], calling `extra` after every operation.
pub fn verify_with(
    kind: StructureKind,
    opts: &VerifyOptions,
    mut extra: impl FnMut(&mut dyn ConnectivityStructure) -> Result<(), String>,
) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let base = match gen_graph(&DatasetSpec::Gnm(opts.n, opts.m), opts.seed) {
        Ok(d) => d.edges,
        Err(e) => {
            rep.note(e.to_string());
            return rep;
        }
    };
    let ops = match generate_churn(&base, opts.u_r, opts.ops, opts.seed) {
        Ok(o) => o,
        Err(e) => {
            rep.note(e.to_string());
            return rep;
        }
    };
    let mut s = build(
        kind,
        &BuildOptions {
            seed: opts.seed,
            beta: opts.beta,
            vertices: opts.n,
        },
    );
    let mut oracle = OracleGraph::new(opts.n);
    let all_pairs = (opts.n * opts.n.saturating_sub(1) / 2) as u64;
    for (step, op) in ops.iter().enumerate() {
        match *op {
            Operation::Insert(k) => {
                if let Err(e) = s.insert_edge(k.a(), k.b()) {
                    rep.note(format!("step {step}: insert {k}: {e}"));
                }
                oracle.insert(k);
            }
            Operation::Delete(k) => {
                s.delete_edge(k.a(), k.b());
                oracle.remove(k);
            }
            Operation::QueryBatch { .. } => continue,
        }
        rep.ops += 1;
        rep.pairs_checked += all_pairs;
        let bad = count_mismatches(s.as_mut(), &oracle);
        if bad > 0 {
            rep.note(format!("step {step}: {bad} pairs disagree with the oracle"));
        }
        rep.mismatched_pairs += bad;
        let checks = if opts.audit { s.audit() } else { Ok(()) }.and_then(|_| extra(s.as_mut()));
        if let Err(e) = checks {
            rep.audit_failures += 1;
            rep.note(format!("step {step}: {e}"));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_structure_small() {
        let opts = VerifyOptions {
            n: 20,
            m: 40,
            ops: 300,
            u_r: 3,
            seed: 4,
            ..Default::default()
        };
        for k in StructureKind::ALL {
            let r = verify_structure(k, &opts);
            assert!(r.passed(), "{k}: {:?}", r.errors);
            assert_eq!(r.ops, 300);
        }
    }

    #[test]
    fn mismatch_counting() {
        let mut s = build(
            StructureKind::DTree,
            &BuildOptions {
                vertices: 4,
                ..Default::default()
            },
        );
        let mut o = OracleGraph::new(4);
        s.insert_edge(0, 1).unwrap();
        assert_eq!(count_mismatches(s.as_mut(), &o), 1);
        o.insert(crate::graph::EdgeKey::new(0, 1).unwrap());
        assert_eq!(count_mismatches(s.as_mut(), &o), 0);
        o.insert(crate::graph::EdgeKey::new(2, 3).unwrap());
        assert_eq!(count_mismatches(s.as_mut(), &o), 1);
    }
}
