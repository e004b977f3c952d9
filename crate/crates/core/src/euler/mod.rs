//! Euler-tour tree structures: HKS (one level), HDT and HK (leveled).

mod forest;
mod leveled;
mod rst;
mod treap;

use std::collections::BTreeSet;

use crate::connectivity::{ConnectivityStructure, UpdateOutcome};
use crate::graph::{AdjacencyMode, EdgeKey, EdgeKind, GraphError, GraphModel, VertexId};
use crate::memory::MemoryModel;

pub(crate) use forest::EulerForest;
pub use leveled::{Hdt, Hk, SampleError};

/// Bytes for one level's tours, active-node map and traversal map.
pub(crate) fn level_bytes(f: &EulerForest, m: &MemoryModel) -> u64 {
    // occurrence: left, right, parent; vertex, priority, active, size/weight
    f.treap.live() as u64 * m.node(3, 4, 0)
        + m.map(f.present_vertices())
        + m.map(f.edges.len())
        + f.edges.len() as u64 * 4 * m.bytes_per_link
}

pub(crate) fn tree_keys(graph: &GraphModel, min_level: usize) -> Vec<EdgeKey> {
    graph
        .edges()
        .filter(|r| r.kind == EdgeKind::Tree && r.level >= min_level)
        .map(|r| r.key)
        .collect()
}

/// Single-level Euler-tour forest with plain non-tree neighbour sets.
#[derive(Clone, Debug)]
pub struct Hks {
    forest: EulerForest,
    nte: Vec<BTreeSet<VertexId>>,
    graph: GraphModel,
}

impl Hks {
    pub fn new(seed: u64) -> Self {
        Hks {
            forest: EulerForest::new(seed),
            nte: Vec::new(),
            graph: GraphModel::new(AdjacencyMode::Off),
        }
    }

    fn grow(&mut self, v: VertexId) {
        if v >= self.nte.len() {
            for x in self.nte.len()..=v {
                self.forest.ensure(x);
            }
            self.nte.resize_with(v + 1, BTreeSet::new);
            self.graph.ensure_vertex(v);
        }
    }

    fn add_nte(&mut self, x: VertexId, y: VertexId) {
        self.nte[x].insert(y);
        self.forest.set_weight(x, self.nte[x].len());
    }

    fn remove_nte(&mut self, x: VertexId, y: VertexId) {
        self.nte[x].remove(&y);
        self.forest.set_weight(x, self.nte[x].len());
    }

    /// Tour of the tree holding `v`, as a vertex sequence.
    pub fn tour(&self, v: VertexId) -> Option<Vec<VertexId>> {
        self.forest.has(v).then(|| self.forest.tour_sequence(v))
    }

    fn delete_tree_edge(&mut self, key: EdgeKey) -> UpdateOutcome {
        self.forest.cut(key);
        let (u, v) = (key.a(), key.b());
        let small = if self.forest.tree_size(u) <= self.forest.tree_size(v) {
            u
        } else {
            v
        };
        let side = self.forest.tour(small);
        let mut found = None;
        'scan: for occ in self.forest.treap.collect_active(side, true) {
            let x = self.forest.treap.nodes[occ].vertex;
            for &y in &self.nte[x] {
                if self.forest.tour(y) != side {
                    found = Some((x, y));
                    break 'scan;
                }
            }
        }
        let Some((x, y)) = found else {
            return UpdateOutcome::SplitPermanent;
        };
        let rep = EdgeKey::new(x, y).expect("distinct endpoints");
        self.remove_nte(x, y);
        self.remove_nte(y, x);
        self.graph
            .set_kind(rep, EdgeKind::Tree)
            .expect("edge recorded");
        self.forest.link(rep, x, y);
        UpdateOutcome::SplitReconnected(rep)
    }
}

impl ConnectivityStructure for Hks {
    fn name(&self) -> &'static str {
        "HKS"
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError> {
        let key = EdgeKey::new(u, v)?;
        self.grow(key.b());
        if self.graph.contains(key) {
            return Ok(UpdateOutcome::DuplicateIgnored);
        }
        if self.forest.connected(u, v) {
            self.graph.record_edge(key, 0, EdgeKind::NonTree)?;
            self.add_nte(u, v);
            self.add_nte(v, u);
            Ok(UpdateOutcome::NewNonTreeEdge)
        } else {
            self.graph.record_edge(key, 0, EdgeKind::Tree)?;
            self.forest.link(key, u, v);
            Ok(UpdateOutcome::NewTreeEdge)
        }
    }

    fn delete_edge(&mut self, u: VertexId, v: VertexId) -> UpdateOutcome {
        let Ok(key) = EdgeKey::new(u, v) else {
            return UpdateOutcome::MissingIgnored;
        };
        let Ok(rec) = self.graph.remove_edge(key) else {
            return UpdateOutcome::MissingIgnored;
        };
        match rec.kind {
            EdgeKind::NonTree => {
                self.remove_nte(u, v);
                self.remove_nte(v, u);
                UpdateOutcome::NonTreeRemoved
            }
            EdgeKind::Tree => self.delete_tree_edge(key),
        }
    }

    fn component_id(&mut self, u: VertexId) -> Option<usize> {
        self.forest.has(u).then(|| self.forest.tour(u))
    }

    fn ensure_vertex(&mut self, v: VertexId) {
        self.grow(v);
    }

    fn graph(&self) -> &GraphModel {
        &self.graph
    }

    fn node_count(&self) -> usize {
        self.forest.treap.live()
    }

    fn max_height(&mut self) -> usize {
        self.forest.max_treap_height()
    }

    fn memory_bytes(&self, m: &MemoryModel) -> u64 {
        let nontree = self.graph.edge_count() - self.graph.tree_edge_count();
        let nte: u64 = self
            .nte
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| m.set(s.len()))
            .sum();
        level_bytes(&self.forest, m) + nte + m.set(self.graph.tree_edge_count()) + m.set(nontree)
    }

    fn shape_audit(&mut self) -> Result<(), String> {
        self.forest.audit(&tree_keys(&self.graph, 0))
    }

    fn audit(&mut self) -> Result<(), String> {
        self.forest.audit(&tree_keys(&self.graph, 0))?;
        if self.forest.present_vertices() != self.nte.len() {
            return Err("a vertex has no tour".into());
        }
        if self.graph.max_level() > 0 {
            return Err("HKS edge above level 0".into());
        }
        let mut total = 0;
        for (x, set) in self.nte.iter().enumerate() {
            if self.forest.own_weight(x) != set.len() {
                return Err(format!("weight of {x} differs from its nte count"));
            }
            for &y in set {
                let k = EdgeKey::new(x, y).map_err(|e| e.to_string())?;
                if self.graph.record(k).map(|r| r.kind) != Some(EdgeKind::NonTree) {
                    return Err(format!("nte entry {k} is not a non-tree edge"));
                }
                if !self.forest.connected(x, y) {
                    return Err(format!("non-tree edge {k} spans two trees"));
                }
            }
            total += set.len();
        }
        if total != 2 * (self.graph.edge_count() - self.graph.tree_edge_count()) {
            return Err("nte sets do not cover the non-tree edges".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tree of the deletion figure plus its non-tree edges.
    fn figure() -> Hks {
        let mut h = Hks::new(5);
        for (u, v) in [
            (2, 3),
            (2, 5),
            (1, 5),
            (8, 5),
            (3, 4),
            (3, 6),
            (6, 7),
            (7, 8),
            (1, 2),
            (1, 3),
        ] {
            h.insert_edge(u, v).unwrap();
        }
        h.audit().unwrap();
        h
    }

    #[test]
    fn replacement_found() {
        let mut h = figure();
        assert_eq!(h.classify_edge(3, 6), crate::graph::EdgeClass::Tree(0));
        // both (1,3) and (7,8) reconnect {3,4,6,7}
        let out = h.delete_edge(2, 3);
        assert!(matches!(out, UpdateOutcome::SplitReconnected(_)));
        assert!(h.connected(4, 1));
        h.audit().unwrap();
    }

    #[test]
    fn path_split_is_permanent() {
        let mut h = Hks::new(1);
        for i in 0..9 {
            h.insert_edge(i, i + 1).unwrap();
        }
        assert_eq!(h.delete_edge(4, 5), UpdateOutcome::SplitPermanent);
        assert!(!h.connected(0, 9));
        assert_eq!(h.tour(0).unwrap().len(), 9);
        h.audit().unwrap();
    }
}
