//! Slow, literal replay of the level push-down deletion on explicit edge
//! lists. Used to check that the fast leveled structures assign the same
//! levels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::connectivity::UpdateOutcome;
use crate::graph::{EdgeKey, EdgeKind, GraphError, VertexId};

#[derive(Clone, Debug, Default)]
pub struct ReferenceForest {
    edges: BTreeMap<EdgeKey, (usize, EdgeKind)>,
}

impl ReferenceForest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn classify(&self, key: EdgeKey) -> Option<(usize, EdgeKind)> {
        self.edges.get(&key).copied()
    }

    /// Vertices reachable from `s` over tree edges of level >= `min_level`.
    fn reach(&self, s: VertexId, min_level: usize) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::from([s]);
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for (k, &(l, kind)) in &self.edges {
                if kind != EdgeKind::Tree || l < min_level || (k.a() != x && k.b() != x) {
                    continue;
                }
                let y = k.other(x);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError> {
        let key = EdgeKey::new(u, v)?;
        if self.edges.contains_key(&key) {
            return Ok(UpdateOutcome::DuplicateIgnored);
        }
        if self.reach(u, 0).contains(&v) {
            self.edges.insert(key, (0, EdgeKind::NonTree));
            Ok(UpdateOutcome::NewNonTreeEdge)
        } else {
            self.edges.insert(key, (0, EdgeKind::Tree));
            Ok(UpdateOutcome::NewTreeEdge)
        }
    }

    pub fn delete(&mut self, u: VertexId, v: VertexId) -> UpdateOutcome {
        let Ok(key) = EdgeKey::new(u, v) else {
            return UpdateOutcome::MissingIgnored;
        };
        let Some((top, kind)) = self.edges.remove(&key) else {
            return UpdateOutcome::MissingIgnored;
        };
        if kind == EdgeKind::NonTree {
            return UpdateOutcome::NonTreeRemoved;
        }
        let (u, v) = (key.a(), key.b());
        for i in (0..=top).rev() {
            let su = self.reach(u, i);
            let sv = self.reach(v, i);
            let side = if su.len() <= sv.len() { su } else { sv };
            let level_i: Vec<EdgeKey> = self
                .edges
                .iter()
                .filter(|(k, &(l, kd))| {
                    kd == EdgeKind::Tree && l == i && side.contains(&k.a()) && side.contains(&k.b())
                })
                .map(|(k, _)| *k)
                .collect();
            for k in level_i {
                self.edges.insert(k, (i + 1, EdgeKind::Tree));
            }
            for &x in &side {
                let cand: Vec<VertexId> = self
                    .edges
                    .iter()
                    .filter(|(k, &(l, kd))| {
                        kd == EdgeKind::NonTree && l == i && (k.a() == x || k.b() == x)
                    })
                    .map(|(k, _)| k.other(x))
                    .collect();
                for y in cand {
                    let k = EdgeKey::new(x, y).expect("distinct endpoints");
                    if side.contains(&y) {
                        self.edges.insert(k, (i + 1, EdgeKind::NonTree));
                    } else {
                        self.edges.insert(k, (i, EdgeKind::Tree));
                        return UpdateOutcome::SplitReconnected(k);
                    }
                }
            }
        }
        UpdateOutcome::SplitPermanent
    }

    /// Edge counts per level, trailing zeros trimmed.
    pub fn level_histogram(&self) -> Vec<usize> {
        let mut h = Vec::new();
        for &(l, _) in self.edges.values() {
            if h.len() <= l {
                h.resize(l + 1, 0);
            }
            h[l] += 1;
        }
        h
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, usize, EdgeKind)> + '_ {
        self.edges.iter().map(|(&k, &(l, kd))| (k, l, kd))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smaller_side_pushed() {
        let mut r = ReferenceForest::new();
        for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            r.insert(u, v).unwrap();
        }
        assert_eq!(
            r.delete(2, 3),
            UpdateOutcome::SplitReconnected(EdgeKey::new(0, 3).unwrap())
        );
        // side {3} has no tree edges; (0,3) is found at level 0
        assert_eq!(r.level_histogram(), vec![3]);
        assert_eq!(r.delete(0, 1), UpdateOutcome::SplitPermanent);
        // tie: {0,3} holds the smaller endpoint, its edge (0,3) goes up
        assert_eq!(
            r.classify(EdgeKey::new(0, 3).unwrap()),
            Some((1, EdgeKind::Tree))
        );
    }
}
