//! Edge identity, edge levels and the per-vertex leveled adjacency.

use std::collections::{btree_map, btree_set, BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Dense vertex index.
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge {0} is already present")]
    DuplicateEdge(EdgeKey),
    #[error("edge {0} is not present")]
    MissingEdge(EdgeKey),
    #[error("edge {key} sits at level {current} and cannot move to level {requested}")]
    LevelSkip {
        key: EdgeKey,
        current: usize,
        requested: usize,
    },
}

/// Unordered vertex pair stored as `(min, max)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct EdgeKey {
    a: VertexId,
    b: VertexId,
}

impl EdgeKey {
    pub fn new(u: VertexId, v: VertexId) -> Result<Self, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(EdgeKey {
            a: u.min(v),
            b: u.max(v),
        })
    }

    #[inline]
    pub fn a(&self) -> VertexId {
        self.a
    }

    #[inline]
    pub fn b(&self) -> VertexId {
        self.b
    }

    /// The endpoint that is not `x`.
    #[inline]
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Same as [`EdgeKey::new`].
pub fn normalize_edge(u: VertexId, v: VertexId) -> Result<EdgeKey, GraphError> {
    EdgeKey::new(u, v)
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum EdgeKind {
    Tree,
    NonTree,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeClass {
    Tree(usize),
    NonTree(usize),
    Absent,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EdgeRecord {
    pub key: EdgeKey,
    pub level: usize,
    pub kind: EdgeKind,
}

/// How the per-level neighbour sets are laid out.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AdjacencyMode {
    /// Only edge records, no per-vertex sets.
    Off,
    /// Separate tree and non-tree sets per level.
    Split,
    /// One map per level from neighbour to edge kind.
    Merged,
}

#[derive(Clone, Default, Debug)]
struct SplitSlot {
    t: BTreeSet<VertexId>,
    nt: BTreeSet<VertexId>,
}

#[derive(Clone, Default, Debug)]
struct MergedSlot {
    adj: BTreeMap<VertexId, EdgeKind>,
    t: usize,
    nt: usize,
}

/// Ascending neighbour iterator over one (vertex, level) slot.
pub enum Neighbors<'a> {
    Empty,
    Set(btree_set::Iter<'a, VertexId>),
    Filtered(btree_map::Iter<'a, VertexId, EdgeKind>, EdgeKind),
}

impl Iterator for Neighbors<'_> {
    type Item = VertexId;

    fn next(&mut self) -> Option<VertexId> {
        match self {
            Neighbors::Empty => None,
            Neighbors::Set(it) => it.next().copied(),
            Neighbors::Filtered(it, kind) => {
                for (&v, &k) in it.by_ref() {
                    if k == *kind {
                        return Some(v);
                    }
                }
                None
            }
        }
    }
}

/// Per-vertex, per-level neighbour sets. Iteration is always ascending.
#[derive(Clone, Debug)]
pub struct LeveledAdjacency {
    mode: AdjacencyMode,
    split: Vec<Vec<SplitSlot>>,
    merged: Vec<Vec<MergedSlot>>,
    /// Number of entries visited through the iterators, for instrumentation.
    visits: std::cell::Cell<u64>,
}

impl LeveledAdjacency {
    pub fn new(mode: AdjacencyMode) -> Self {
        LeveledAdjacency {
            mode,
            split: Vec::new(),
            merged: Vec::new(),
            visits: std::cell::Cell::new(0),
        }
    }

    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn ensure_vertex(&mut self, v: VertexId) {
        match self.mode {
            AdjacencyMode::Off => {}
            AdjacencyMode::Split => {
                if self.split.len() <= v {
                    self.split.resize_with(v + 1, Vec::new);
                }
            }
            AdjacencyMode::Merged => {
                if self.merged.len() <= v {
                    self.merged.resize_with(v + 1, Vec::new);
                }
            }
        }
    }

    fn add_half(&mut self, u: VertexId, v: VertexId, level: usize, kind: EdgeKind) {
        match self.mode {
            AdjacencyMode::Off => {}
            AdjacencyMode::Split => {
                let slots = &mut self.split[u];
                if slots.len() <= level {
                    slots.resize_with(level + 1, SplitSlot::default);
                }
                match kind {
                    EdgeKind::Tree => slots[level].t.insert(v),
                    EdgeKind::NonTree => slots[level].nt.insert(v),
                };
            }
            AdjacencyMode::Merged => {
                let slots = &mut self.merged[u];
                if slots.len() <= level {
                    slots.resize_with(level + 1, MergedSlot::default);
                }
                let slot = &mut slots[level];
                slot.adj.insert(v, kind);
                match kind {
                    EdgeKind::Tree => slot.t += 1,
                    EdgeKind::NonTree => slot.nt += 1,
                }
            }
        }
    }

    fn remove_half(&mut self, u: VertexId, v: VertexId, level: usize, kind: EdgeKind) {
        match self.mode {
            AdjacencyMode::Off => {}
            AdjacencyMode::Split => {
                let slots = &mut self.split[u];
                match kind {
                    EdgeKind::Tree => slots[level].t.remove(&v),
                    EdgeKind::NonTree => slots[level].nt.remove(&v),
                };
                while slots
                    .last()
                    .is_some_and(|s| s.t.is_empty() && s.nt.is_empty())
                {
                    slots.pop();
                }
            }
            AdjacencyMode::Merged => {
                let slots = &mut self.merged[u];
                let slot = &mut slots[level];
                slot.adj.remove(&v);
                match kind {
                    EdgeKind::Tree => slot.t -= 1,
                    EdgeKind::NonTree => slot.nt -= 1,
                }
                while slots.last().is_some_and(|s| s.adj.is_empty()) {
                    slots.pop();
                }
            }
        }
    }

    pub fn add(&mut self, key: EdgeKey, level: usize, kind: EdgeKind) {
        self.add_half(key.a(), key.b(), level, kind);
        self.add_half(key.b(), key.a(), level, kind);
    }

    pub fn remove(&mut self, key: EdgeKey, level: usize, kind: EdgeKind) {
        self.remove_half(key.a(), key.b(), level, kind);
        self.remove_half(key.b(), key.a(), level, kind);
    }

    /// Number of level slots held by `u`; levels at or above this are empty.
    pub fn level_count(&self, u: VertexId) -> usize {
        match self.mode {
            AdjacencyMode::Off => 0,
            AdjacencyMode::Split => self.split.get(u).map_or(0, Vec::len),
            AdjacencyMode::Merged => self.merged.get(u).map_or(0, Vec::len),
        }
    }

    pub fn neighbors(&self, u: VertexId, level: usize, kind: EdgeKind) -> Neighbors<'_> {
        match self.mode {
            AdjacencyMode::Off => Neighbors::Empty,
            AdjacencyMode::Split => match self.split.get(u).and_then(|s| s.get(level)) {
                None => Neighbors::Empty,
                Some(slot) => match kind {
                    EdgeKind::Tree => Neighbors::Set(slot.t.iter()),
                    EdgeKind::NonTree => Neighbors::Set(slot.nt.iter()),
                },
            },
            AdjacencyMode::Merged => match self.merged.get(u).and_then(|s| s.get(level)) {
                None => Neighbors::Empty,
                Some(slot) => Neighbors::Filtered(slot.adj.iter(), kind),
            },
        }
    }

    /// Neighbours of `u` at `level` of the given kind, ascending, counting
    /// every stored entry examined.
    pub fn collect_neighbors(&self, u: VertexId, level: usize, kind: EdgeKind) -> Vec<VertexId> {
        let examined = match self.mode {
            AdjacencyMode::Off => 0,
            AdjacencyMode::Split => self.count(u, level, kind),
            AdjacencyMode::Merged => self
                .merged
                .get(u)
                .and_then(|s| s.get(level))
                .map_or(0, |s| s.adj.len()),
        };
        self.visits.set(self.visits.get() + examined as u64);
        self.neighbors(u, level, kind).collect()
    }

    pub fn count(&self, u: VertexId, level: usize, kind: EdgeKind) -> usize {
        match self.mode {
            AdjacencyMode::Off => 0,
            AdjacencyMode::Split => {
                self.split
                    .get(u)
                    .and_then(|s| s.get(level))
                    .map_or(0, |s| match kind {
                        EdgeKind::Tree => s.t.len(),
                        EdgeKind::NonTree => s.nt.len(),
                    })
            }
            AdjacencyMode::Merged => self
                .merged
                .get(u)
                .and_then(|s| s.get(level))
                .map_or(0, |s| match kind {
                    EdgeKind::Tree => s.t,
                    EdgeKind::NonTree => s.nt,
                }),
        }
    }

    /// Total number of edges of any kind at `(u, level)`.
    pub fn count_any(&self, u: VertexId, level: usize) -> usize {
        self.count(u, level, EdgeKind::Tree) + self.count(u, level, EdgeKind::NonTree)
    }

    pub fn contains(&self, u: VertexId, v: VertexId, level: usize, kind: EdgeKind) -> bool {
        match self.mode {
            AdjacencyMode::Off => false,
            AdjacencyMode::Split => self
                .split
                .get(u)
                .and_then(|s| s.get(level))
                .is_some_and(|s| match kind {
                    EdgeKind::Tree => s.t.contains(&v),
                    EdgeKind::NonTree => s.nt.contains(&v),
                }),
            AdjacencyMode::Merged => self
                .merged
                .get(u)
                .and_then(|s| s.get(level))
                .is_some_and(|s| s.adj.get(&v) == Some(&kind)),
        }
    }

    pub fn visits(&self) -> u64 {
        self.visits.get()
    }

    /// Visit every non-empty `(vertex, level)` slot; the callback receives the
    /// number of tree and non-tree entries.
    pub fn for_each_slot(&self, mut f: impl FnMut(VertexId, usize, usize, usize)) {
        match self.mode {
            AdjacencyMode::Off => {}
            AdjacencyMode::Split => {
                for (u, slots) in self.split.iter().enumerate() {
                    for (i, s) in slots.iter().enumerate() {
                        if !s.t.is_empty() || !s.nt.is_empty() {
                            f(u, i, s.t.len(), s.nt.len());
                        }
                    }
                }
            }
            AdjacencyMode::Merged => {
                for (u, slots) in self.merged.iter().enumerate() {
                    for (i, s) in slots.iter().enumerate() {
                        if !s.adj.is_empty() {
                            f(u, i, s.t, s.nt);
                        }
                    }
                }
            }
        }
    }
}

/// The authoritative edge set of the evolving simple graph.
#[derive(Clone, Debug)]
pub struct GraphModel {
    records: HashMap<EdgeKey, (usize, EdgeKind)>,
    adj: LeveledAdjacency,
    n: usize,
    histogram: Vec<usize>,
    tree_edges: usize,
    clamped: u64,
}

impl GraphModel {
    pub fn new(mode: AdjacencyMode) -> Self {
        GraphModel {
            records: HashMap::new(),
            adj: LeveledAdjacency::new(mode),
            n: 0,
            histogram: Vec::new(),
            tree_edges: 0,
            clamped: 0,
        }
    }

    pub fn ensure_vertex(&mut self, v: VertexId) {
        if v >= self.n {
            self.n = v + 1;
            self.adj.ensure_vertex(v);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.records.len()
    }

    pub fn tree_edge_count(&self) -> usize {
        self.tree_edges
    }

    pub fn adjacency(&self) -> &LeveledAdjacency {
        &self.adj
    }

    /// Highest level an edge may reach: `floor(log2 n) + 1`, never above 63.
    pub fn level_cap(&self) -> usize {
        (self.n.max(1).ilog2() as usize + 1).min(63)
    }

    pub fn clamped_promotions(&self) -> u64 {
        self.clamped
    }

    pub fn record(&self, key: EdgeKey) -> Option<EdgeRecord> {
        self.records
            .get(&key)
            .map(|&(level, kind)| EdgeRecord { key, level, kind })
    }

    pub fn contains(&self, key: EdgeKey) -> bool {
        self.records.contains_key(&key)
    }

    pub fn classify(&self, key: EdgeKey) -> EdgeClass {
        match self.records.get(&key) {
            None => EdgeClass::Absent,
            Some(&(l, EdgeKind::Tree)) => EdgeClass::Tree(l),
            Some(&(l, EdgeKind::NonTree)) => EdgeClass::NonTree(l),
        }
    }

    fn bump(&mut self, level: usize, delta: isize) {
        if self.histogram.len() <= level {
            self.histogram.resize(level + 1, 0);
        }
        self.histogram[level] = (self.histogram[level] as isize + delta) as usize;
        while self.histogram.last() == Some(&0) {
            self.histogram.pop();
        }
    }

    pub fn record_edge(
        &mut self,
        key: EdgeKey,
        level: usize,
        kind: EdgeKind,
    ) -> Result<(), GraphError> {
        if self.records.contains_key(&key) {
            return Err(GraphError::DuplicateEdge(key));
        }
        self.ensure_vertex(key.b());
        self.records.insert(key, (level, kind));
        self.adj.add(key, level, kind);
        self.bump(level, 1);
        if kind == EdgeKind::Tree {
            self.tree_edges += 1;
        }
        Ok(())
    }

    pub fn remove_edge(&mut self, key: EdgeKey) -> Result<EdgeRecord, GraphError> {
        let (level, kind) = self
            .records
            .remove(&key)
            .ok_or(GraphError::MissingEdge(key))?;
        self.adj.remove(key, level, kind);
        self.bump(level, -1);
        if kind == EdgeKind::Tree {
            self.tree_edges -= 1;
        }
        Ok(EdgeRecord { key, level, kind })
    }

    /// Move an edge up exactly one level. Returns `false` when the move was
    /// clamped by [`level_cap`](Self::level_cap).
    pub fn promote_edge(&mut self, key: EdgeKey, to_level: usize) -> Result<bool, GraphError> {
        let (level, kind) = *self.records.get(&key).ok_or(GraphError::MissingEdge(key))?;
        if to_level != level + 1 {
            return Err(GraphError::LevelSkip {
                key,
                current: level,
                requested: to_level,
            });
        }
        if to_level > self.level_cap() {
            self.clamped += 1;
            return Ok(false);
        }
        self.adj.remove(key, level, kind);
        self.adj.add(key, to_level, kind);
        self.records.insert(key, (to_level, kind));
        self.bump(level, -1);
        self.bump(to_level, 1);
        Ok(true)
    }

    /// Change the kind of an edge in place, keeping its level.
    pub fn set_kind(&mut self, key: EdgeKey, kind: EdgeKind) -> Result<(), GraphError> {
        let (level, old) = *self.records.get(&key).ok_or(GraphError::MissingEdge(key))?;
        if old == kind {
            return Ok(());
        }
        self.adj.remove(key, level, old);
        self.adj.add(key, level, kind);
        self.records.insert(key, (level, kind));
        match kind {
            EdgeKind::Tree => self.tree_edges += 1,
            EdgeKind::NonTree => self.tree_edges -= 1,
        }
        Ok(())
    }

    /// Edge counts per level, index = level.
    pub fn level_histogram(&self) -> Vec<usize> {
        self.histogram.clone()
    }

    pub fn max_level(&self) -> usize {
        self.histogram.len().saturating_sub(1)
    }

    /// `1 + max level over incident edges`, or `None` for an isolated vertex.
    pub fn node_level(&self, u: VertexId) -> Option<usize> {
        let slots = self.adj.level_count(u);
        if slots == 0 {
            None
        } else {
            Some(slots)
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeRecord> + '_ {
        self.records
            .iter()
            .map(|(&key, &(level, kind))| EdgeRecord { key, level, kind })
    }

    pub fn sorted_edges(&self) -> Vec<EdgeRecord> {
        let mut v: Vec<EdgeRecord> = self.edges().collect();
        v.sort_by_key(|r| r.key);
        v
    }

    pub fn tree_neighbors(&self, u: VertexId, level: usize) -> Neighbors<'_> {
        self.adj.neighbors(u, level, EdgeKind::Tree)
    }

    pub fn nontree_neighbors(&self, u: VertexId, level: usize) -> Neighbors<'_> {
        self.adj.neighbors(u, level, EdgeKind::NonTree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(u: usize, v: usize) -> EdgeKey {
        EdgeKey::new(u, v).unwrap()
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_edge(3, 1).unwrap(), key(1, 3));
        assert_eq!(normalize_edge(1, 3).unwrap(), key(1, 3));
        assert_eq!(normalize_edge(7, 7), Err(GraphError::SelfLoop(7)));
    }

    #[test]
    fn record_and_classify() {
        let mut g = GraphModel::new(AdjacencyMode::Split);
        g.record_edge(key(1, 3), 0, EdgeKind::NonTree).unwrap();
        g.record_edge(key(3, 6), 0, EdgeKind::NonTree).unwrap();
        g.record_edge(key(3, 4), 1, EdgeKind::Tree).unwrap();
        let nt: Vec<_> = g.nontree_neighbors(3, 0).collect();
        assert_eq!(nt, vec![1, 6]);
        let t: Vec<_> = g.tree_neighbors(3, 1).collect();
        assert_eq!(t, vec![4]);
        assert!(g.adjacency().contains(1, 3, 0, EdgeKind::NonTree));
        assert_eq!(
            g.record_edge(key(1, 3), 0, EdgeKind::NonTree),
            Err(GraphError::DuplicateEdge(key(1, 3)))
        );
        assert_eq!(g.classify(key(3, 4)), EdgeClass::Tree(1));
        assert_eq!(g.classify(key(1, 3)), EdgeClass::NonTree(0));
        assert_eq!(g.classify(key(4, 8)), EdgeClass::Absent);
        assert_eq!(g.node_level(3), Some(2));
    }

    #[test]
    fn promote_rules() {
        let mut g = GraphModel::new(AdjacencyMode::Merged);
        for v in 0..8 {
            g.ensure_vertex(v);
        }
        g.record_edge(key(2, 5), 0, EdgeKind::Tree).unwrap();
        assert!(g.promote_edge(key(2, 5), 1).unwrap());
        assert_eq!(g.classify(key(2, 5)), EdgeClass::Tree(1));
        assert!(matches!(
            g.promote_edge(key(2, 5), 3),
            Err(GraphError::LevelSkip { .. })
        ));
        assert_eq!(
            g.promote_edge(key(1, 2), 1),
            Err(GraphError::MissingEdge(key(1, 2)))
        );
        assert_eq!(g.level_histogram(), vec![0, 1]);
        assert_eq!(g.adjacency().count(2, 1, EdgeKind::Tree), 1);
        assert_eq!(g.adjacency().count(2, 0, EdgeKind::Tree), 0);
    }

    #[test]
    fn clamp_counts() {
        let mut g = GraphModel::new(AdjacencyMode::Split);
        g.record_edge(key(0, 1), 0, EdgeKind::Tree).unwrap();
        // n = 2, cap = 2
        assert!(g.promote_edge(key(0, 1), 1).unwrap());
        assert!(g.promote_edge(key(0, 1), 2).unwrap());
        assert!(!g.promote_edge(key(0, 1), 3).unwrap());
        assert_eq!(g.clamped_promotions(), 1);
        assert_eq!(g.classify(key(0, 1)), EdgeClass::Tree(2));
    }
}
