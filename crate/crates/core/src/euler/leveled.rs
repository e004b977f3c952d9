//! Leveled Euler-tour structures. Level i holds the forest of tree edges with
//! level at least i. HDT creates levels on demand and finds replacements by
//! exhaustive search; HK keeps every level for every vertex and samples
//! non-tree edges by weight before searching.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::connectivity::{ConnectivityStructure, UpdateOutcome};
use crate::graph::{AdjacencyMode, EdgeKey, EdgeKind, GraphError, GraphModel, VertexId};
use crate::memory::MemoryModel;
use crate::util::{floor_log2, Marks};

use super::rst::RstPool;
use super::treap::NIL;
use super::{level_bytes, tree_keys, EulerForest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("tour carries no non-tree edges")]
    EmptyWeight,
    #[error("unknown vertex {0} or level {1}")]
    Unknown(VertexId, usize),
}

#[derive(Clone, Debug)]
struct Sampler {
    pool: RstPool,
    /// `roots[level][vertex]`
    roots: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
}

#[derive(Clone, Debug)]
struct LeveledEt {
    graph: GraphModel,
    levels: Vec<EulerForest>,
    seed: u64,
    sampler: Option<Sampler>,
    marks: Marks,
    n: usize,
}

fn ceil_log2(n: usize) -> usize {
    (n.max(2).next_power_of_two().trailing_zeros() as usize).max(1)
}

impl LeveledEt {
    fn new(seed: u64, sampling: bool) -> Self {
        let sampler = sampling.then(|| Sampler {
            pool: RstPool::new(seed ^ 0x5157_4e41),
            roots: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9)),
        });
        let mut s = LeveledEt {
            graph: GraphModel::new(AdjacencyMode::Split),
            levels: Vec::new(),
            seed,
            sampler,
            marks: Marks::default(),
            n: 0,
        };
        s.ensure_level(0);
        s
    }

    fn eager(&self) -> bool {
        self.sampler.is_some()
    }

    fn ensure_level(&mut self, i: usize) {
        while self.levels.len() <= i {
            let l = self.levels.len() as u64;
            let mut f = EulerForest::new(self.seed.wrapping_mul(31).wrapping_add(l));
            if self.eager() || l == 0 {
                for x in 0..self.n {
                    f.ensure(x);
                }
            }
            self.levels.push(f);
            if let Some(s) = &mut self.sampler {
                s.roots.push(vec![NIL; self.n]);
            }
        }
    }

    fn grow(&mut self, v: VertexId) {
        if v < self.n {
            return;
        }
        self.n = v + 1;
        self.graph.ensure_vertex(v);
        if self.eager() {
            self.ensure_level(floor_log2(self.n));
        }
        let all = if self.eager() { self.levels.len() } else { 1 };
        for f in &mut self.levels[..all] {
            for x in 0..self.n {
                f.ensure(x);
            }
        }
        let n = self.n;
        if let Some(s) = &mut self.sampler {
            for r in &mut s.roots {
                r.resize(n, NIL);
            }
        }
    }

    fn add_half(&mut self, i: usize, x: VertexId, y: VertexId) {
        if let Some(s) = &mut self.sampler {
            s.pool.insert(&mut s.roots[i][x], y);
            let w = s.pool.len(s.roots[i][x]);
            self.levels[i].set_weight(x, w);
        }
    }

    fn remove_half(&mut self, i: usize, x: VertexId, y: VertexId) {
        if let Some(s) = &mut self.sampler {
            s.pool.remove(&mut s.roots[i][x], y);
            let w = s.pool.len(s.roots[i][x]);
            self.levels[i].set_weight(x, w);
        }
    }

    fn insert(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError> {
        let key = EdgeKey::new(u, v)?;
        self.grow(key.b());
        if self.graph.contains(key) {
            return Ok(UpdateOutcome::DuplicateIgnored);
        }
        if self.levels[0].connected(u, v) {
            self.graph.record_edge(key, 0, EdgeKind::NonTree)?;
            self.add_half(0, u, v);
            self.add_half(0, v, u);
            Ok(UpdateOutcome::NewNonTreeEdge)
        } else {
            self.graph.record_edge(key, 0, EdgeKind::Tree)?;
            self.levels[0].link(key, u, v);
            Ok(UpdateOutcome::NewTreeEdge)
        }
    }

    fn delete(&mut self, u: VertexId, v: VertexId) -> UpdateOutcome {
        let Ok(key) = EdgeKey::new(u, v) else {
            return UpdateOutcome::MissingIgnored;
        };
        let Ok(rec) = self.graph.remove_edge(key) else {
            return UpdateOutcome::MissingIgnored;
        };
        match rec.kind {
            EdgeKind::NonTree => {
                self.remove_half(rec.level, u, v);
                self.remove_half(rec.level, v, u);
                UpdateOutcome::NonTreeRemoved
            }
            EdgeKind::Tree => self.delete_tree(key, rec.level),
        }
    }

    fn delete_tree(&mut self, key: EdgeKey, top: usize) -> UpdateOutcome {
        for f in &mut self.levels[..=top] {
            f.cut(key);
        }
        let (u, v) = (key.a(), key.b());
        let mut out = UpdateOutcome::SplitPermanent;
        for i in (0..=top).rev() {
            let f = &self.levels[i];
            let small = if f.tree_size(u) <= f.tree_size(v) {
                u
            } else {
                v
            };
            let rep = match self.sample(i, small) {
                Some(k) => Some(k),
                None => self.search(i, small),
            };
            if let Some(rep) = rep {
                self.reconnect(rep, i);
                out = UpdateOutcome::SplitReconnected(rep);
                break;
            }
        }
        if !self.eager() {
            for f in &mut self.levels[1..=top] {
                f.drop_singleton(u);
                f.drop_singleton(v);
            }
        }
        out
    }

    /// Weighted draws from the non-tree edges of `small`'s level-`i` tour.
    fn sample(&mut self, i: usize, small: VertexId) -> Option<EdgeKey> {
        let draws = 16 * ceil_log2(self.n);
        let f = &self.levels[i];
        let s = self.sampler.as_mut()?;
        let side = f.tour(small);
        let w = f.treap.weight(side);
        if w == 0 {
            return None;
        }
        for _ in 0..draws {
            let (occ, off) = f.treap.descend_weight(side, s.rng.gen_range(0..w));
            let x = f.treap.nodes[occ].vertex;
            let y = s
                .pool
                .nth(s.roots[i][x], off as usize)
                .expect("rank within weight");
            if f.tour(y) != side {
                return EdgeKey::new(x, y).ok();
            }
        }
        None
    }

    /// Promote the side's level-`i` tree edges, then scan its level-`i`
    /// non-tree edges in ascending vertex order, promoting internal ones until
    /// one leaves the side.
    fn search(&mut self, i: usize, small: VertexId) -> Option<EdgeKey> {
        let mut side = self.levels[i].tree_vertices(small);
        side.sort_unstable();
        self.marks.clear();
        for &x in &side {
            self.marks.set(x);
        }
        for &x in &side {
            let up: Vec<VertexId> = self.graph.tree_neighbors(x, i).filter(|&y| y > x).collect();
            for y in up {
                let k = EdgeKey::new(x, y).expect("distinct endpoints");
                if self.graph.promote_edge(k, i + 1).expect("edge recorded") {
                    self.ensure_level(i + 1);
                    self.grow_level(i + 1, x);
                    self.grow_level(i + 1, y);
                    self.levels[i + 1].link(k, x, y);
                }
            }
        }
        for &x in &side {
            let cand = self
                .graph
                .adjacency()
                .collect_neighbors(x, i, EdgeKind::NonTree);
            for y in cand {
                let k = EdgeKey::new(x, y).expect("distinct endpoints");
                if !self.marks.get(y) {
                    return Some(k);
                }
                if self.graph.promote_edge(k, i + 1).expect("edge recorded") {
                    self.ensure_level(i + 1);
                    self.remove_half(i, x, y);
                    self.remove_half(i, y, x);
                    self.add_half(i + 1, x, y);
                    self.add_half(i + 1, y, x);
                }
            }
        }
        None
    }

    fn grow_level(&mut self, i: usize, x: VertexId) {
        self.levels[i].ensure(x);
    }

    fn reconnect(&mut self, rep: EdgeKey, i: usize) {
        let (x, y) = (rep.a(), rep.b());
        self.remove_half(i, x, y);
        self.remove_half(i, y, x);
        self.graph
            .set_kind(rep, EdgeKind::Tree)
            .expect("edge recorded");
        for f in &mut self.levels[..=i] {
            f.ensure(x);
            f.ensure(y);
            f.link(rep, x, y);
        }
    }

    fn sample_entry(
        &mut self,
        level: usize,
        v: VertexId,
    ) -> Result<(VertexId, VertexId), SampleError> {
        if v >= self.n || level >= self.levels.len() {
            return Err(SampleError::Unknown(v, level));
        }
        let f = &self.levels[level];
        let s = self.sampler.as_mut().expect("sampling structure");
        let side = f.tour(v);
        let w = f.treap.weight(side);
        if w == 0 {
            return Err(SampleError::EmptyWeight);
        }
        let (occ, off) = f.treap.descend_weight(side, s.rng.gen_range(0..w));
        let x = f.treap.nodes[occ].vertex;
        let y = s
            .pool
            .nth(s.roots[level][x], off as usize)
            .expect("rank within weight");
        Ok((x, y))
    }

    fn component_id(&self, u: VertexId) -> Option<usize> {
        (u < self.n).then(|| self.levels[0].tour(u))
    }

    fn node_count(&self) -> usize {
        let rst = self.sampler.as_ref().map_or(0, |s| s.pool.live());
        self.levels.iter().map(|f| f.treap.live()).sum::<usize>() + rst
    }

    fn max_height(&self) -> usize {
        self.levels
            .iter()
            .map(EulerForest::max_treap_height)
            .max()
            .unwrap_or(0)
    }

    fn memory_bytes(&self, m: &MemoryModel) -> u64 {
        let mut tree = vec![0usize; self.levels.len()];
        let mut nontree = vec![0usize; self.levels.len()];
        for r in self.graph.edges() {
            let slot = match r.kind {
                EdgeKind::Tree => &mut tree,
                EdgeKind::NonTree => &mut nontree,
            };
            slot[r.level] += 1;
        }
        let mut total = 0;
        for (i, f) in self.levels.iter().enumerate() {
            total += level_bytes(f, m) + m.set(tree[i]) + m.set(nontree[i]);
        }
        match &self.sampler {
            Some(s) => {
                // rst entry: left, right; key, priority, count
                for level in &s.roots {
                    for &r in level {
                        if r != NIL {
                            total += m.bytes_per_link + s.pool.len(r) as u64 * m.node(2, 3, 0);
                        }
                    }
                }
            }
            None => {
                self.graph.adjacency().for_each_slot(|_, _, _, nt| {
                    if nt > 0 {
                        total += m.set(nt);
                    }
                });
            }
        }
        total
    }

    fn audit_tours(&self) -> Result<(), String> {
        for (i, f) in self.levels.iter().enumerate() {
            f.audit(&tree_keys(&self.graph, i))
                .map_err(|e| format!("level {i}: {e}"))?;
        }
        Ok(())
    }

    fn audit(&self) -> Result<(), String> {
        for (i, f) in self.levels.iter().enumerate() {
            f.audit(&tree_keys(&self.graph, i))
                .map_err(|e| format!("level {i}: {e}"))?;
            let want = if self.eager() || i == 0 { self.n } else { 0 };
            if want > 0 && f.present_vertices() != want {
                return Err(format!(
                    "level {i} holds {} of {want} vertices",
                    f.present_vertices()
                ));
            }
        }
        if self.graph.edge_count() > 0 && self.graph.max_level() > floor_log2(self.n) {
            return Err(format!(
                "edge level {} exceeds log n",
                self.graph.max_level()
            ));
        }
        for r in self.graph.edges() {
            if r.kind == EdgeKind::NonTree && !self.levels[r.level].connected(r.key.a(), r.key.b())
            {
                return Err(format!(
                    "non-tree edge {} spans two level-{} trees",
                    r.key, r.level
                ));
            }
        }
        if let Some(s) = &self.sampler {
            for (i, f) in self.levels.iter().enumerate() {
                for x in 0..self.n {
                    let r = s.roots[i][x];
                    s.pool.audit(r)?;
                    let want = self
                        .graph
                        .adjacency()
                        .collect_neighbors(x, i, EdgeKind::NonTree);
                    if s.pool.keys(r) != want {
                        return Err(format!("rst of {x} at level {i} differs from its edges"));
                    }
                    if f.own_weight(x) != want.len() {
                        return Err(format!("weight of {x} at level {i} is stale"));
                    }
                }
            }
        }
        Ok(())
    }
}

macro_rules! leveled_structure {
    ($name:ident, $label:literal, $sampling:literal) => {
        #[derive(Clone, Debug)]
        pub struct $name(LeveledEt);

        impl $name {
            pub fn new(seed: u64) -> Self {
                $name(LeveledEt::new(seed, $sampling))
            }

            /// Number of levels currently materialized.
            pub fn level_count(&self) -> usize {
                self.0.levels.len()
            }

            /// Tour of `v`'s tree at `level`, as a vertex sequence.
            pub fn tour(&self, level: usize, v: VertexId) -> Option<Vec<VertexId>> {
                let f = self.0.levels.get(level)?;
                f.has(v).then(|| f.tour_sequence(v))
            }
        }

        impl ConnectivityStructure for $name {
            fn name(&self) -> &'static str {
                $label
            }

            fn insert_edge(
                &mut self,
                u: VertexId,
                v: VertexId,
            ) -> Result<UpdateOutcome, GraphError> {
                self.0.insert(u, v)
            }

            fn delete_edge(&mut self, u: VertexId, v: VertexId) -> UpdateOutcome {
                self.0.delete(u, v)
            }

            fn component_id(&mut self, u: VertexId) -> Option<usize> {
                self.0.component_id(u)
            }

            fn ensure_vertex(&mut self, v: VertexId) {
                self.0.grow(v);
            }

            fn graph(&self) -> &GraphModel {
                &self.0.graph
            }

            fn node_count(&self) -> usize {
                self.0.node_count()
            }

            fn max_height(&mut self) -> usize {
                self.0.max_height()
            }

            fn memory_bytes(&self, m: &MemoryModel) -> u64 {
                self.0.memory_bytes(m)
            }

            fn audit(&mut self) -> Result<(), String> {
                self.0.audit()
            }

            fn shape_audit(&mut self) -> Result<(), String> {
                self.0.audit_tours()
            }
        }
    };
}

leveled_structure!(Hdt, "HDT", false);
leveled_structure!(Hk, "HK", true);

impl Hk {
    /// Draw a non-tree edge incident to `v`'s level-`level` tree, each
    /// endpoint entry with equal probability.
    pub fn sample_nontree(&mut self, level: usize, v: VertexId) -> Result<EdgeKey, SampleError> {
        let (x, y) = self.0.sample_entry(level, v)?;
        Ok(EdgeKey::new(x, y).expect("distinct endpoints"))
    }

    /// Like [`sample_nontree`](Self::sample_nontree), also telling which
    /// endpoint's entry was drawn: `(endpoint, other)`.
    pub fn sample_entry(
        &mut self,
        level: usize,
        v: VertexId,
    ) -> Result<(VertexId, VertexId), SampleError> {
        self.0.sample_entry(level, v)
    }
}
