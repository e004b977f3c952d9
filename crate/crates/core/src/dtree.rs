//! Spanning trees without levels that keep the sum of node depths small.
//!
//! Inserting a tree edge hangs the smaller tree under the larger one. After a
//! tree edge is deleted the smaller side is searched and re-attached at the
//! replacement endpoint closest to the root of the other side.

use std::collections::{BTreeSet, VecDeque};

use crate::connectivity::{ConnectivityStructure, ForestError, UpdateOutcome};
use crate::graph::{AdjacencyMode, EdgeKey, EdgeKind, GraphError, GraphModel, VertexId};
use crate::memory::MemoryModel;
use crate::util::Marks;

const NIL: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct DTree {
    parent: Vec<usize>,
    children: Vec<BTreeSet<VertexId>>,
    size: Vec<usize>,
    nte: Vec<BTreeSet<VertexId>>,
    graph: GraphModel,
    marks: Marks,
}

impl Default for DTree {
    fn default() -> Self {
        Self::new()
    }
}

impl DTree {
    pub fn new() -> Self {
        DTree {
            parent: Vec::new(),
            children: Vec::new(),
            size: Vec::new(),
            nte: Vec::new(),
            graph: GraphModel::new(AdjacencyMode::Off),
            marks: Marks::default(),
        }
    }

    fn grow(&mut self, v: VertexId) {
        if v >= self.parent.len() {
            let n = v + 1;
            self.parent.resize(n, NIL);
            self.children.resize_with(n, BTreeSet::new);
            self.size.resize(n, 1);
            self.nte.resize_with(n, BTreeSet::new);
            self.graph.ensure_vertex(v);
        }
    }

    fn check(&self, u: VertexId) -> Result<(), ForestError> {
        if u < self.parent.len() {
            Ok(())
        } else {
            Err(ForestError::UnknownVertex(u))
        }
    }

    pub fn parent(&self, u: VertexId) -> Option<VertexId> {
        self.parent.get(u).copied().filter(|&p| p != NIL)
    }

    pub fn subtree_size(&self, u: VertexId) -> Option<usize> {
        self.size.get(u).copied()
    }

    /// Root of `u`'s tree and the depth of `u`.
    pub fn find_root(&self, u: VertexId) -> Result<(VertexId, usize), ForestError> {
        self.check(u)?;
        Ok(self.root_depth(u))
    }

    fn root_depth(&self, mut u: VertexId) -> (VertexId, usize) {
        let mut d = 0;
        while self.parent[u] != NIL {
            u = self.parent[u];
            d += 1;
        }
        (u, d)
    }

    /// Sum of node depths in the tree containing `u`.
    pub fn depth_sum(&self, u: VertexId) -> usize {
        let (root, _) = self.root_depth(u);
        let mut total = 0;
        let mut queue = VecDeque::from([(root, 0usize)]);
        while let Some((x, d)) = queue.pop_front() {
            total += d;
            for &c in &self.children[x] {
                queue.push_back((c, d + 1));
            }
        }
        total
    }

    /// Make `u` the root of its tree by reversing the path to the old root.
    pub fn reroot(&mut self, u: VertexId) -> Result<(), ForestError> {
        self.check(u)?;
        self.reroot_at(u);
        Ok(())
    }

    fn reroot_at(&mut self, u: VertexId) {
        let mut path = vec![u];
        let mut x = u;
        while self.parent[x] != NIL {
            x = self.parent[x];
            path.push(x);
        }
        if path.len() == 1 {
            return;
        }
        let total = self.size[x];
        let old: Vec<usize> = path.iter().map(|&p| self.size[p]).collect();
        for j in (1..path.len()).rev() {
            let (lo, hi) = (path[j - 1], path[j]);
            self.children[hi].remove(&lo);
            self.children[lo].insert(hi);
            self.parent[hi] = lo;
            self.size[hi] = total - old[j - 1];
        }
        self.parent[u] = NIL;
        self.size[u] = total;
    }

    fn attach(&mut self, child: VertexId, par: VertexId) {
        self.parent[child] = par;
        self.children[par].insert(child);
        let s = self.size[child];
        let mut x = par;
        while x != NIL {
            self.size[x] += s;
            x = self.parent[x];
        }
    }

    fn detach(&mut self, child: VertexId) {
        let par = self.parent[child];
        self.children[par].remove(&child);
        self.parent[child] = NIL;
        let s = self.size[child];
        let mut x = par;
        while x != NIL {
            self.size[x] -= s;
            x = self.parent[x];
        }
    }

    /// Join two trees with edge `(u, v)`. The smaller tree is rerooted at its
    /// endpoint and hung below the other endpoint; on equal sizes `v`'s tree
    /// goes below `u`.
    pub fn insert_tree_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), ForestError> {
        self.check(u)?;
        self.check(v)?;
        let (ru, _) = self.root_depth(u);
        let (rv, _) = self.root_depth(v);
        if ru == rv {
            return Err(ForestError::AlreadyConnected(u, v));
        }
        if self.size[rv] <= self.size[ru] {
            self.reroot_at(v);
            self.attach(v, u);
        } else {
            self.reroot_at(u);
            self.attach(u, v);
        }
        Ok(())
    }

    fn tree_vertices(&mut self, root: VertexId) -> Vec<VertexId> {
        self.marks.clear();
        let mut out = vec![root];
        self.marks.set(root);
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            i += 1;
            for &c in &self.children[x] {
                self.marks.set(c);
                out.push(c);
            }
        }
        out
    }

    fn delete_tree_edge(&mut self, key: EdgeKey) -> UpdateOutcome {
        let (u, v) = (key.a(), key.b());
        let child = if self.parent[u] == v { u } else { v };
        let par = key.other(child);
        debug_assert_eq!(self.parent[child], par);
        self.detach(child);
        let (other_root, _) = self.root_depth(par);
        let small_root = if self.size[child] <= self.size[other_root] {
            child
        } else {
            other_root
        };
        let side = self.tree_vertices(small_root);
        // (anchor depth, anchor, key, small endpoint)
        let mut best: Option<(usize, VertexId, EdgeKey, VertexId)> = None;
        for &x in &side {
            for &y in &self.nte[x] {
                if self.marks.get(y) {
                    continue;
                }
                let (_, d) = self.root_depth(y);
                let cand = (
                    d,
                    y,
                    EdgeKey::new(x, y).expect("non-tree edges are simple"),
                    x,
                );
                if best.is_none_or(|b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                    best = Some(cand);
                }
            }
        }
        match best {
            None => UpdateOutcome::SplitPermanent,
            Some((_, y, rep, x)) => {
                self.reroot_at(x);
                self.attach(x, y);
                self.nte[x].remove(&y);
                self.nte[y].remove(&x);
                self.graph
                    .set_kind(rep, EdgeKind::Tree)
                    .expect("replacement is recorded");
                UpdateOutcome::SplitReconnected(rep)
            }
        }
    }
}

impl ConnectivityStructure for DTree {
    fn name(&self) -> &'static str {
        "D-tree"
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError> {
        let key = EdgeKey::new(u, v)?;
        self.grow(key.b());
        if self.graph.contains(key) {
            return Ok(UpdateOutcome::DuplicateIgnored);
        }
        let (ru, _) = self.root_depth(u);
        let (rv, _) = self.root_depth(v);
        if ru == rv {
            self.nte[u].insert(v);
            self.nte[v].insert(u);
            self.graph.record_edge(key, 0, EdgeKind::NonTree)?;
            Ok(UpdateOutcome::NewNonTreeEdge)
        } else {
            self.insert_tree_edge(u, v).expect("roots differ");
            self.graph.record_edge(key, 0, EdgeKind::Tree)?;
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
                self.nte[u].remove(&v);
                self.nte[v].remove(&u);
                UpdateOutcome::NonTreeRemoved
            }
            EdgeKind::Tree => self.delete_tree_edge(key),
        }
    }

    fn component_id(&mut self, u: VertexId) -> Option<usize> {
        (u < self.parent.len()).then(|| self.root_depth(u).0)
    }

    fn ensure_vertex(&mut self, v: VertexId) {
        self.grow(v);
    }

    fn graph(&self) -> &GraphModel {
        &self.graph
    }

    fn node_count(&self) -> usize {
        self.parent.len()
    }

    fn max_height(&mut self) -> usize {
        let mut best = 0;
        for r in 0..self.parent.len() {
            if self.parent[r] != NIL {
                continue;
            }
            let mut queue = VecDeque::from([(r, 0usize)]);
            while let Some((x, d)) = queue.pop_front() {
                best = best.max(d);
                for &c in &self.children[x] {
                    queue.push_back((c, d + 1));
                }
            }
        }
        best
    }

    fn memory_bytes(&self, m: &MemoryModel) -> u64 {
        // parent link, size, children set, nte set
        let mut total = 0;
        for x in 0..self.parent.len() {
            total += m.node(1, 1, 0) + m.set(self.children[x].len()) + m.set(self.nte[x].len());
        }
        total
    }

    fn audit(&mut self) -> Result<(), String> {
        let n = self.parent.len();
        let mut tree_links = 0;
        for x in 0..n {
            let p = self.parent[x];
            if p != NIL {
                tree_links += 1;
                if !self.children[p].contains(&x) {
                    return Err(format!("{x} missing from children of its parent {p}"));
                }
                let k = EdgeKey::new(x, p).map_err(|e| e.to_string())?;
                if self.graph.record(k).map(|r| r.kind) != Some(EdgeKind::Tree) {
                    return Err(format!("parent link {k} is not a tree edge"));
                }
            }
            for &c in &self.children[x] {
                if self.parent[c] != x {
                    return Err(format!("child {c} of {x} points elsewhere"));
                }
            }
            let expect = 1 + self.children[x]
                .iter()
                .map(|&c| self.size[c])
                .sum::<usize>();
            if self.size[x] != expect {
                return Err(format!("size of {x} is {} expected {expect}", self.size[x]));
            }
            for &y in &self.nte[x] {
                if !self.nte[y].contains(&x) {
                    return Err(format!("nte asymmetric on ({x}, {y})"));
                }
                let k = EdgeKey::new(x, y).map_err(|e| e.to_string())?;
                if self.graph.record(k).map(|r| r.kind) != Some(EdgeKind::NonTree) {
                    return Err(format!("nte entry {k} is not a non-tree edge"));
                }
            }
        }
        if tree_links != self.graph.tree_edge_count() {
            return Err(format!(
                "{tree_links} parent links but {} tree edges",
                self.graph.tree_edge_count()
            ));
        }
        let nte_total: usize = self.nte.iter().map(BTreeSet::len).sum();
        if nte_total != 2 * (self.graph.edge_count() - self.graph.tree_edge_count()) {
            return Err("nte sets do not cover the non-tree edges".into());
        }
        // sizes are consistent, so a cycle would have made some size wrong
        // unless it is detached; check every vertex reaches a root
        let roots: usize = (0..n)
            .filter(|&x| self.parent[x] == NIL)
            .map(|r| self.size[r])
            .sum();
        if roots != n {
            return Err("parent links contain a cycle".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The left tree of the D-tree figure rooted at 5, with the three
    /// non-tree edges of the running example.
    fn figure_five() -> DTree {
        let mut t = DTree::new();
        for (u, v) in [(5, 1), (5, 2), (2, 3), (3, 4), (5, 8), (8, 7), (7, 6)] {
            assert_eq!(t.insert_edge(u, v).unwrap(), UpdateOutcome::NewTreeEdge);
        }
        for (u, v) in [(1, 2), (1, 3), (3, 6)] {
            assert_eq!(t.insert_edge(u, v).unwrap(), UpdateOutcome::NewNonTreeEdge);
        }
        t
    }

    #[test]
    fn find_root_depth() {
        let t = figure_five();
        assert_eq!(t.find_root(4).unwrap(), (5, 3));
        assert_eq!(t.find_root(5).unwrap(), (5, 0));
        assert_eq!(t.find_root(42), Err(ForestError::UnknownVertex(42)));
    }

    #[test]
    fn delete_picks_shallowest_anchor() {
        let mut t = figure_five();
        let k13 = EdgeKey::new(1, 3).unwrap();
        assert_eq!(t.delete_edge(2, 3), UpdateOutcome::SplitReconnected(k13));
        assert_eq!(t.parent(3), Some(1));
        assert_eq!(t.find_root(4).unwrap(), (5, 3));
        t.audit().unwrap();
    }

    #[test]
    fn reroot_chain() {
        let mut t = DTree::new();
        t.insert_edge(5, 1).unwrap();
        t.insert_edge(1, 3).unwrap();
        assert_eq!(t.parent(3), Some(1));
        assert_eq!(t.parent(1), Some(5));
        t.reroot(3).unwrap();
        assert_eq!(t.parent(1), Some(3));
        assert_eq!(t.parent(5), Some(1));
        assert_eq!(t.subtree_size(3), Some(3));
        assert_eq!(t.subtree_size(1), Some(2));
        t.reroot(3).unwrap();
        t.audit().unwrap();
    }

    #[test]
    fn singleton_tie_goes_under_first() {
        let mut t = DTree::new();
        t.insert_edge(1, 2).unwrap();
        assert_eq!(t.parent(2), Some(1));
        assert_eq!(
            t.insert_tree_edge(1, 2),
            Err(ForestError::AlreadyConnected(1, 2))
        );
    }

    #[test]
    fn small_tree_hangs_below_large() {
        let mut t = DTree::new();
        for v in 1..7 {
            t.insert_edge(0, v).unwrap();
        }
        t.insert_edge(6, 9).unwrap();
        assert_eq!(t.find_root(9).unwrap(), (0, 2));
        assert_eq!(t.subtree_size(0), Some(8));
        assert_eq!(t.subtree_size(6), Some(2));
    }

    #[test]
    fn bridge_delete() {
        let mut t = DTree::new();
        t.insert_edge(1, 2).unwrap();
        t.insert_edge(2, 3).unwrap();
        assert_eq!(t.delete_edge(1, 2), UpdateOutcome::SplitPermanent);
        assert!(!t.connected(1, 3));
        assert_eq!(t.delete_edge(1, 2), UpdateOutcome::MissingIgnored);
        t.audit().unwrap();
    }
}
