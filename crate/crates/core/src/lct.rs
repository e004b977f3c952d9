//! Link-cut trees: preferred paths kept in splay trees keyed by depth.
//!
//! Each splay tree hangs off the tree parent of its topmost vertex through
//! `path_parent`. A lazy `flip` bit reverses a path so any vertex can be made
//! the represented root.

use std::collections::{BTreeSet, VecDeque};

use crate::connectivity::{ConnectivityStructure, ForestError, UpdateOutcome};
use crate::graph::{AdjacencyMode, EdgeKey, EdgeKind, GraphError, GraphModel, VertexId};
use crate::memory::MemoryModel;
use crate::util::Marks;

const NIL: usize = usize::MAX;

/// How the two sides of a cut tree are told apart during replacement search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideSearch {
    /// Check the root of every vertex in the forest.
    FullScan,
    /// Alternating breadth-first search over tree edges from both endpoints.
    AlternatingBfs,
}

#[derive(Clone, Debug)]
struct Node {
    left: usize,
    right: usize,
    parent: usize,
    path_parent: usize,
    flip: bool,
}

const EMPTY: Node = Node {
    left: NIL,
    right: NIL,
    parent: NIL,
    path_parent: NIL,
    flip: false,
};

#[derive(Clone, Debug)]
pub struct LinkCutForest {
    nodes: Vec<Node>,
    nte: Vec<BTreeSet<VertexId>>,
    graph: GraphModel,
    search: SideSearch,
    marks: Marks,
    side: Vec<u8>,
}

impl Default for LinkCutForest {
    fn default() -> Self {
        Self::new()
    }
}

impl LinkCutForest {
    pub fn new() -> Self {
        Self::with_search(SideSearch::FullScan)
    }

    pub fn with_search(search: SideSearch) -> Self {
        let mode = match search {
            SideSearch::FullScan => AdjacencyMode::Off,
            SideSearch::AlternatingBfs => AdjacencyMode::Split,
        };
        LinkCutForest {
            nodes: Vec::new(),
            nte: Vec::new(),
            graph: GraphModel::new(mode),
            search,
            marks: Marks::default(),
            side: Vec::new(),
        }
    }

    fn grow(&mut self, v: VertexId) {
        if v >= self.nodes.len() {
            self.nodes.resize(v + 1, EMPTY);
            self.nte.resize_with(v + 1, BTreeSet::new);
            self.graph.ensure_vertex(v);
        }
    }

    fn check(&self, u: VertexId) -> Result<(), ForestError> {
        if u < self.nodes.len() {
            Ok(())
        } else {
            Err(ForestError::UnknownVertex(u))
        }
    }

    #[inline]
    fn push(&mut self, x: usize) {
        if self.nodes[x].flip {
            let n = &mut self.nodes[x];
            n.flip = false;
            std::mem::swap(&mut n.left, &mut n.right);
            let (l, r) = (n.left, n.right);
            if l != NIL {
                self.nodes[l].flip ^= true;
            }
            if r != NIL {
                self.nodes[r].flip ^= true;
            }
        }
    }

    fn rotate(&mut self, x: usize) {
        let p = self.nodes[x].parent;
        let g = self.nodes[p].parent;
        if self.nodes[p].left == x {
            let b = self.nodes[x].right;
            self.nodes[p].left = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].right = p;
        } else {
            let b = self.nodes[x].left;
            self.nodes[p].right = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].left = p;
        }
        self.nodes[p].parent = x;
        self.nodes[x].parent = g;
        if g != NIL {
            if self.nodes[g].left == p {
                self.nodes[g].left = x;
            } else {
                self.nodes[g].right = x;
            }
        }
    }

    fn splay(&mut self, x: usize) {
        let mut chain = vec![x];
        let mut r = x;
        while self.nodes[r].parent != NIL {
            r = self.nodes[r].parent;
            chain.push(r);
        }
        for &c in chain.iter().rev() {
            self.push(c);
        }
        if r == x {
            return;
        }
        let pp = self.nodes[r].path_parent;
        self.nodes[r].path_parent = NIL;
        while self.nodes[x].parent != NIL {
            let p = self.nodes[x].parent;
            let g = self.nodes[p].parent;
            if g != NIL {
                let zigzig = (self.nodes[g].left == p) == (self.nodes[p].left == x);
                if zigzig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
        self.nodes[x].path_parent = pp;
    }

    /// Make the root-to-`x` path preferred and splay `x` to its top.
    fn access_node(&mut self, x: usize) {
        self.splay(x);
        let r = self.nodes[x].right;
        if r != NIL {
            self.nodes[r].parent = NIL;
            self.nodes[r].path_parent = x;
            self.nodes[x].right = NIL;
        }
        while self.nodes[x].path_parent != NIL {
            let w = self.nodes[x].path_parent;
            self.splay(w);
            let wr = self.nodes[w].right;
            if wr != NIL {
                self.nodes[wr].parent = NIL;
                self.nodes[wr].path_parent = w;
            }
            self.nodes[w].right = x;
            self.nodes[x].parent = w;
            self.nodes[x].path_parent = NIL;
            self.splay(x);
        }
    }

    pub fn access(&mut self, u: VertexId) -> Result<(), ForestError> {
        self.check(u)?;
        self.access_node(u);
        Ok(())
    }

    fn root_of(&mut self, x: usize) -> usize {
        self.access_node(x);
        let mut r = x;
        loop {
            self.push(r);
            let l = self.nodes[r].left;
            if l == NIL {
                break;
            }
            r = l;
        }
        self.splay(r);
        r
    }

    pub fn find_root(&mut self, u: VertexId) -> Result<VertexId, ForestError> {
        self.check(u)?;
        Ok(self.root_of(u))
    }

    fn evert_node(&mut self, x: usize) {
        self.access_node(x);
        self.nodes[x].flip ^= true;
        self.push(x);
    }

    pub fn evert(&mut self, u: VertexId) -> Result<(), ForestError> {
        self.check(u)?;
        self.evert_node(u);
        Ok(())
    }

    /// Hang `v`'s tree below `u`; `v` becomes a child of `u`.
    pub fn link(&mut self, u: VertexId, v: VertexId) -> Result<(), ForestError> {
        self.check(u)?;
        self.check(v)?;
        if self.root_of(u) == self.root_of(v) {
            return Err(ForestError::AlreadyConnected(u, v));
        }
        self.link_nodes(u, v);
        Ok(())
    }

    fn link_nodes(&mut self, u: usize, v: usize) {
        self.evert_node(v);
        self.access_node(u);
        self.nodes[v].path_parent = u;
    }

    pub fn cut(&mut self, u: VertexId, v: VertexId) -> Result<(), ForestError> {
        self.check(u)?;
        self.check(v)?;
        self.evert_node(u);
        self.access_node(v);
        self.push(v);
        let l = self.nodes[v].left;
        let adjacent = l == u && {
            self.push(u);
            self.nodes[u].left == NIL && self.nodes[u].right == NIL
        };
        if !adjacent {
            return Err(ForestError::NotTreeEdge(u, v));
        }
        self.nodes[v].left = NIL;
        self.nodes[u].parent = NIL;
        Ok(())
    }

    /// Label the two sides after a cut: 1 for `u`'s side, 2 for `v`'s side.
    /// Returns the vertices of the smaller side, ties going to the side of the
    /// smaller endpoint.
    fn smaller_side(&mut self, u: VertexId, v: VertexId) -> (Vec<VertexId>, u8) {
        let n = self.nodes.len();
        self.side.clear();
        self.side.resize(n, 0);
        let (mut su, mut sv) = (Vec::new(), Vec::new());
        match self.search {
            SideSearch::FullScan => {
                let ru = self.root_of(u);
                let rv = self.root_of(v);
                for w in 0..n {
                    let r = self.root_of(w);
                    if r == ru {
                        self.side[w] = 1;
                        su.push(w);
                    } else if r == rv {
                        self.side[w] = 2;
                        sv.push(w);
                    }
                }
            }
            SideSearch::AlternatingBfs => {
                self.marks.clear();
                let mut qu = VecDeque::from([u]);
                let mut qv = VecDeque::from([v]);
                self.marks.set(u);
                self.marks.set(v);
                su.push(u);
                sv.push(v);
                loop {
                    let du = self.bfs_step(&mut qu, &mut su);
                    let dv = self.bfs_step(&mut qv, &mut sv);
                    if du || dv {
                        break;
                    }
                }
                // finish whichever side could still be the smaller one
                while !qu.is_empty() && su.len() <= sv.len() {
                    self.bfs_step(&mut qu, &mut su);
                }
                while !qv.is_empty() && sv.len() <= su.len() {
                    self.bfs_step(&mut qv, &mut sv);
                }
                for &w in &su {
                    self.side[w] = 1;
                }
                for &w in &sv {
                    self.side[w] = 2;
                }
                // a side whose queue is not empty is only partially labelled
                if !qu.is_empty() {
                    let mut small = sv;
                    small.sort_unstable();
                    return (small, 2);
                }
                if !qv.is_empty() {
                    let mut small = su;
                    small.sort_unstable();
                    return (small, 1);
                }
            }
        }
        let u_small = su.len() < sv.len() || (su.len() == sv.len() && u < v);
        let (mut small, tag) = if u_small { (su, 1) } else { (sv, 2) };
        small.sort_unstable();
        (small, tag)
    }

    /// Expand one vertex; returns true when the side is exhausted.
    fn bfs_step(&mut self, q: &mut VecDeque<VertexId>, seen: &mut Vec<VertexId>) -> bool {
        let Some(x) = q.pop_front() else {
            return true;
        };
        let nbrs: Vec<VertexId> = self
            .graph
            .adjacency()
            .collect_neighbors(x, 0, EdgeKind::Tree);
        for y in nbrs {
            if !self.marks.get(y) {
                self.marks.set(y);
                seen.push(y);
                q.push_back(y);
            }
        }
        q.is_empty()
    }

    fn delete_tree_edge(&mut self, key: EdgeKey) -> UpdateOutcome {
        let (u, v) = (key.a(), key.b());
        self.cut(u, v).expect("tree edge is represented");
        let (small, tag) = self.smaller_side(u, v);
        for &x in &small {
            let found = self.nte[x]
                .iter()
                .copied()
                .find(|&y| self.side[y] != tag && self.side[y] != 0);
            if let Some(y) = found {
                let rep = EdgeKey::new(x, y).expect("simple");
                self.nte[x].remove(&y);
                self.nte[y].remove(&x);
                self.graph.set_kind(rep, EdgeKind::Tree).expect("recorded");
                self.link_nodes(y, x);
                return UpdateOutcome::SplitReconnected(rep);
            }
        }
        UpdateOutcome::SplitPermanent
    }

    /// Splay-tree in-order sequences with flip marks applied, without mutating.
    fn preferred_paths(&self) -> Result<Vec<Vec<usize>>, String> {
        let mut paths = Vec::new();
        for r in 0..self.nodes.len() {
            if self.nodes[r].parent != NIL {
                continue;
            }
            let mut seq = Vec::new();
            // (node, accumulated flip, expanded)
            let mut stack = vec![(r, false, false)];
            while let Some((x, f, expanded)) = stack.pop() {
                if expanded {
                    seq.push(x);
                    continue;
                }
                let f2 = f ^ self.nodes[x].flip;
                let (mut a, mut b) = (self.nodes[x].left, self.nodes[x].right);
                if f2 {
                    std::mem::swap(&mut a, &mut b);
                }
                for c in [a, b] {
                    if c != NIL && self.nodes[c].parent != x {
                        return Err(format!("splay child {c} of {x} has wrong parent"));
                    }
                }
                if b != NIL {
                    stack.push((b, f2, false));
                }
                stack.push((x, f2, true));
                if a != NIL {
                    stack.push((a, f2, false));
                }
            }
            paths.push(seq);
        }
        Ok(paths)
    }

    /// Represented parent of every vertex, recovered from the splay encoding.
    pub fn represented_parents(&self) -> Result<Vec<Option<VertexId>>, String> {
        let mut par = vec![None; self.nodes.len()];
        for path in self.preferred_paths()? {
            let top = path[0];
            let root = path_root(&self.nodes, top);
            let pp = self.nodes[root].path_parent;
            par[top] = (pp != NIL).then_some(pp);
            for w in path.windows(2) {
                par[w[1]] = Some(w[0]);
            }
        }
        Ok(par)
    }
}

fn path_root(nodes: &[Node], mut x: usize) -> usize {
    while nodes[x].parent != NIL {
        x = nodes[x].parent;
    }
    x
}

impl ConnectivityStructure for LinkCutForest {
    fn name(&self) -> &'static str {
        "LCT"
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError> {
        let key = EdgeKey::new(u, v)?;
        self.grow(key.b());
        if self.graph.contains(key) {
            return Ok(UpdateOutcome::DuplicateIgnored);
        }
        if self.root_of(u) == self.root_of(v) {
            self.nte[u].insert(v);
            self.nte[v].insert(u);
            self.graph.record_edge(key, 0, EdgeKind::NonTree)?;
            Ok(UpdateOutcome::NewNonTreeEdge)
        } else {
            self.link_nodes(u, v);
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
        (u < self.nodes.len()).then(|| self.root_of(u))
    }

    fn ensure_vertex(&mut self, v: VertexId) {
        self.grow(v);
    }

    fn graph(&self) -> &GraphModel {
        &self.graph
    }

    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn max_height(&mut self) -> usize {
        let Ok(par) = self.represented_parents() else {
            return 0;
        };
        let mut depth = vec![usize::MAX; par.len()];
        let mut best = 0;
        for s in 0..par.len() {
            let mut chain = Vec::new();
            let mut x = s;
            while depth[x] == usize::MAX {
                chain.push(x);
                match par[x] {
                    Some(p) => x = p,
                    None => {
                        depth[x] = 0;
                        chain.pop();
                        break;
                    }
                }
            }
            let mut d = depth[x];
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
            best = best.max(depth[s]);
        }
        best
    }

    fn memory_bytes(&self, m: &MemoryModel) -> u64 {
        // left, right, parent, path_parent, flip, nte set
        let mut total = 0;
        for x in 0..self.nodes.len() {
            total += m.node(4, 1, 0) + m.set(self.nte[x].len());
        }
        if self.search == SideSearch::AlternatingBfs {
            self.graph.adjacency().for_each_slot(|_, _, t, _| {
                total += m.set(t);
            });
        }
        total
    }

    fn audit(&mut self) -> Result<(), String> {
        let par = self.represented_parents()?;
        let mut links = 0;
        for (x, p) in par.iter().enumerate() {
            if let Some(p) = *p {
                links += 1;
                let k = EdgeKey::new(x, p).map_err(|e| e.to_string())?;
                if self.graph.record(k).map(|r| r.kind) != Some(EdgeKind::Tree) {
                    return Err(format!("represented edge {k} is not a tree edge"));
                }
            }
        }
        if links != self.graph.tree_edge_count() {
            return Err(format!(
                "{links} represented edges, {} tree edges",
                self.graph.tree_edge_count()
            ));
        }
        // walking parents must terminate
        for s in 0..par.len() {
            let mut x = s;
            for _ in 0..=par.len() {
                match par[x] {
                    Some(p) => x = p,
                    None => break,
                }
            }
            if par[x].is_some() {
                return Err("represented parents contain a cycle".into());
            }
        }
        for x in 0..self.nte.len() {
            for &y in &self.nte[x] {
                let k = EdgeKey::new(x, y).map_err(|e| e.to_string())?;
                if !self.nte[y].contains(&x)
                    || self.graph.record(k).map(|r| r.kind) != Some(EdgeKind::NonTree)
                {
                    return Err(format!("nte entry {k} inconsistent"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_tree(search: SideSearch) -> LinkCutForest {
        let mut t = LinkCutForest::with_search(search);
        for (u, v) in [(5, 1), (5, 2), (2, 3), (3, 4), (5, 8), (8, 7), (7, 6)] {
            assert_eq!(t.insert_edge(u, v).unwrap(), UpdateOutcome::NewTreeEdge);
        }
        for (u, v) in [(1, 2), (1, 3), (3, 6)] {
            assert_eq!(t.insert_edge(u, v).unwrap(), UpdateOutcome::NewNonTreeEdge);
        }
        t
    }

    #[test]
    fn find_root_of_figure() {
        let mut t = figure_tree(SideSearch::FullScan);
        t.evert(5).unwrap();
        assert_eq!(t.find_root(4).unwrap(), 5);
        t.evert(4).unwrap();
        assert_eq!(t.find_root(5).unwrap(), 4);
        assert_eq!(t.find_root(0).unwrap(), 0);
        t.audit().unwrap();
    }

    #[test]
    fn link_cut_inverse() {
        let mut t = LinkCutForest::new();
        t.ensure_vertex(2);
        t.link(1, 2).unwrap();
        assert_eq!(t.find_root(2).unwrap(), t.find_root(1).unwrap());
        assert_eq!(t.link(2, 1), Err(ForestError::AlreadyConnected(2, 1)));
        t.cut(1, 2).unwrap();
        assert_ne!(t.find_root(2).unwrap(), t.find_root(1).unwrap());
        assert_eq!(t.cut(1, 2), Err(ForestError::NotTreeEdge(1, 2)));
    }

    #[test]
    fn replacement_after_cut() {
        for search in [SideSearch::FullScan, SideSearch::AlternatingBfs] {
            let mut t = figure_tree(search);
            let k13 = EdgeKey::new(1, 3).unwrap();
            assert_eq!(t.delete_edge(2, 3), UpdateOutcome::SplitReconnected(k13));
            assert!(t.connected(4, 6));
            t.audit().unwrap();
        }
    }

    #[test]
    fn bridge() {
        let mut t = LinkCutForest::new();
        t.insert_edge(1, 2).unwrap();
        t.insert_edge(2, 3).unwrap();
        assert_eq!(t.delete_edge(1, 2), UpdateOutcome::SplitPermanent);
        assert!(!t.connected(1, 2));
        assert!(t.connected(2, 3));
    }

    #[test]
    fn evert_twice() {
        let mut t = figure_tree(SideSearch::FullScan);
        t.evert(3).unwrap();
        t.evert(3).unwrap();
        t.evert(7).unwrap();
        assert_eq!(t.find_root(1).unwrap(), 7);
    }
}
