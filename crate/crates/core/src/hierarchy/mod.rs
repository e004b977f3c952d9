//! Cluster hierarchies over the leveled spanning forest: structural trees
//! (ST, STV), local trees (LT, LTV) and lazy local trees (LzT).
//!
//! A level-i cluster is a maximal set of vertices joined by tree edges of
//! level at least i. Every component has an explicit level-0 root. Deeper
//! clusters with more than one vertex are super nodes; a single-vertex
//! cluster below level 0 is represented by the vertex leaf itself.

mod audit;
mod local;
pub use audit::ShapeReport;

use crate::connectivity::{ConnectivityStructure, UpdateOutcome};
use crate::graph::{AdjacencyMode, EdgeKey, EdgeKind, GraphError, GraphModel, VertexId};
use crate::memory::MemoryModel;
use crate::util::Marks;

pub(crate) const NIL: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Free,
    Leaf,
    Super,
    /// Pair of two equal-rank nodes inside a rank tree.
    RankRoot,
    Connecting,
    LazyRoot,
    BufferRoot,
    BottomRoot,
}

/// How a super node holds its children.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Plain child set.
    Flat,
    /// Binary local tree of rank trees.
    Local,
    /// Local tree with a buffer for children below `beta` leaves.
    Lazy { beta: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub(crate) kind: NodeKind,
    pub(crate) vertex: VertexId,
    pub(crate) level: usize,
    pub(crate) parent: usize,
    pub(crate) left: usize,
    pub(crate) right: usize,
    pub(crate) children: std::collections::BTreeSet<usize>,
    pub(crate) nl: usize,
    /// Level-i tree edges below (or any edges, for the merged variant).
    pub(crate) tbits: u64,
    pub(crate) nbits: u64,
}

impl Node {
    fn new(kind: NodeKind) -> Self {
        Node {
            kind,
            vertex: NIL,
            level: 0,
            parent: NIL,
            left: NIL,
            right: NIL,
            children: Default::default(),
            nl: 0,
            tbits: 0,
            nbits: 0,
        }
    }
}

/// Vertices of the side picked for a deletion and the level-(i+1) items
/// covering them.
struct Side {
    items: Vec<usize>,
    vertices: Option<Vec<VertexId>>,
}

#[derive(Clone, Debug)]
pub struct ClusterForest {
    name: &'static str,
    layout: Layout,
    pub(crate) nodes: Vec<Node>,
    free: Vec<usize>,
    pub(crate) leaf: Vec<usize>,
    pub(crate) graph: GraphModel,
    marks_a: Marks,
    marks_b: Marks,
    node_visits: u64,
}

impl ClusterForest {
    fn with(name: &'static str, layout: Layout, adjacency: AdjacencyMode) -> Self {
        ClusterForest {
            name,
            layout,
            nodes: Vec::new(),
            free: Vec::new(),
            leaf: Vec::new(),
            graph: GraphModel::new(adjacency),
            marks_a: Marks::default(),
            marks_b: Marks::default(),
            node_visits: 0,
        }
    }

    pub fn st() -> Self {
        Self::with("ST", Layout::Flat, AdjacencyMode::Split)
    }

    pub fn stv() -> Self {
        Self::with("STV", Layout::Flat, AdjacencyMode::Merged)
    }

    pub fn lt() -> Self {
        Self::with("LT", Layout::Local, AdjacencyMode::Split)
    }

    pub fn ltv() -> Self {
        Self::with("LTV", Layout::Local, AdjacencyMode::Merged)
    }

    /// Lazy local trees; `beta` below 2 is raised to 2.
    pub fn lzt(beta: usize) -> Self {
        Self::with(
            "LzT",
            Layout::Lazy { beta: beta.max(2) },
            AdjacencyMode::Split,
        )
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Adjacency entries plus hierarchy nodes examined so far.
    pub fn visits(&self) -> u64 {
        self.graph.adjacency().visits() + self.node_visits
    }

    /// Adjacency entries examined so far.
    pub fn edge_visits(&self) -> u64 {
        self.graph.adjacency().visits()
    }

    fn merged(&self) -> bool {
        self.graph.adjacency().mode() == AdjacencyMode::Merged
    }

    pub(crate) fn alloc(&mut self, kind: NodeKind) -> usize {
        let node = Node::new(kind);
        if let Some(i) = self.free.pop() {
            self.nodes[i] = node;
            i
        } else {
            self.nodes.push(node);
            self.nodes.len() - 1
        }
    }

    pub(crate) fn release(&mut self, x: usize) {
        let n = &mut self.nodes[x];
        n.kind = NodeKind::Free;
        n.children.clear();
        self.free.push(x);
    }

    fn new_super(&mut self, level: usize) -> usize {
        let s = self.alloc(NodeKind::Super);
        self.nodes[s].level = level;
        s
    }

    pub(crate) fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub(crate) fn is_item(&self, x: usize) -> bool {
        matches!(self.nodes[x].kind, NodeKind::Leaf | NodeKind::Super)
    }

    pub(crate) fn top(&self, mut x: usize) -> usize {
        while self.nodes[x].parent != NIL {
            x = self.nodes[x].parent;
        }
        x
    }

    pub(crate) fn depth(&self, mut x: usize) -> usize {
        let mut d = 0;
        while self.nodes[x].parent != NIL {
            x = self.nodes[x].parent;
            d += 1;
        }
        d
    }

    /// Nearest super node strictly above `x`.
    pub(crate) fn cluster_parent(&self, x: usize) -> usize {
        let mut p = self.nodes[x].parent;
        while p != NIL && self.nodes[p].kind != NodeKind::Super {
            p = self.nodes[p].parent;
        }
        p
    }

    /// Super node of level `level` above leaf `x`.
    fn cluster_at(&self, x: usize, level: usize) -> usize {
        let mut p = self.cluster_parent(x);
        while self.nodes[p].level != level {
            p = self.cluster_parent(p);
        }
        p
    }

    /// Child item of cluster `c` that contains leaf `x`.
    fn item_under(&self, x: usize, c: usize) -> usize {
        let mut last = x;
        let mut p = self.nodes[x].parent;
        while p != c {
            if self.is_item(p) {
                last = p;
            }
            p = self.nodes[p].parent;
        }
        last
    }

    fn add_nl(&mut self, mut x: usize, delta: isize) {
        while x != NIL {
            let n = &mut self.nodes[x];
            n.nl = (n.nl as isize + delta) as usize;
            x = n.parent;
        }
    }

    pub(crate) fn leaf_bits(&self, v: VertexId) -> (u64, u64) {
        let adj = self.graph.adjacency();
        let (mut t, mut n) = (0u64, 0u64);
        for j in 0..adj.level_count(v) {
            if self.merged() {
                if adj.count_any(v, j) > 0 {
                    t |= 1 << j;
                }
            } else {
                if adj.count(v, j, EdgeKind::Tree) > 0 {
                    t |= 1 << j;
                }
                if adj.count(v, j, EdgeKind::NonTree) > 0 {
                    n |= 1 << j;
                }
            }
        }
        (t, n)
    }

    /// Recompute one node's aggregates from its children (local layouts).
    pub(crate) fn recompute(&mut self, x: usize) {
        if self.nodes[x].kind == NodeKind::Leaf {
            let v = self.nodes[x].vertex;
            let (t, n) = self.leaf_bits(v);
            let node = &mut self.nodes[x];
            node.nl = 1;
            node.tbits = t;
            node.nbits = n;
            return;
        }
        let (l, r) = (self.nodes[x].left, self.nodes[x].right);
        let (mut nl, mut t, mut n) = (0, 0, 0);
        for c in [l, r] {
            if c != NIL {
                let cn = &self.nodes[c];
                nl += cn.nl;
                t |= cn.tbits;
                n |= cn.nbits;
            }
        }
        let node = &mut self.nodes[x];
        node.nl = nl;
        node.tbits = t;
        node.nbits = n;
    }

    pub(crate) fn refresh_path(&mut self, mut x: usize) {
        while x != NIL {
            self.recompute(x);
            x = self.nodes[x].parent;
        }
    }

    /// Bring the bitmaps above `v`'s leaf up to date with the graph.
    fn touch(&mut self, v: VertexId) {
        if self.layout == Layout::Flat {
            return;
        }
        let x = self.leaf[v];
        let (t, n) = self.leaf_bits(v);
        if self.nodes[x].tbits != t || self.nodes[x].nbits != n {
            self.nodes[x].tbits = t;
            self.nodes[x].nbits = n;
            let p = self.nodes[x].parent;
            self.refresh_path(p);
        }
    }

    fn grow(&mut self, v: VertexId) {
        while self.leaf.len() <= v {
            let x = self.leaf.len();
            let l = self.alloc(NodeKind::Leaf);
            self.nodes[l].vertex = x;
            self.nodes[l].nl = 1;
            self.leaf.push(l);
            self.graph.ensure_vertex(x);
            let r = self.new_super(0);
            self.insert_items(r, &[l]);
        }
    }

    /// Child items of cluster `c`.
    pub(crate) fn items_of(&self, c: usize) -> Vec<usize> {
        if self.layout == Layout::Flat {
            return self.nodes[c].children.iter().copied().collect();
        }
        let mut out = Vec::new();
        let mut stack = vec![self.nodes[c].right, self.nodes[c].left];
        while let Some(x) = stack.pop() {
            if x == NIL {
                continue;
            }
            if self.is_item(x) {
                out.push(x);
            } else {
                stack.push(self.nodes[x].right);
                stack.push(self.nodes[x].left);
            }
        }
        out
    }

    fn insert_items(&mut self, c: usize, xs: &[usize]) {
        match self.layout {
            Layout::Flat => {
                let mut total = 0;
                for &x in xs {
                    self.nodes[c].children.insert(x);
                    self.nodes[x].parent = c;
                    total += self.nodes[x].nl as isize;
                }
                self.add_nl(c, total);
            }
            Layout::Local => {
                self.host_insert(c, xs);
                self.refresh_path(c);
            }
            Layout::Lazy { .. } => {
                for &x in xs {
                    self.lazy_insert_item(c, x);
                }
                self.refresh_path(c);
            }
        }
    }

    fn remove_items(&mut self, c: usize, xs: &[usize]) {
        match self.layout {
            Layout::Flat => {
                let mut total = 0;
                for &x in xs {
                    self.nodes[c].children.remove(&x);
                    self.nodes[x].parent = NIL;
                    total += self.nodes[x].nl as isize;
                }
                self.add_nl(c, -total);
            }
            Layout::Local => {
                self.host_remove(c, xs);
                self.refresh_path(c);
            }
            Layout::Lazy { .. } => {
                for &x in xs {
                    self.lazy_remove_item(c, x);
                }
                self.refresh_path(c);
            }
        }
    }

    /// Move everything below detached super `donor` into `target` and free
    /// `donor`.
    fn absorb(&mut self, target: usize, donor: usize) {
        match self.layout {
            Layout::Flat => {
                let kids = std::mem::take(&mut self.nodes[donor].children);
                for &k in &kids {
                    self.nodes[k].parent = target;
                }
                self.nodes[target].children.extend(kids);
                let nl = self.nodes[donor].nl as isize;
                self.add_nl(target, nl);
            }
            Layout::Local => {
                let roots = self.collect_roots(donor);
                self.host_insert(target, &roots);
                self.refresh_path(target);
            }
            Layout::Lazy { .. } => {
                self.lazy_absorb(target, donor);
                self.refresh_path(target);
            }
        }
        self.release(donor);
    }

    fn insert_tree_edge(&mut self, u: VertexId, v: VertexId) {
        let ru = self.top(self.leaf[u]);
        let rv = self.top(self.leaf[v]);
        let (keep, gone) = if self.nodes[ru].nl < self.nodes[rv].nl {
            (rv, ru)
        } else {
            (ru, rv)
        };
        self.absorb(keep, gone);
    }

    fn tree_neighbors_from(&self, x: VertexId, min_level: usize) -> Vec<VertexId> {
        let adj = self.graph.adjacency();
        let mut out = Vec::new();
        for j in min_level..adj.level_count(x) {
            out.extend(adj.collect_neighbors(x, j, EdgeKind::Tree));
        }
        out
    }

    /// Split by alternating vertex searches over tree edges of level >= i
    /// from `u` and `v`; the side with fewer vertices wins, `u`'s on a tie.
    fn vertex_side(&mut self, c: usize, i: usize, u: VertexId, v: VertexId) -> Side {
        self.marks_a.clear();
        self.marks_b.clear();
        self.marks_a.set(u);
        self.marks_b.set(v);
        let mut seen_a = vec![u];
        let mut seen_b = vec![v];
        let (mut qa, mut qb) = (0usize, 0usize);
        let mut turn_a = true;
        let pick_a = loop {
            let a_done = qa == seen_a.len();
            let b_done = qb == seen_b.len();
            if a_done && seen_a.len() <= seen_b.len() {
                break true;
            }
            if b_done && seen_b.len() < seen_a.len() {
                break false;
            }
            if !a_done && (b_done || turn_a) {
                let x = seen_a[qa];
                qa += 1;
                for y in self.tree_neighbors_from(x, i) {
                    if !self.marks_a.get(y) {
                        self.marks_a.set(y);
                        seen_a.push(y);
                    }
                }
            } else {
                let x = seen_b[qb];
                qb += 1;
                for y in self.tree_neighbors_from(x, i) {
                    if !self.marks_b.get(y) {
                        self.marks_b.set(y);
                        seen_b.push(y);
                    }
                }
            }
            turn_a = !turn_a;
        };
        let mut side = if pick_a { seen_a } else { seen_b };
        side.sort_unstable();
        // marks_a now holds exactly the chosen side
        self.marks_a.clear();
        let mut items = Vec::new();
        self.marks_b.clear();
        for &x in &side {
            self.marks_a.set(x);
            let it = self.item_under(self.leaf[x], c);
            if !self.marks_b.get(it) {
                self.marks_b.set(it);
                items.push(it);
            }
        }
        Side {
            items,
            vertices: Some(side),
        }
    }

    fn bits(&self, x: usize, tree: bool) -> u64 {
        if tree || self.merged() {
            self.nodes[x].tbits
        } else {
            self.nodes[x].nbits
        }
    }

    /// Leaves below `x` whose bitmap has bit `i` of the requested kind.
    fn leaves_with_bit(&mut self, x: usize, i: usize, tree: bool) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            if y == NIL {
                continue;
            }
            self.node_visits += 1;
            if self.bits(y, tree) >> i & 1 == 0 {
                continue;
            }
            if self.nodes[y].kind == NodeKind::Leaf {
                out.push(y);
            } else {
                stack.push(self.nodes[y].right);
                stack.push(self.nodes[y].left);
            }
        }
        out
    }

    /// Level-i tree neighbours of the leaves in item `it`.
    fn item_tree_edges(&mut self, it: usize, i: usize) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for l in self.leaves_with_bit(it, i, true) {
            let x = self.nodes[l].vertex;
            for y in self
                .graph
                .adjacency()
                .collect_neighbors(x, i, EdgeKind::Tree)
            {
                out.push((x, y));
            }
        }
        out
    }

    /// Split by alternating searches over the items of `c` joined by
    /// level-i tree edges, measuring sides in leaves.
    fn item_side(&mut self, c: usize, i: usize, u: VertexId, v: VertexId) -> Side {
        let ia = self.item_under(self.leaf[u], c);
        let ib = self.item_under(self.leaf[v], c);
        self.marks_a.clear();
        self.marks_b.clear();
        self.marks_a.set(ia);
        self.marks_b.set(ib);
        let mut seen_a = vec![ia];
        let mut seen_b = vec![ib];
        let mut na = self.nodes[ia].nl;
        let mut nb = self.nodes[ib].nl;
        let (mut qa, mut qb) = (0usize, 0usize);
        let mut turn_a = true;
        let pick_a = loop {
            let a_done = qa == seen_a.len();
            let b_done = qb == seen_b.len();
            if a_done && na <= nb {
                break true;
            }
            if b_done && nb < na {
                break false;
            }
            let step_a = !a_done && (b_done || turn_a);
            let it = if step_a {
                qa += 1;
                seen_a[qa - 1]
            } else {
                qb += 1;
                seen_b[qb - 1]
            };
            for (_, y) in self.item_tree_edges(it, i) {
                let iy = self.item_under(self.leaf[y], c);
                let (marks, seen, count) = if step_a {
                    (&mut self.marks_a, &mut seen_a, &mut na)
                } else {
                    (&mut self.marks_b, &mut seen_b, &mut nb)
                };
                if !marks.get(iy) {
                    marks.set(iy);
                    seen.push(iy);
                    *count += self.nodes[iy].nl;
                }
            }
            turn_a = !turn_a;
        };
        Side {
            items: if pick_a { seen_a } else { seen_b },
            vertices: None,
        }
    }

    fn promote(&mut self, k: EdgeKey, i: usize) {
        let moved = self.graph.promote_edge(k, i + 1).expect("edge recorded");
        debug_assert!(moved, "level cap reached");
        self.touch(k.a());
        self.touch(k.b());
    }

    /// Merge detached level-(i+1) items into one cluster node.
    fn merge_items(&mut self, items: &[usize], level: usize) -> usize {
        if items.len() == 1 {
            return items[0];
        }
        let base = items
            .iter()
            .copied()
            .filter(|&x| self.nodes[x].kind == NodeKind::Super)
            .max_by_key(|&x| (self.nodes[x].nl, std::cmp::Reverse(x)));
        let base = match base {
            Some(b) => b,
            None => self.new_super(level),
        };
        let mut leaves = Vec::new();
        for &x in items {
            if x == base {
                continue;
            }
            if self.nodes[x].kind == NodeKind::Super {
                self.absorb(base, x);
            } else {
                leaves.push(x);
            }
        }
        self.insert_items(base, &leaves);
        base
    }

    /// Scan level-i non-tree edges of the side held by detached node `n`.
    fn scan(&mut self, n: usize, i: usize, vertices: Option<&[VertexId]>) -> Option<EdgeKey> {
        let order: Vec<VertexId> = match vertices {
            Some(vs) => vs.to_vec(),
            None => {
                let mut vs: Vec<VertexId> = self
                    .leaves_with_bit(n, i, false)
                    .into_iter()
                    .map(|l| self.nodes[l].vertex)
                    .collect();
                vs.sort_unstable();
                vs
            }
        };
        for x in order {
            let cand = self
                .graph
                .adjacency()
                .collect_neighbors(x, i, EdgeKind::NonTree);
            for y in cand {
                let k = EdgeKey::new(x, y).expect("distinct endpoints");
                let inside = match vertices {
                    Some(_) => self.marks_a.get(y),
                    None => self.top(self.leaf[y]) == n,
                };
                if !inside {
                    return Some(k);
                }
                self.promote(k, i);
            }
        }
        None
    }

    fn delete_tree_edge(&mut self, key: EdgeKey, top_level: usize) -> UpdateOutcome {
        let (u, v) = (key.a(), key.b());
        self.touch(u);
        self.touch(v);
        let mut c = self.cluster_at(self.leaf[u], top_level);
        for i in (0..=top_level).rev() {
            let side = if self.layout == Layout::Flat {
                self.vertex_side(c, i, u, v)
            } else {
                self.item_side(c, i, u, v)
            };
            let mut promote = Vec::new();
            match &side.vertices {
                Some(vs) => {
                    for &x in vs {
                        for y in self
                            .graph
                            .adjacency()
                            .collect_neighbors(x, i, EdgeKind::Tree)
                        {
                            if x < y {
                                promote.push(EdgeKey::new(x, y).expect("distinct"));
                            }
                        }
                    }
                }
                None => {
                    for &it in &side.items {
                        for (x, y) in self.item_tree_edges(it, i) {
                            if x < y {
                                promote.push(EdgeKey::new(x, y).expect("distinct"));
                            }
                        }
                    }
                }
            }
            self.remove_items(c, &side.items);
            for k in promote {
                self.promote(k, i);
            }
            let n = self.merge_items(&side.items, i + 1);
            if let Some(rep) = self.scan(n, i, side.vertices.as_deref()) {
                self.graph
                    .set_kind(rep, EdgeKind::Tree)
                    .expect("edge recorded");
                self.touch(rep.a());
                self.touch(rep.b());
                self.insert_items(c, &[n]);
                return UpdateOutcome::SplitReconnected(rep);
            }
            if i == 0 {
                let r = self.new_super(0);
                self.insert_items(r, &[n]);
                return UpdateOutcome::SplitPermanent;
            }
            let p = self.cluster_parent(c);
            self.remove_items(p, &[c]);
            let rest = self.items_of(c);
            let c2 = if rest.len() == 1 && self.nodes[rest[0]].kind == NodeKind::Leaf {
                self.remove_items(c, &rest);
                self.release(c);
                rest[0]
            } else {
                c
            };
            let cs = if self.nodes[n].kind == NodeKind::Leaf {
                n
            } else {
                let s = self.new_super(i);
                self.insert_items(s, &[n]);
                s
            };
            self.insert_items(p, &[c2, cs]);
            c = p;
        }
        unreachable!("level 0 always resolves")
    }

    /// Root node of `u`'s hierarchy.
    pub fn find_root(&self, u: VertexId) -> Option<usize> {
        self.leaf.get(u).map(|&l| self.top(l))
    }

    /// Vertices below hierarchy node `x`, ascending.
    pub fn leaves_below(&self, x: usize) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            if y == NIL {
                continue;
            }
            let n = &self.nodes[y];
            if n.kind == NodeKind::Leaf {
                out.push(n.vertex);
            } else if self.layout == Layout::Flat {
                stack.extend(n.children.iter().copied());
            } else {
                stack.push(n.left);
                stack.push(n.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Level of the cluster directly holding `u`'s leaf, or `None` for an
    /// unknown vertex.
    pub fn leaf_level(&self, u: VertexId) -> Option<usize> {
        let l = *self.leaf.get(u)?;
        Some(self.nodes[self.cluster_parent(l)].level + 1)
    }
}

impl ConnectivityStructure for ClusterForest {
    fn name(&self) -> &'static str {
        self.name
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<UpdateOutcome, GraphError> {
        let key = EdgeKey::new(u, v)?;
        self.grow(key.b());
        if self.graph.contains(key) {
            return Ok(UpdateOutcome::DuplicateIgnored);
        }
        let out = if self.top(self.leaf[u]) == self.top(self.leaf[v]) {
            self.graph.record_edge(key, 0, EdgeKind::NonTree)?;
            UpdateOutcome::NewNonTreeEdge
        } else {
            self.graph.record_edge(key, 0, EdgeKind::Tree)?;
            self.insert_tree_edge(u, v);
            UpdateOutcome::NewTreeEdge
        };
        self.touch(u);
        self.touch(v);
        Ok(out)
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
                self.touch(u);
                self.touch(v);
                UpdateOutcome::NonTreeRemoved
            }
            EdgeKind::Tree => self.delete_tree_edge(key, rec.level),
        }
    }

    fn component_id(&mut self, u: VertexId) -> Option<usize> {
        self.find_root(u)
    }

    fn ensure_vertex(&mut self, v: VertexId) {
        self.grow(v);
    }

    fn graph(&self) -> &GraphModel {
        &self.graph
    }

    fn node_count(&self) -> usize {
        self.live_nodes()
    }

    fn max_height(&mut self) -> usize {
        self.leaf.iter().map(|&l| self.depth(l)).max().unwrap_or(0)
    }

    fn memory_bytes(&self, m: &MemoryModel) -> u64 {
        self.memory(m)
    }

    fn audit(&mut self) -> Result<(), String> {
        self.full_audit()
    }

    fn shape_audit(&mut self) -> Result<(), String> {
        self.audit_shape()
    }
}

#[cfg(test)]
mod tests;
