//! Structural self-checks and the memory estimate.

use std::collections::BTreeMap;

use crate::graph::{AdjacencyMode, EdgeKind};
use crate::memory::MemoryModel;
use crate::util::floor_log2;

use super::{ClusterForest, Layout, NodeKind, NIL};

/// Union-find over vertices.
struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Worst-case counters from [`ClusterForest::shape_report`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShapeReport {
    pub height: usize,
    /// Largest number of rank roots under one host.
    pub max_rank_roots: usize,
    pub max_rank_tree_height: usize,
}

impl ClusterForest {
    fn children_of(&self, x: usize) -> Vec<usize> {
        let n = &self.nodes[x];
        if self.layout == Layout::Flat {
            n.children.iter().copied().collect()
        } else {
            [n.left, n.right]
                .into_iter()
                .filter(|&c| c != NIL)
                .collect()
        }
    }

    fn is_host(&self, x: usize) -> bool {
        match self.nodes[x].kind {
            NodeKind::Super => self.layout == Layout::Local,
            NodeKind::LazyRoot | NodeKind::BufferRoot | NodeKind::BottomRoot => true,
            _ => false,
        }
    }

    /// Rank roots hanging below host `h`, read without modification.
    fn rank_roots(&self, h: usize) -> Vec<usize> {
        let mut roots = Vec::new();
        let (l, r) = (self.nodes[h].left, self.nodes[h].right);
        if r != NIL {
            roots.push(r);
        }
        let mut x = l;
        while x != NIL {
            if self.nodes[x].kind == NodeKind::Connecting {
                roots.push(self.nodes[x].right);
                x = self.nodes[x].left;
            } else {
                roots.push(x);
                break;
            }
        }
        roots
    }

    /// Nodes of the local tree of host `h` with their depth below `h`,
    /// stopping at items and nested hosts (which are included).
    fn local_nodes(&self, h: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut stack: Vec<(usize, usize)> =
            self.children_of(h).into_iter().map(|c| (c, 1)).collect();
        while let Some((x, d)) = stack.pop() {
            out.push((x, d));
            if !self.is_item(x) && !self.is_host(x) {
                for c in self.children_of(x) {
                    stack.push((c, d + 1));
                }
            }
        }
        out
    }

    pub fn shape_report(&self) -> ShapeReport {
        let mut rep = ShapeReport {
            height: self.leaf.iter().map(|&l| self.depth(l)).max().unwrap_or(0),
            ..Default::default()
        };
        if self.layout == Layout::Flat {
            return rep;
        }
        for h in 0..self.nodes.len() {
            if self.nodes[h].kind == NodeKind::Free || !self.is_host(h) {
                continue;
            }
            let roots = self.rank_roots(h);
            rep.max_rank_roots = rep.max_rank_roots.max(roots.len());
            for r in roots {
                rep.max_rank_tree_height = rep.max_rank_tree_height.max(self.rank_tree_height(r));
            }
        }
        rep
    }

    fn rank_tree_height(&self, r: usize) -> usize {
        if self.nodes[r].kind != NodeKind::RankRoot {
            return 0;
        }
        1 + self
            .children_of(r)
            .into_iter()
            .map(|c| self.rank_tree_height(c))
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn full_audit(&self) -> Result<(), String> {
        self.audit_links()?;
        self.audit_clusters()?;
        self.audit_shape()
    }

    pub(crate) fn audit_shape(&self) -> Result<(), String> {
        let n = self.leaf.len();
        if self.layout == Layout::Flat {
            let bound = floor_log2(n) + 1;
            for &l in &self.leaf {
                if self.depth(l) > bound {
                    return Err(format!("leaf depth {} above {bound}", self.depth(l)));
                }
            }
        } else {
            self.audit_local()?;
        }
        Ok(())
    }

    /// Parent/child symmetry, leaf counts and bitmaps.
    fn audit_links(&self) -> Result<(), String> {
        let mut seen_leaves = 0;
        for x in 0..self.nodes.len() {
            let node = &self.nodes[x];
            if node.kind == NodeKind::Free {
                continue;
            }
            if node.parent != NIL {
                let p = &self.nodes[node.parent];
                let linked = if self.layout == Layout::Flat {
                    p.children.contains(&x)
                } else {
                    p.left == x || p.right == x
                };
                if p.kind == NodeKind::Free || !linked {
                    return Err(format!("node {x} missing from its parent"));
                }
            }
            let kids = self.children_of(x);
            for &c in &kids {
                if self.nodes[c].parent != x {
                    return Err(format!("child {c} of {x} points elsewhere"));
                }
            }
            match node.kind {
                NodeKind::Leaf => {
                    seen_leaves += 1;
                    if node.parent == NIL {
                        return Err(format!("leaf {x} has no root"));
                    }
                    if node.nl != 1 || self.leaf[node.vertex] != x {
                        return Err(format!("leaf {x} is inconsistent"));
                    }
                    if self.layout != Layout::Flat
                        && (node.tbits, node.nbits) != self.leaf_bits(node.vertex)
                    {
                        return Err(format!("bitmap of leaf {} is stale", node.vertex));
                    }
                }
                _ => {
                    let nl: usize = kids.iter().map(|&c| self.nodes[c].nl).sum();
                    if nl != node.nl {
                        return Err(format!("nl of {x} is {} expected {nl}", node.nl));
                    }
                    if nl == 0 {
                        return Err(format!("empty node {x} ({:?})", node.kind));
                    }
                    if self.layout != Layout::Flat {
                        let t = kids.iter().fold(0, |a, &c| a | self.nodes[c].tbits);
                        let b = kids.iter().fold(0, |a, &c| a | self.nodes[c].nbits);
                        if (t, b) != (node.tbits, node.nbits) {
                            return Err(format!("bitmap of {x} is not the OR of its children"));
                        }
                    }
                }
            }
            if node.kind == NodeKind::Super && node.parent == NIL && node.level != 0 {
                return Err(format!("root {x} has level {}", node.level));
            }
        }
        if seen_leaves != self.leaf.len() {
            return Err("leaf count differs from the vertex count".into());
        }
        Ok(())
    }

    /// Every level-i super node holds exactly one component of the tree
    /// edges with level >= i, and its super children sit at level i + 1.
    fn audit_clusters(&self) -> Result<(), String> {
        let n = self.leaf.len();
        let recs = self.graph.sorted_edges();
        let max_level = recs.iter().map(|r| r.level).max().unwrap_or(0) + 1;
        let mut dsu: Vec<Dsu> = (0..=max_level).map(|_| Dsu::new(n)).collect();
        for r in recs.iter().filter(|r| r.kind == EdgeKind::Tree) {
            for d in dsu.iter_mut().take(r.level + 1) {
                d.union(r.key.a(), r.key.b());
            }
        }
        let mut comp_size: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); dsu.len()];
        for (i, d) in dsu.iter_mut().enumerate() {
            for v in 0..n {
                *comp_size[i].entry(d.find(v)).or_default() += 1;
            }
        }
        for r in recs.iter().filter(|r| r.kind == EdgeKind::NonTree) {
            let d = &mut dsu[r.level];
            if d.find(r.key.a()) != d.find(r.key.b()) {
                return Err(format!(
                    "non-tree edge {} leaves its level-{} cluster",
                    r.key, r.level
                ));
            }
        }
        for x in 0..self.nodes.len() {
            let node = &self.nodes[x];
            if node.kind != NodeKind::Super {
                continue;
            }
            let cp = self.cluster_parent(x);
            if cp != NIL && self.nodes[cp].level + 1 != node.level {
                return Err(format!(
                    "super {x} at level {} under level {}",
                    node.level, self.nodes[cp].level
                ));
            }
            let i = node.level;
            let leaves = self.leaves_below(x);
            if i >= dsu.len() {
                if leaves.len() > 1 {
                    return Err(format!("super {x} at level {i} spans several vertices"));
                }
                continue;
            }
            let d = &mut dsu[i];
            let rep = d.find(leaves[0]);
            if leaves.iter().any(|&v| d.find(v) != rep) || comp_size[i][&rep] != leaves.len() {
                return Err(format!("super {x} at level {i} is not a level-{i} cluster"));
            }
        }
        for v in 0..n {
            let l = self.leaf[v];
            let below = self.nodes[self.cluster_parent(l)].level + 1;
            if below < dsu.len() {
                let r = dsu[below].find(v);
                if comp_size[below][&r] != 1 {
                    return Err(format!("vertex {v} should sit in a level-{below} cluster"));
                }
            }
        }
        Ok(())
    }

    fn audit_local(&self) -> Result<(), String> {
        let lazy = matches!(self.layout, Layout::Lazy { .. });
        for h in 0..self.nodes.len() {
            let kind = self.nodes[h].kind;
            if kind == NodeKind::Free {
                continue;
            }
            if lazy && kind == NodeKind::Super {
                let (b, z) = (self.nodes[h].left, self.nodes[h].right);
                if b != NIL && self.nodes[b].kind != NodeKind::BufferRoot
                    || z != NIL && self.nodes[z].kind != NodeKind::LazyRoot
                {
                    return Err(format!("lazy super {h} has misplaced branches"));
                }
                if let Layout::Lazy { beta } = self.layout {
                    if b != NIL && self.nodes[b].nl >= beta {
                        return Err(format!("buffer of {h} holds {} leaves", self.nodes[b].nl));
                    }
                }
                let rs = floor_log2(self.nodes[h].nl);
                let mut stack = vec![(h, 0usize)];
                while let Some((x, d)) = stack.pop() {
                    if x != h {
                        let bound = rs + 3 - floor_log2(self.nodes[x].nl);
                        if d > bound {
                            return Err(format!("node {x} at depth {d} below lazy super {h}"));
                        }
                        if self.is_item(x) {
                            continue;
                        }
                    }
                    for c in self.children_of(x) {
                        stack.push((c, d + 1));
                    }
                }
                continue;
            }
            if !self.is_host(h) {
                continue;
            }
            let rh = floor_log2(self.nodes[h].nl);
            for (x, d) in self.local_nodes(h) {
                let bound = rh + 1 - floor_log2(self.nodes[x].nl);
                if d > bound {
                    return Err(format!(
                        "node {x} at depth {d} exceeds bound {bound} under {h}"
                    ));
                }
            }
            let roots = self.rank_roots(h);
            let ranks: Vec<usize> = roots.iter().map(|&r| self.rank(r)).collect();
            if ranks.windows(2).any(|w| w[0] <= w[1]) {
                // collected from the host down, so ranks must strictly decrease
                return Err(format!("rank roots under {h} are not strictly ordered"));
            }
            if roots.len() > floor_log2(self.nodes[h].nl + 1) {
                return Err(format!("{} rank roots under {h}", roots.len()));
            }
            for r in roots {
                self.audit_rank_tree(r, self.rank(r), 0)?;
            }
        }
        Ok(())
    }

    /// Depth inside a rank tree equals the rank difference to its root.
    fn audit_rank_tree(&self, x: usize, root_rank: usize, depth: usize) -> Result<(), String> {
        if depth + self.rank(x) != root_rank {
            return Err(format!(
                "rank-tree node {x} at depth {depth} has rank {}",
                self.rank(x)
            ));
        }
        if self.nodes[x].kind == NodeKind::RankRoot {
            let (l, r) = (self.nodes[x].left, self.nodes[x].right);
            if l == NIL || r == NIL || self.rank(l) != self.rank(r) {
                return Err(format!("pair {x} joins unequal ranks"));
            }
            self.audit_rank_tree(l, root_rank, depth + 1)?;
            self.audit_rank_tree(r, root_rank, depth + 1)?;
        }
        Ok(())
    }

    pub(crate) fn memory(&self, m: &MemoryModel) -> u64 {
        let mut total = 0;
        for node in &self.nodes {
            total += match (node.kind, self.layout) {
                (NodeKind::Free, _) => 0,
                // parent link; key, nl, level
                (NodeKind::Leaf, Layout::Flat) => m.node(1, 3, 0),
                (_, Layout::Flat) => m.node(1, 3, 0) + m.set(node.children.len()),
                // left, right, parent; key, nl, rank, kind; bitmaps
                _ if self.graph.adjacency().mode() == AdjacencyMode::Merged => m.node(3, 4, 1),
                _ => m.node(3, 4, 2),
            };
        }
        total + adjacency_bytes(self, m)
    }
}

/// Per-vertex level maps of neighbour sets, counting only non-empty slots.
fn adjacency_bytes(f: &ClusterForest, m: &MemoryModel) -> u64 {
    let adj = f.graph.adjacency();
    let n = f.leaf.len();
    let mut t_levels = vec![0usize; n];
    let mut nt_levels = vec![0usize; n];
    let mut any_levels = vec![0usize; n];
    let mut sets = 0;
    let merged = adj.mode() == AdjacencyMode::Merged;
    adj.for_each_slot(|u, _, t, nt| {
        any_levels[u] += 1;
        if merged {
            sets += m.map(t + nt);
        } else {
            if t > 0 {
                t_levels[u] += 1;
                sets += m.set(t);
            }
            if nt > 0 {
                nt_levels[u] += 1;
                sets += m.set(nt);
            }
        }
    });
    let mut maps = 0;
    for u in 0..n {
        if any_levels[u] == 0 {
            continue;
        }
        maps += if merged {
            m.map(any_levels[u])
        } else {
            m.map(t_levels[u]) + m.map(nt_levels[u])
        };
    }
    sets + maps
}
