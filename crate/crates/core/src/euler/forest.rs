//! Euler tours of one spanning forest, one treap per tree.
//!
//! A tree with k vertices is stored as the closed walk of 2k - 1 occurrences
//! that starts and ends at its root. Each tree edge remembers the two
//! directed traversals `(from, to)` it contributes to the walk.

use std::collections::HashMap;

use crate::graph::{EdgeKey, VertexId};

use super::treap::{Treap, NIL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Traversal {
    pub(crate) from: usize,
    pub(crate) to: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct EulerForest {
    pub(crate) treap: Treap,
    /// Active occurrence per vertex; `NIL` when the vertex is absent here.
    pub(crate) act: Vec<usize>,
    pub(crate) edges: HashMap<EdgeKey, [Traversal; 2]>,
    present: usize,
}

impl EulerForest {
    pub(crate) fn new(seed: u64) -> Self {
        EulerForest {
            treap: Treap::new(seed),
            act: Vec::new(),
            edges: HashMap::new(),
            present: 0,
        }
    }

    pub(crate) fn present_vertices(&self) -> usize {
        self.present
    }

    pub(crate) fn has(&self, v: VertexId) -> bool {
        self.act.get(v).is_some_and(|&a| a != NIL)
    }

    /// Give `v` a singleton tour if it has none yet.
    pub(crate) fn ensure(&mut self, v: VertexId) -> usize {
        if self.act.len() <= v {
            self.act.resize(v + 1, NIL);
        }
        if self.act[v] == NIL {
            self.act[v] = self.treap.alloc(v, true);
            self.present += 1;
        }
        self.act[v]
    }

    /// Treap root of `v`'s tour; `v` must be present.
    pub(crate) fn tour(&self, v: VertexId) -> usize {
        self.treap.root(self.act[v])
    }

    pub(crate) fn connected(&self, u: VertexId, v: VertexId) -> bool {
        self.has(u) && self.has(v) && self.tour(u) == self.tour(v)
    }

    /// Number of vertices in the tree holding `v`.
    pub(crate) fn tree_size(&self, v: VertexId) -> usize {
        self.treap.size(self.tour(v))
    }

    pub(crate) fn set_weight(&mut self, v: VertexId, w: usize) {
        let x = self.ensure(v);
        self.treap.nodes[x].own_w = w as u32;
        self.treap.update_path(x);
    }

    pub(crate) fn own_weight(&self, v: VertexId) -> usize {
        if self.has(v) {
            self.treap.nodes[self.act[v]].own_w as usize
        } else {
            0
        }
    }

    fn traversal_mut(&mut self, a: usize, b: usize) -> &mut [Traversal; 2] {
        let va = self.treap.nodes[a].vertex;
        let vb = self.treap.nodes[b].vertex;
        let key = EdgeKey::new(va, vb).expect("adjacent occurrences differ");
        self.edges
            .get_mut(&key)
            .expect("adjacent occurrences form a tree edge")
    }

    fn move_active(&mut self, from: usize, to: usize) {
        let w = self.treap.nodes[from].own_w;
        let v = self.treap.nodes[from].vertex;
        {
            let n = &mut self.treap.nodes[from];
            n.active = false;
            n.own_w = 0;
        }
        {
            let n = &mut self.treap.nodes[to];
            n.active = true;
            n.own_w = w;
        }
        self.act[v] = to;
        self.treap.update_path(from);
        self.treap.update_path(to);
    }

    /// Rotate `u`'s tour so that it starts and ends at `u`.
    pub(crate) fn reroot(&mut self, u: VertexId) {
        let ou = self.ensure(u);
        let t = self.treap.root(ou);
        let first = self.treap.first(t);
        if self.treap.nodes[first].vertex == u {
            return;
        }
        let total = self.treap.count(t);
        let last = self.treap.last(t);
        if self.treap.nodes[last].active {
            self.move_active(last, first);
        }
        let t = self.treap.root(ou);
        let (body, closing) = self.treap.split(t, total - 1);
        debug_assert_eq!(closing, last);
        let k = self.treap.index(ou);
        let (x, y) = self.treap.split(body, k);
        let a_last = self.treap.last(x);
        let b_last = self.treap.last(y);
        for tr in self.traversal_mut(b_last, last).iter_mut() {
            if tr.from == b_last && tr.to == last {
                tr.to = first;
            }
        }
        for tr in self.traversal_mut(a_last, ou).iter_mut() {
            if tr.from == a_last && tr.to == ou {
                tr.to = last;
            }
        }
        self.treap.nodes[last].vertex = u;
        self.treap.update(last);
        let yx = self.treap.merge(y, x);
        self.treap.merge(yx, last);
    }

    /// Join the trees of `u` and `v` with tree edge `key`.
    pub(crate) fn link(&mut self, key: EdgeKey, u: VertexId, v: VertexId) {
        debug_assert!(!self.connected(u, v));
        self.reroot(u);
        self.reroot(v);
        let tu = self.tour(u);
        let tv = self.tour(v);
        let u_last = self.treap.last(tu);
        let v_first = self.treap.first(tv);
        let v_last = self.treap.last(tv);
        let closing = self.treap.alloc(u, false);
        let m = self.treap.merge(tu, tv);
        self.treap.merge(m, closing);
        self.edges.insert(
            key,
            [
                Traversal {
                    from: u_last,
                    to: v_first,
                },
                Traversal {
                    from: v_last,
                    to: closing,
                },
            ],
        );
    }

    /// Remove tree edge `key`, leaving two tours.
    pub(crate) fn cut(&mut self, key: EdgeKey) {
        let [t1, t2] = self.edges.remove(&key).expect("cut of a linked edge");
        let (down, up) = if self.treap.index(t1.from) < self.treap.index(t2.from) {
            (t1, t2)
        } else {
            (t2, t1)
        };
        let (p, c1, p2) = (down.from, down.to, up.to);
        let root = self.treap.root(p);
        let (a, rest) = self.treap.split(root, self.treap.index(c1));
        let (_child, c) = self.treap.split(rest, self.treap.index(p2));
        let (dup, tail) = self.treap.split(c, 1);
        debug_assert_eq!(dup, p2);
        if tail != NIL {
            let q = self.treap.first(tail);
            for tr in self.traversal_mut(p2, q).iter_mut() {
                if tr.from == p2 {
                    tr.from = p;
                }
            }
        }
        self.treap.merge(a, tail);
        if self.treap.nodes[p2].active {
            self.move_active(p2, p);
        }
        self.treap.release(p2);
    }

    /// Forget `v` at this level if its tree is just itself.
    pub(crate) fn drop_singleton(&mut self, v: VertexId) -> bool {
        if !self.has(v) || self.treap.count(self.tour(v)) != 1 {
            return false;
        }
        let x = self.act[v];
        self.treap.release(x);
        self.act[v] = NIL;
        self.present -= 1;
        true
    }

    /// Vertices of the tree holding `v`, in tour order of their active
    /// occurrences.
    pub(crate) fn tree_vertices(&self, v: VertexId) -> Vec<VertexId> {
        self.treap
            .collect_active(self.tour(v), false)
            .into_iter()
            .map(|x| self.treap.nodes[x].vertex)
            .collect()
    }

    /// Vertex sequence of the tour holding `v`.
    pub(crate) fn tour_sequence(&self, v: VertexId) -> Vec<VertexId> {
        self.treap
            .in_order(self.tour(v))
            .into_iter()
            .map(|x| self.treap.nodes[x].vertex)
            .collect()
    }

    pub(crate) fn max_treap_height(&self) -> usize {
        let mut seen = vec![false; self.treap.nodes.len()];
        let mut best = 0;
        for &a in &self.act {
            if a == NIL {
                continue;
            }
            let r = self.treap.root(a);
            if !std::mem::replace(&mut seen[r], true) {
                best = best.max(self.treap.height(r));
            }
        }
        best
    }

    /// Decode every tour and check it against `expected` (the tree edges of
    /// this level). Also checks treap aggregates and traversal references.
    pub(crate) fn audit(&self, expected: &[EdgeKey]) -> Result<(), String> {
        let mut seen_tour = vec![false; self.treap.nodes.len()];
        let mut steps = 0usize;
        let mut decoded_edges = 0usize;
        for (v, &a) in self.act.iter().enumerate() {
            if a == NIL {
                continue;
            }
            let n = &self.treap.nodes[a];
            if !n.active || n.vertex != v {
                return Err(format!("act entry of {v} is not its active occurrence"));
            }
            let root = self.treap.root(a);
            if std::mem::replace(&mut seen_tour[root], true) {
                continue;
            }
            self.treap.audit_tree(root)?;
            let occ = self.treap.in_order(root);
            let verts: Vec<usize> = occ.iter().map(|&x| self.treap.nodes[x].vertex).collect();
            let mut distinct = verts.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let k = distinct.len();
            if occ.len() != 2 * k - 1 {
                return Err(format!(
                    "tour of {v} has {} occurrences for {k} vertices",
                    occ.len()
                ));
            }
            if verts[0] != verts[verts.len() - 1] {
                return Err(format!("tour of {v} is not closed"));
            }
            let actives = occ.iter().filter(|&&x| self.treap.nodes[x].active).count();
            if actives != k {
                return Err(format!(
                    "tour of {v} has {actives} active occurrences for {k} vertices"
                ));
            }
            // each step is a distinct occurrence pair, so matching a stored
            // traversal and having 2 steps per edge overall means every
            // traversal is used exactly once
            for w in occ.windows(2) {
                let (x, y) = (w[0], w[1]);
                let key = EdgeKey::new(self.treap.nodes[x].vertex, self.treap.nodes[y].vertex)
                    .map_err(|_| format!("tour of {v} repeats a vertex consecutively"))?;
                let trs = self
                    .edges
                    .get(&key)
                    .ok_or_else(|| format!("tour step {key} is not a tree edge"))?;
                if !trs.iter().any(|t| t.from == x && t.to == y) {
                    return Err(format!(
                        "traversal references of {key} do not match the tour"
                    ));
                }
                steps += 1;
            }
            decoded_edges += k - 1;
        }
        if steps != 2 * self.edges.len() || decoded_edges != self.edges.len() {
            return Err("decoded edge count differs from stored edges".into());
        }
        if expected.len() != self.edges.len()
            || expected.iter().any(|k| !self.edges.contains_key(k))
        {
            return Err("level forest differs from the expected tree edges".into());
        }
        Ok(())
    }
}
