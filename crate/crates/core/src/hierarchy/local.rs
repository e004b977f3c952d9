//! Local trees: a host node keeps its children as rank trees hung off a
//! spine of connecting nodes, larger ranks nearer the host.

use std::collections::BTreeMap;

use crate::util::floor_log2;

use super::{ClusterForest, Layout, NodeKind, NIL};

impl ClusterForest {
    pub(crate) fn rank(&self, x: usize) -> usize {
        floor_log2(self.nodes[x].nl)
    }

    fn set_children(&mut self, p: usize, l: usize, r: usize) {
        self.nodes[p].left = l;
        self.nodes[p].right = r;
        for c in [l, r] {
            if c != NIL {
                self.nodes[c].parent = p;
            }
        }
        self.recompute(p);
    }

    /// Detach the rank roots below host `h`, freeing its connecting nodes.
    pub(crate) fn collect_roots(&mut self, h: usize) -> Vec<usize> {
        let (l, r) = (self.nodes[h].left, self.nodes[h].right);
        self.nodes[h].left = NIL;
        self.nodes[h].right = NIL;
        let mut roots = Vec::new();
        if r != NIL {
            roots.push(r);
        }
        let mut x = l;
        while x != NIL {
            if self.nodes[x].kind == NodeKind::Connecting {
                let (cl, cr) = (self.nodes[x].left, self.nodes[x].right);
                roots.push(cr);
                self.release(x);
                x = cl;
            } else {
                roots.push(x);
                break;
            }
        }
        for &x in &roots {
            self.nodes[x].parent = NIL;
        }
        roots
    }

    /// Pair equal ranks until all ranks are distinct; ascending rank order.
    fn carry_pair(&mut self, roots: Vec<usize>) -> Vec<usize> {
        let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in roots {
            buckets.entry(self.rank(x)).or_default().push(x);
        }
        let mut out = Vec::new();
        while let Some((_, mut b)) = buckets.pop_first() {
            b.sort_by_key(|&x| (self.nodes[x].nl, x));
            let mut it = b.into_iter();
            loop {
                match (it.next(), it.next()) {
                    (Some(x), Some(y)) => {
                        let p = self.alloc(NodeKind::RankRoot);
                        self.set_children(p, x, y);
                        buckets.entry(self.rank(p)).or_default().push(p);
                    }
                    (Some(x), None) => {
                        out.push(x);
                        break;
                    }
                    _ => break,
                }
            }
        }
        out
    }

    /// Hang rank roots (ascending, distinct ranks) below host `h`.
    fn construct(&mut self, h: usize, s: &[usize]) {
        match s.len() {
            0 => self.set_children(h, NIL, NIL),
            1 => self.set_children(h, s[0], NIL),
            2 => self.set_children(h, s[0], s[1]),
            k => {
                let mut cur = self.alloc(NodeKind::Connecting);
                self.set_children(cur, s[0], s[1]);
                for &x in &s[2..k - 1] {
                    let c = self.alloc(NodeKind::Connecting);
                    self.set_children(c, cur, x);
                    cur = c;
                }
                self.set_children(h, cur, s[k - 1]);
            }
        }
    }

    fn build(&mut self, h: usize, roots: Vec<usize>) {
        let sorted = self.carry_pair(roots);
        self.construct(h, &sorted);
    }

    pub(crate) fn host_insert(&mut self, h: usize, xs: &[usize]) {
        let mut roots = self.collect_roots(h);
        roots.extend_from_slice(xs);
        self.build(h, roots);
    }

    /// Remove items from host `h`, dissolving the rank-tree nodes above
    /// each one; their other children become rank roots again.
    pub(crate) fn host_remove(&mut self, h: usize, xs: &[usize]) {
        let mut roots = self.collect_roots(h);
        for &x in xs {
            let mut child = x;
            let mut p = self.nodes[x].parent;
            while p != NIL {
                let n = &self.nodes[p];
                let sib = if n.left == child { n.right } else { n.left };
                let up = n.parent;
                self.nodes[sib].parent = NIL;
                roots.push(sib);
                self.release(p);
                child = p;
                p = up;
            }
            self.nodes[x].parent = NIL;
        }
        roots.retain(|&r| {
            self.nodes[r].kind != NodeKind::Free && self.nodes[r].parent == NIL && !xs.contains(&r)
        });
        self.build(h, roots);
    }

    /// Host node (super, buffer, lazy or bottom root) holding `x`.
    pub(crate) fn host_of(&self, x: usize) -> usize {
        let mut p = self.nodes[x].parent;
        while matches!(
            self.nodes[p].kind,
            NodeKind::RankRoot | NodeKind::Connecting
        ) {
            p = self.nodes[p].parent;
        }
        p
    }

    /// Free host `h` and every non-item node under it; return the items.
    fn dissolve_host(&mut self, h: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.nodes[h].right, self.nodes[h].left];
        while let Some(x) = stack.pop() {
            if x == NIL {
                continue;
            }
            if self.is_item(x) {
                self.nodes[x].parent = NIL;
                out.push(x);
            } else {
                stack.push(self.nodes[x].right);
                stack.push(self.nodes[x].left);
                self.release(x);
            }
        }
        self.release(h);
        out
    }

    fn beta(&self) -> usize {
        match self.layout {
            Layout::Lazy { beta } => beta,
            _ => usize::MAX,
        }
    }

    fn lazy_branch(&mut self, s: usize) -> usize {
        if self.nodes[s].right == NIL {
            let z = self.alloc(NodeKind::LazyRoot);
            self.nodes[s].right = z;
            self.nodes[z].parent = s;
        }
        self.nodes[s].right
    }

    fn lazy_insert_roots(&mut self, s: usize, xs: &[usize]) {
        if xs.is_empty() {
            return;
        }
        let z = self.lazy_branch(s);
        self.host_insert(z, xs);
    }

    /// Put a small item into the buffer; a full buffer becomes a bottom tree
    /// of the lazy branch.
    fn buffer_insert(&mut self, s: usize, x: usize) {
        if self.nodes[s].left == NIL {
            let b = self.alloc(NodeKind::BufferRoot);
            self.nodes[s].left = b;
            self.nodes[b].parent = s;
        }
        let b = self.nodes[s].left;
        self.host_insert(b, &[x]);
        if self.nodes[b].nl >= self.beta() {
            self.nodes[s].left = NIL;
            self.nodes[b].parent = NIL;
            self.nodes[b].kind = NodeKind::BottomRoot;
            self.lazy_insert_roots(s, &[b]);
        }
    }

    pub(crate) fn lazy_insert_item(&mut self, s: usize, x: usize) {
        if self.nodes[x].nl >= self.beta() {
            self.lazy_insert_roots(s, &[x]);
        } else {
            self.buffer_insert(s, x);
        }
    }

    fn drop_if_empty(&mut self, h: usize, s: usize) {
        if self.nodes[h].left == NIL && self.nodes[h].right == NIL {
            if self.nodes[s].left == h {
                self.nodes[s].left = NIL;
            } else if self.nodes[s].right == h {
                self.nodes[s].right = NIL;
            }
            self.release(h);
        }
    }

    pub(crate) fn lazy_remove_item(&mut self, s: usize, x: usize) {
        let h = self.host_of(x);
        match self.nodes[h].kind {
            NodeKind::BottomRoot => {
                self.host_remove(h, &[x]);
                let z = self.host_of(h);
                self.host_remove(z, &[h]);
                if self.nodes[h].nl >= self.beta() {
                    self.host_insert(z, &[h]);
                } else {
                    for unit in self.dissolve_host(h) {
                        self.buffer_insert(s, unit);
                    }
                }
                self.drop_if_empty(z, s);
            }
            _ => {
                self.host_remove(h, &[x]);
                self.drop_if_empty(h, s);
            }
        }
    }

    /// Move lazy rank roots and buffered items of `donor` into `target`.
    pub(crate) fn lazy_absorb(&mut self, target: usize, donor: usize) {
        let z = self.nodes[donor].right;
        if z != NIL {
            let roots = self.collect_roots(z);
            self.release(z);
            self.lazy_insert_roots(target, &roots);
        }
        let b = self.nodes[donor].left;
        if b != NIL {
            for unit in self.dissolve_host(b) {
                self.buffer_insert(target, unit);
            }
        }
        self.nodes[donor].left = NIL;
        self.nodes[donor].right = NIL;
    }
}
