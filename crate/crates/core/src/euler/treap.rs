//! Arena treap over tour occurrences, ordered by position in the tour.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) const NIL: usize = usize::MAX;

#[derive(Clone, Debug)]
pub(crate) struct EtNode {
    pub(crate) vertex: usize,
    pub(crate) left: usize,
    pub(crate) right: usize,
    pub(crate) parent: usize,
    pub(crate) priority: u64,
    /// Occurrences in the subtree.
    pub(crate) count: u32,
    pub(crate) active: bool,
    /// Non-tree edge count carried by an active occurrence.
    pub(crate) own_w: u32,
    /// Sum of `own_w` over active occurrences in the subtree.
    pub(crate) weight: u64,
    /// Active occurrences in the subtree.
    pub(crate) size: u32,
}

#[derive(Clone, Debug)]
pub(crate) struct Treap {
    pub(crate) nodes: Vec<EtNode>,
    free: Vec<usize>,
    rng: ChaCha8Rng,
    live: usize,
}

impl Treap {
    pub(crate) fn new(seed: u64) -> Self {
        Treap {
            nodes: Vec::new(),
            free: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            live: 0,
        }
    }

    pub(crate) fn live(&self) -> usize {
        self.live
    }

    pub(crate) fn alloc(&mut self, vertex: usize, active: bool) -> usize {
        let node = EtNode {
            vertex,
            left: NIL,
            right: NIL,
            parent: NIL,
            priority: self.rng.gen(),
            count: 1,
            active,
            own_w: 0,
            weight: 0,
            size: active as u32,
        };
        self.live += 1;
        if let Some(i) = self.free.pop() {
            self.nodes[i] = node;
            i
        } else {
            self.nodes.push(node);
            self.nodes.len() - 1
        }
    }

    pub(crate) fn release(&mut self, x: usize) {
        self.live -= 1;
        self.nodes[x].parent = NIL;
        self.nodes[x].left = NIL;
        self.nodes[x].right = NIL;
        self.free.push(x);
    }

    #[inline]
    pub(crate) fn count(&self, x: usize) -> usize {
        if x == NIL {
            0
        } else {
            self.nodes[x].count as usize
        }
    }

    #[inline]
    pub(crate) fn weight(&self, x: usize) -> u64 {
        if x == NIL {
            0
        } else {
            self.nodes[x].weight
        }
    }

    #[inline]
    pub(crate) fn size(&self, x: usize) -> usize {
        if x == NIL {
            0
        } else {
            self.nodes[x].size as usize
        }
    }

    #[inline]
    pub(crate) fn update(&mut self, x: usize) {
        let (l, r) = (self.nodes[x].left, self.nodes[x].right);
        let count = 1 + self.count(l) + self.count(r);
        let mut weight = self.weight(l) + self.weight(r);
        let mut size = self.size(l) + self.size(r);
        let n = &self.nodes[x];
        if n.active {
            weight += n.own_w as u64;
            size += 1;
        }
        let n = &mut self.nodes[x];
        n.count = count as u32;
        n.weight = weight;
        n.size = size as u32;
    }

    /// Recompute aggregates from `x` up to its root.
    pub(crate) fn update_path(&mut self, mut x: usize) {
        while x != NIL {
            self.update(x);
            x = self.nodes[x].parent;
        }
    }

    pub(crate) fn root(&self, mut x: usize) -> usize {
        while self.nodes[x].parent != NIL {
            x = self.nodes[x].parent;
        }
        x
    }

    /// Position of `x` in its tree's in-order sequence.
    pub(crate) fn index(&self, mut x: usize) -> usize {
        let mut idx = self.count(self.nodes[x].left);
        while self.nodes[x].parent != NIL {
            let p = self.nodes[x].parent;
            if self.nodes[p].right == x {
                idx += self.count(self.nodes[p].left) + 1;
            }
            x = p;
        }
        idx
    }

    /// Split `t` into its first `k` occurrences and the rest.
    pub(crate) fn split(&mut self, t: usize, k: usize) -> (usize, usize) {
        if t == NIL {
            return (NIL, NIL);
        }
        self.nodes[t].parent = NIL;
        let lc = self.count(self.nodes[t].left);
        if k <= lc {
            let (a, b) = self.split(self.nodes[t].left, k);
            self.nodes[t].left = b;
            if b != NIL {
                self.nodes[b].parent = t;
            }
            self.update(t);
            (a, t)
        } else {
            let (a, b) = self.split(self.nodes[t].right, k - lc - 1);
            self.nodes[t].right = a;
            if a != NIL {
                self.nodes[a].parent = t;
            }
            self.update(t);
            (t, b)
        }
    }

    pub(crate) fn merge(&mut self, a: usize, b: usize) -> usize {
        if a == NIL {
            if b != NIL {
                self.nodes[b].parent = NIL;
            }
            return b;
        }
        if b == NIL {
            self.nodes[a].parent = NIL;
            return a;
        }
        if self.nodes[a].priority > self.nodes[b].priority {
            let r = self.merge(self.nodes[a].right, b);
            self.nodes[a].right = r;
            self.nodes[r].parent = a;
            self.nodes[a].parent = NIL;
            self.update(a);
            a
        } else {
            let l = self.merge(a, self.nodes[b].left);
            self.nodes[b].left = l;
            self.nodes[l].parent = b;
            self.nodes[b].parent = NIL;
            self.update(b);
            b
        }
    }

    pub(crate) fn first(&self, mut t: usize) -> usize {
        while self.nodes[t].left != NIL {
            t = self.nodes[t].left;
        }
        t
    }

    pub(crate) fn last(&self, mut t: usize) -> usize {
        while self.nodes[t].right != NIL {
            t = self.nodes[t].right;
        }
        t
    }

    /// In-order occurrences of the tree rooted at `t`.
    pub(crate) fn in_order(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count(t));
        let mut stack = Vec::new();
        let mut x = t;
        while x != NIL || !stack.is_empty() {
            while x != NIL {
                stack.push(x);
                x = self.nodes[x].left;
            }
            let y = stack.pop().expect("non-empty");
            out.push(y);
            x = self.nodes[y].right;
        }
        out
    }

    pub(crate) fn height(&self, t: usize) -> usize {
        if t == NIL {
            return 0;
        }
        let mut best = 0;
        let mut stack = vec![(t, 1usize)];
        while let Some((x, d)) = stack.pop() {
            best = best.max(d);
            for c in [self.nodes[x].left, self.nodes[x].right] {
                if c != NIL {
                    stack.push((c, d + 1));
                }
            }
        }
        best
    }

    /// Active occurrences in tour order. With `by_weight` only those carrying
    /// non-tree edges are returned and weightless subtrees are skipped.
    pub(crate) fn collect_active(&self, t: usize, by_weight: bool) -> Vec<usize> {
        let mut out = Vec::new();
        if t == NIL {
            return out;
        }
        let live = |x: usize| {
            x != NIL
                && if by_weight {
                    self.nodes[x].weight > 0
                } else {
                    self.nodes[x].size > 0
                }
        };
        let mut stack = Vec::new();
        let mut x = t;
        while (live(x)) || !stack.is_empty() {
            while live(x) {
                stack.push(x);
                x = self.nodes[x].left;
            }
            let y = stack.pop().expect("non-empty");
            let n = &self.nodes[y];
            if n.active && (!by_weight || n.own_w > 0) {
                out.push(y);
            }
            x = n.right;
        }
        out
    }

    /// Active occurrence holding the `r`-th unit of weight, and the offset of
    /// `r` within that occurrence's own weight.
    pub(crate) fn descend_weight(&self, t: usize, mut r: u64) -> (usize, u64) {
        let mut x = t;
        loop {
            let n = &self.nodes[x];
            let lw = self.weight(n.left);
            if r < lw {
                x = n.left;
                continue;
            }
            r -= lw;
            let own = if n.active { n.own_w as u64 } else { 0 };
            if r < own {
                return (x, r);
            }
            r -= own;
            x = n.right;
        }
    }

    /// Check parent links, heap order and aggregates below `t`.
    pub(crate) fn audit_tree(&self, t: usize) -> Result<(), String> {
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            let n = &self.nodes[x];
            let mut count = 1;
            let mut weight = if n.active { n.own_w as u64 } else { 0 };
            let mut size = n.active as u32;
            for c in [n.left, n.right] {
                if c == NIL {
                    continue;
                }
                let cn = &self.nodes[c];
                if cn.parent != x {
                    return Err(format!("treap child {c} does not point back to {x}"));
                }
                if cn.priority > n.priority {
                    return Err(format!("heap order broken at {x}"));
                }
                count += cn.count;
                weight += cn.weight;
                size += cn.size;
                stack.push(c);
            }
            if count != n.count || weight != n.weight || size != n.size {
                return Err(format!("stale aggregates at treap node {x}"));
            }
        }
        Ok(())
    }
}
