//! Randomized search trees holding non-tree neighbours, with subtree counts
//! so a neighbour can be picked by rank.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::treap::NIL;

#[derive(Clone, Debug)]
struct RNode {
    key: usize,
    left: usize,
    right: usize,
    priority: u64,
    count: u32,
}

/// Node pool shared by many trees; a tree is named by its root index.
#[derive(Clone, Debug)]
pub(crate) struct RstPool {
    nodes: Vec<RNode>,
    free: Vec<usize>,
    rng: ChaCha8Rng,
    live: usize,
}

impl RstPool {
    pub(crate) fn new(seed: u64) -> Self {
        RstPool {
            nodes: Vec::new(),
            free: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            live: 0,
        }
    }

    pub(crate) fn live(&self) -> usize {
        self.live
    }

    pub(crate) fn len(&self, t: usize) -> usize {
        if t == NIL {
            0
        } else {
            self.nodes[t].count as usize
        }
    }

    fn update(&mut self, t: usize) {
        let c = 1 + self.len(self.nodes[t].left) + self.len(self.nodes[t].right);
        self.nodes[t].count = c as u32;
    }

    /// Split into keys `< key` and keys `>= key`.
    fn split(&mut self, t: usize, key: usize) -> (usize, usize) {
        if t == NIL {
            return (NIL, NIL);
        }
        if self.nodes[t].key < key {
            let (a, b) = self.split(self.nodes[t].right, key);
            self.nodes[t].right = a;
            self.update(t);
            (t, b)
        } else {
            let (a, b) = self.split(self.nodes[t].left, key);
            self.nodes[t].left = b;
            self.update(t);
            (a, t)
        }
    }

    fn merge(&mut self, a: usize, b: usize) -> usize {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a].priority > self.nodes[b].priority {
            let r = self.merge(self.nodes[a].right, b);
            self.nodes[a].right = r;
            self.update(a);
            a
        } else {
            let l = self.merge(a, self.nodes[b].left);
            self.nodes[b].left = l;
            self.update(b);
            b
        }
    }

    pub(crate) fn contains(&self, mut t: usize, key: usize) -> bool {
        while t != NIL {
            let k = self.nodes[t].key;
            if k == key {
                return true;
            }
            t = if key < k {
                self.nodes[t].left
            } else {
                self.nodes[t].right
            };
        }
        false
    }

    pub(crate) fn insert(&mut self, root: &mut usize, key: usize) {
        if self.contains(*root, key) {
            return;
        }
        let node = RNode {
            key,
            left: NIL,
            right: NIL,
            priority: self.rng.gen(),
            count: 1,
        };
        let x = if let Some(i) = self.free.pop() {
            self.nodes[i] = node;
            i
        } else {
            self.nodes.push(node);
            self.nodes.len() - 1
        };
        self.live += 1;
        let (a, b) = self.split(*root, key);
        let ax = self.merge(a, x);
        *root = self.merge(ax, b);
    }

    pub(crate) fn remove(&mut self, root: &mut usize, key: usize) -> bool {
        let (a, b) = self.split(*root, key);
        let (mid, c) = self.split(b, key + 1);
        let found = mid != NIL;
        if found {
            self.free.push(mid);
            self.live -= 1;
        }
        *root = self.merge(a, c);
        found
    }

    /// Key of rank `k` (0-based, ascending).
    pub(crate) fn nth(&self, mut t: usize, mut k: usize) -> Option<usize> {
        while t != NIL {
            let lc = self.len(self.nodes[t].left);
            if k < lc {
                t = self.nodes[t].left;
            } else if k == lc {
                return Some(self.nodes[t].key);
            } else {
                k -= lc + 1;
                t = self.nodes[t].right;
            }
        }
        None
    }

    pub(crate) fn keys(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len(t));
        let mut stack = Vec::new();
        let mut x = t;
        while x != NIL || !stack.is_empty() {
            while x != NIL {
                stack.push(x);
                x = self.nodes[x].left;
            }
            let y = stack.pop().expect("non-empty");
            out.push(self.nodes[y].key);
            x = self.nodes[y].right;
        }
        out
    }

    pub(crate) fn audit(&self, t: usize) -> Result<(), String> {
        if t == NIL {
            return Ok(());
        }
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            let n = &self.nodes[x];
            if n.count as usize != 1 + self.len(n.left) + self.len(n.right) {
                return Err(format!("rst count stale at {x}"));
            }
            for c in [n.left, n.right] {
                if c != NIL {
                    if self.nodes[c].priority > n.priority {
                        return Err(format!("rst heap order broken at {x}"));
                    }
                    stack.push(c);
                }
            }
        }
        let keys = self.keys(t);
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err("rst keys out of order".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_rank() {
        let mut p = RstPool::new(9);
        let mut r = NIL;
        for k in [5, 1, 9, 3, 7] {
            p.insert(&mut r, k);
        }
        p.insert(&mut r, 3);
        assert_eq!(p.len(r), 5);
        assert_eq!(p.keys(r), vec![1, 3, 5, 7, 9]);
        assert_eq!(p.nth(r, 2), Some(5));
        assert_eq!(p.nth(r, 5), None);
        assert!(p.remove(&mut r, 5));
        assert!(!p.remove(&mut r, 5));
        assert_eq!(p.keys(r), vec![1, 3, 7, 9]);
        p.audit(r).unwrap();
        assert_eq!(p.live(), 4);
    }
}
