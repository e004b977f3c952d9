//! Brute-force reference graph answered by breadth-first search.

use std::collections::{BTreeSet, VecDeque};

use crate::graph::{EdgeKey, VertexId};

/// Plain adjacency sets, no spanning forest.
#[derive(Clone, Debug, Default)]
pub struct OracleGraph {
    adj: Vec<BTreeSet<VertexId>>,
    edges: usize,
}

impl OracleGraph {
    pub fn new(n: usize) -> Self {
        OracleGraph {
            adj: vec![BTreeSet::new(); n],
            edges: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[EdgeKey]) -> Self {
        let mut g = OracleGraph::new(n);
        for &e in edges {
            g.insert(e);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    fn grow(&mut self, v: VertexId) {
        if self.adj.len() <= v {
            self.adj.resize(v + 1, BTreeSet::new());
        }
    }

    pub fn insert(&mut self, e: EdgeKey) -> bool {
        self.grow(e.b());
        let fresh = self.adj[e.a()].insert(e.b());
        if fresh {
            self.adj[e.b()].insert(e.a());
            self.edges += 1;
        }
        fresh
    }

    pub fn remove(&mut self, e: EdgeKey) -> bool {
        if e.b() >= self.adj.len() {
            return false;
        }
        let had = self.adj[e.a()].remove(&e.b());
        if had {
            self.adj[e.b()].remove(&e.a());
            self.edges -= 1;
        }
        had
    }

    pub fn contains(&self, e: EdgeKey) -> bool {
        self.adj.get(e.a()).is_some_and(|s| s.contains(&e.b()))
    }

    pub fn neighbors(&self, u: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(u).into_iter().flatten().copied()
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        oracle_connected(self, u, v)
    }

    /// Component label per vertex: the smallest vertex id in the component.
    pub fn labels(&self) -> Vec<usize> {
        let n = self.adj.len();
        let mut label = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = s;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = s;
                        queue.push_back(y);
                    }
                }
            }
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.labels()
            .iter()
            .enumerate()
            .filter(|&(v, &l)| v == l)
            .count()
    }
}

/// Breadth-first search from `u`; unknown vertices are isolated.
pub fn oracle_connected(g: &OracleGraph, u: VertexId, v: VertexId) -> bool {
    if u == v {
        return true;
    }
    let n = g.adj.len();
    if u >= n || v >= n {
        return false;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([u]);
    seen[u] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &g.adj[x] {
            if y == v {
                return true;
            }
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    false
}
