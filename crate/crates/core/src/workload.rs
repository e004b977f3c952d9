//! Seeded update streams with interleaved deletions and query testing points.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{EdgeKey, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Insert(EdgeKey),
    Delete(EdgeKey),
    /// Testing point: time `pairs` seeded connectivity queries.
    QueryBatch {
        id: usize,
        pairs: usize,
    },
}

impl Operation {
    pub fn is_update(&self) -> bool {
        !matches!(self, Operation::QueryBatch { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkloadConfig {
    /// Insertions per deletion.
    pub u_r: usize,
    pub test_num: usize,
    pub queries_per_point: usize,
    pub seed: u64,
    /// Shuffle the input edges (seeded) instead of keeping file order.
    pub shuffle: bool,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            u_r: 100,
            test_num: 100,
            queries_per_point: 100_000,
            seed: 0,
            shuffle: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("{updates} updates cannot hold {test_num} testing points")]
    TooFewUpdates { updates: usize, test_num: usize },
    #[error("u_r must be at least 1")]
    ZeroRate,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Present edges with O(1) uniform sampling and removal.
#[derive(Default)]
struct EdgePool {
    items: Vec<EdgeKey>,
    pos: HashMap<EdgeKey, usize>,
}

impl EdgePool {
    fn insert(&mut self, k: EdgeKey) -> bool {
        if self.pos.contains_key(&k) {
            return false;
        }
        self.pos.insert(k, self.items.len());
        self.items.push(k);
        true
    }

    fn remove_at(&mut self, i: usize) -> EdgeKey {
        let k = self.items.swap_remove(i);
        self.pos.remove(&k);
        if i < self.items.len() {
            self.pos.insert(self.items[i], i);
        }
        k
    }

    fn take_random(&mut self, rng: &mut ChaCha8Rng) -> Option<EdgeKey> {
        if self.items.is_empty() {
            return None;
        }
        let i = rng.gen_range(0..self.items.len());
        Some(self.remove_at(i))
    }
}

/// Insert every edge in order; after each `u_r`-th insertion delete one
/// uniformly chosen present edge.
pub fn generate_updates(
    edges: &[EdgeKey],
    cfg: &WorkloadConfig,
) -> Result<Vec<Operation>, WorkloadError> {
    if cfg.u_r == 0 {
        return Err(WorkloadError::ZeroRate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = edges.to_vec();
    if cfg.shuffle {
        order.shuffle(&mut rng);
    }
    let mut present = EdgePool::default();
    let mut ops = Vec::with_capacity(order.len() + order.len() / cfg.u_r);
    let mut inserted = 0;
    for k in order {
        if !present.insert(k) {
            continue;
        }
        ops.push(Operation::Insert(k));
        inserted += 1;
        if inserted % cfg.u_r == 0 {
            if let Some(d) = present.take_random(&mut rng) {
                ops.push(Operation::Delete(d));
            }
        }
    }
    Ok(ops)
}

/// Fixed-length churn over a base edge set: inserts draw absent base edges,
/// each `u_r`-th insertion is followed by a deletion, and a deletion is
/// forced whenever every base edge is present.
pub fn generate_churn(
    base: &[EdgeKey],
    u_r: usize,
    total_ops: usize,
    seed: u64,
) -> Result<Vec<Operation>, WorkloadError> {
    if u_r == 0 {
        return Err(WorkloadError::ZeroRate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut absent = EdgePool::default();
    for &k in base {
        absent.insert(k);
    }
    let mut present = EdgePool::default();
    let mut ops = Vec::with_capacity(total_ops);
    let mut inserted = 0;
    while ops.len() < total_ops {
        match absent.take_random(&mut rng) {
            Some(k) => {
                present.insert(k);
                ops.push(Operation::Insert(k));
                inserted += 1;
                if inserted % u_r == 0 && ops.len() < total_ops {
                    let d = present
                        .take_random(&mut rng)
                        .expect("an edge was just inserted");
                    absent.insert(d);
                    ops.push(Operation::Delete(d));
                }
            }
            None => match present.take_random(&mut rng) {
                Some(d) => {
                    absent.insert(d);
                    ops.push(Operation::Delete(d));
                }
                None => break,
            },
        }
    }
    Ok(ops)
}

/// Insert a testing point after every `floor(N_u / test_num)` updates.
pub fn place_testing_points(
    ops: &[Operation],
    test_num: usize,
    queries_per_point: usize,
) -> Result<Vec<Operation>, WorkloadError> {
    let updates: Vec<Operation> = ops.iter().copied().filter(Operation::is_update).collect();
    if test_num == 0 {
        return Ok(updates);
    }
    if updates.len() < test_num {
        return Err(WorkloadError::TooFewUpdates {
            updates: updates.len(),
            test_num,
        });
    }
    let step = updates.len() / test_num;
    let mut out = Vec::with_capacity(updates.len() + test_num);
    let mut id = 0;
    for (i, op) in updates.into_iter().enumerate() {
        out.push(op);
        if (i + 1) % step == 0 && id < test_num {
            out.push(Operation::QueryBatch {
                id,
                pairs: queries_per_point,
            });
            id += 1;
        }
    }
    Ok(out)
}

/// Uniform ordered pairs of distinct vertices.
pub fn generate_query_pairs(n: usize, count: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    if n < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = rng.gen_range(0..n);
            let r = rng.gen_range(0..n - 1);
            (u, if r < u { r } else { r + 1 })
        })
        .collect()
}

/// Seed for the query pairs of testing point `id` in a run seeded `seed`.
pub fn batch_seed(seed: u64, id: usize) -> u64 {
    seed ^ (id as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workload {
    pub seed: u64,
    pub u_r: usize,
    pub ops: Vec<Operation>,
}

impl Workload {
    /// Largest vertex id mentioned plus one.
    pub fn vertex_count(&self) -> usize {
        self.ops
            .iter()
            .filter_map(|op| match op {
                Operation::Insert(k) | Operation::Delete(k) => Some(k.b() + 1),
                Operation::QueryBatch { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# dynconn-workload v1 seed={} ur={}\n", self.seed, self.u_r);
        for op in &self.ops {
            let _ = match op {
                Operation::Insert(k) => writeln!(s, "I {} {}", k.a(), k.b()),
                Operation::Delete(k) => writeln!(s, "D {} {}", k.a(), k.b()),
                Operation::QueryBatch { pairs, .. } => writeln!(s, "Q {pairs}"),
            };
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, WorkloadError> {
        let err = |line: usize, msg: &str| WorkloadError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let rest = header
            .strip_prefix("# dynconn-workload v1 ")
            .ok_or_else(|| err(1, "missing header"))?;
        let (mut seed, mut u_r) = (None, None);
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("seed", v)) => seed = v.parse().ok(),
                Some(("ur", v)) => u_r = v.parse().ok(),
                _ => return Err(err(1, "unknown header field")),
            }
        }
        let (seed, u_r) = seed
            .zip(u_r)
            .ok_or_else(|| err(1, "header needs seed and ur"))?;
        let mut ops = Vec::new();
        let mut batch = 0;
        for (idx, raw) in lines {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = body.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(line, "bad number"));
            let op = match parts.as_slice() {
                ["I", u, v] | ["D", u, v] => {
                    let k =
                        EdgeKey::new(num(u)?, num(v)?).map_err(|e| err(line, &e.to_string()))?;
                    if parts[0] == "I" {
                        Operation::Insert(k)
                    } else {
                        Operation::Delete(k)
                    }
                }
                ["Q", k] => {
                    batch += 1;
                    Operation::QueryBatch {
                        id: batch - 1,
                        pairs: num(k)?,
                    }
                }
                _ => return Err(err(line, "expected `I u v`, `D u v` or `Q k`")),
            };
            ops.push(op);
        }
        Ok(Workload { seed, u_r, ops })
    }
}
