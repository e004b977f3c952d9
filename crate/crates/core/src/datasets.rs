//! Synthetic graph families and the edge-list loader.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::EdgeKey;

/// Exponent used for power-law graphs when none is given.
pub const DEFAULT_EXPONENT: f64 = 2.5;

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    File(PathBuf),
    Star(usize),
    Path(usize),
    Complete(usize),
    Gnm(usize, usize),
    PowerLaw { n: usize, m: usize, exponent: f64 },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{m} edges do not fit in a simple graph on {n} vertices")]
    InfeasibleM { n: usize, m: usize },
    #[error("bad dataset spec `{0}`")]
    BadSpec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::File(p) => write!(f, "file:{}", p.display()),
            DatasetSpec::Star(n) => write!(f, "star:{n}"),
            DatasetSpec::Path(n) => write!(f, "path:{n}"),
            DatasetSpec::Complete(n) => write!(f, "complete:{n}"),
            DatasetSpec::Gnm(n, m) => write!(f, "gnm:{n},{m}"),
            DatasetSpec::PowerLaw { n, m, exponent } => write!(f, "powerlaw:{n},{m},{exponent}"),
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DatasetError::BadSpec(s.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        if kind == "file" {
            return Ok(DatasetSpec::File(PathBuf::from(args)));
        }
        let nums: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<usize, DatasetError> {
            nums.get(i).and_then(|x| x.parse().ok()).ok_or_else(bad)
        };
        let spec = match (kind, nums.len()) {
            ("star", 1) => DatasetSpec::Star(int(0)?),
            ("path", 1) => DatasetSpec::Path(int(0)?),
            ("complete", 1) => DatasetSpec::Complete(int(0)?),
            ("gnm", 2) => DatasetSpec::Gnm(int(0)?, int(1)?),
            ("powerlaw", 2 | 3) => DatasetSpec::PowerLaw {
                n: int(0)?,
                m: int(1)?,
                exponent: match nums.get(2) {
                    Some(e) => e.parse().map_err(|_| bad())?,
                    None => DEFAULT_EXPONENT,
                },
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

/// An edge list over dense vertex ids `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub n: usize,
    pub edges: Vec<EdgeKey>,
    pub duplicates_dropped: usize,
    pub self_loops_dropped: usize,
    /// Original id of each dense id, for loaded files.
    pub original_ids: Option<Vec<u64>>,
}

fn max_edges(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn key(u: usize, v: usize) -> EdgeKey {
    EdgeKey::new(u, v).expect("generators never emit self-loops")
}

pub fn gen_graph(spec: &DatasetSpec, seed: u64) -> Result<Dataset, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, edges) = match *spec {
        DatasetSpec::File(ref p) => return load_edge_list(p),
        DatasetSpec::Star(n) => (n, (1..n).map(|v| key(0, v)).collect()),
        DatasetSpec::Path(n) => (n, (1..n).map(|v| key(v - 1, v)).collect()),
        DatasetSpec::Complete(n) => {
            let mut e = Vec::with_capacity(max_edges(n));
            for u in 0..n {
                for v in u + 1..n {
                    e.push(key(u, v));
                }
            }
            (n, e)
        }
        DatasetSpec::Gnm(n, m) => (n, gnm(n, m, &mut rng)?),
        DatasetSpec::PowerLaw { n, m, exponent } => (n, power_law(n, m, exponent, &mut rng)?),
    };
    Ok(Dataset {
        n,
        edges,
        ..Default::default()
    })
}

fn gnm(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<EdgeKey>, DatasetError> {
    let total = max_edges(n);
    if m > total {
        return Err(DatasetError::InfeasibleM { n, m });
    }
    if m > total / 2 {
        // sample the complement instead
        let skip: HashSet<EdgeKey> = gnm(n, total - m, rng)?.into_iter().collect();
        let mut e = Vec::with_capacity(m);
        for u in 0..n {
            for v in u + 1..n {
                let k = key(u, v);
                if !skip.contains(&k) {
                    e.push(k);
                }
            }
        }
        return Ok(e);
    }
    let mut seen = HashSet::with_capacity(m);
    let mut e = Vec::with_capacity(m);
    while e.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && seen.insert(key(u, v)) {
            e.push(key(u, v));
        }
    }
    Ok(e)
}

/// Endpoints drawn with weight `(i + 1)^(-1 / (exponent - 1))`, giving a
/// degree tail with the requested exponent. Gives up on weighted draws after
/// a while and fills the rest uniformly.
fn power_law(
    n: usize,
    m: usize,
    exponent: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<EdgeKey>, DatasetError> {
    if m > max_edges(n) {
        return Err(DatasetError::InfeasibleM { n, m });
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let alpha = 1.0 / (exponent.max(1.01) - 1.0);
    let weights: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-alpha)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|_| DatasetError::InfeasibleM { n, m })?;
    let mut seen = HashSet::with_capacity(m);
    let mut e = Vec::with_capacity(m);
    let mut misses = 0;
    while e.len() < m && misses < 20 * m + 1000 {
        let u = dist.sample(rng);
        let v = dist.sample(rng);
        if u != v && seen.insert(key(u, v)) {
            e.push(key(u, v));
        } else {
            misses += 1;
        }
    }
    while e.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && seen.insert(key(u, v)) {
            e.push(key(u, v));
        }
    }
    Ok(e)
}

/// Parse whitespace-separated id pairs; `#` lines are comments. Ids are
/// remapped densely in order of first appearance.
pub fn parse_edge_list(text: &str) -> Result<Dataset, DatasetError> {
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut original = Vec::new();
    let mut seen = HashSet::new();
    let mut d = Dataset::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next = || -> Result<u64, DatasetError> {
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| DatasetError::Parse {
                    line: idx + 1,
                    msg: "expected two non-negative integers".into(),
                })
        };
        let (a, b) = (next()?, next()?);
        if a == b {
            d.self_loops_dropped += 1;
            continue;
        }
        let mut dense = |x: u64| {
            *ids.entry(x).or_insert_with(|| {
                original.push(x);
                original.len() - 1
            })
        };
        let k = key(dense(a), dense(b));
        if seen.insert(k) {
            d.edges.push(k);
        } else {
            d.duplicates_dropped += 1;
        }
    }
    d.n = original.len();
    d.original_ids = Some(original);
    Ok(d)
}

pub fn load_edge_list(path: &Path) -> Result<Dataset, DatasetError> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let star = gen_graph(&DatasetSpec::Star(5), 0).unwrap();
        assert_eq!(star.edges, (1..5).map(|v| key(0, v)).collect::<Vec<_>>());
        assert_eq!(gen_graph(&DatasetSpec::Path(4), 0).unwrap().edges.len(), 3);
        assert_eq!(
            gen_graph(&DatasetSpec::Complete(6), 0).unwrap().edges.len(),
            15
        );
        let g = gen_graph(&DatasetSpec::Gnm(50, 1000), 1).unwrap();
        assert_eq!(g.edges.iter().collect::<HashSet<_>>().len(), 1000);
        assert!(matches!(
            gen_graph(&DatasetSpec::Gnm(4, 7), 0),
            Err(DatasetError::InfeasibleM { .. })
        ));
        let p = DatasetSpec::PowerLaw {
            n: 200,
            m: 600,
            exponent: 2.5,
        };
        assert_eq!(gen_graph(&p, 3).unwrap().edges.len(), 600);
        assert_eq!(gen_graph(&p, 3).unwrap(), gen_graph(&p, 3).unwrap());
    }

    #[test]
    fn spec_strings() {
        for s in [
            "star:5",
            "path:10",
            "complete:4",
            "gnm:10,20",
            "powerlaw:10,20,2.5",
            "file:x.txt",
        ] {
            assert_eq!(s.parse::<DatasetSpec>().unwrap().to_string(), s);
        }
        assert_eq!(
            "powerlaw:10,20".parse::<DatasetSpec>().unwrap(),
            DatasetSpec::PowerLaw {
                n: 10,
                m: 20,
                exponent: 2.5
            }
        );
        assert!("gnm:10".parse::<DatasetSpec>().is_err());
        assert!("ring:3".parse::<DatasetSpec>().is_err());
    }

    #[test]
    fn loader_remaps() {
        let d = parse_edge_list("# c\n10 20\n20 10\n7 7\n20 30\n").unwrap();
        assert_eq!(d.n, 3);
        assert_eq!(d.edges, vec![key(0, 1), key(1, 2)]);
        assert_eq!((d.duplicates_dropped, d.self_loops_dropped), (1, 1));
        assert_eq!(d.original_ids, Some(vec![10, 20, 30]));
        assert!(parse_edge_list("1 x\n").is_err());
    }
}
