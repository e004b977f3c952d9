use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use dynconn_core::{ConnectivityStructure, EdgeKey, Hk, SampleError};

fn p_value(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64)
        .unwrap()
        .cdf(stat)
}

#[test]
fn entries_drawn_by_weight() {
    let mut hk = Hk::new(9);
    // a star plus chords; every chord endpoint carries one entry
    for v in 1..8 {
        hk.insert_edge(0, v).unwrap();
    }
    let chords = [(1, 2), (1, 3), (1, 4), (2, 3), (5, 6)];
    for (u, v) in chords {
        hk.insert_edge(u, v).unwrap();
    }
    let mut weight: HashMap<usize, f64> = HashMap::new();
    for (u, v) in chords {
        *weight.entry(u).or_default() += 1.0;
        *weight.entry(v).or_default() += 1.0;
    }
    let total: f64 = weight.values().sum();
    let draws = 10_000;
    let mut seen: HashMap<usize, f64> = HashMap::new();
    for _ in 0..draws {
        let (x, y) = hk.sample_entry(0, 7).unwrap();
        assert!(chords.contains(&(x.min(y), x.max(y))));
        *seen.entry(x).or_default() += 1.0;
    }
    let mut keys: Vec<_> = weight.keys().copied().collect();
    keys.sort_unstable();
    let obs: Vec<f64> = keys
        .iter()
        .map(|k| seen.get(k).copied().unwrap_or(0.0))
        .collect();
    let exp: Vec<f64> = keys
        .iter()
        .map(|k| draws as f64 * weight[k] / total)
        .collect();
    assert!(p_value(&obs, &exp) > 0.01);
}

#[test]
fn empty_and_unknown() {
    let mut hk = Hk::new(1);
    hk.insert_edge(0, 1).unwrap();
    assert_eq!(hk.sample_nontree(0, 0), Err(SampleError::EmptyWeight));
    assert!(matches!(
        hk.sample_nontree(0, 40),
        Err(SampleError::Unknown(..))
    ));
    hk.insert_edge(1, 2).unwrap();
    hk.insert_edge(0, 2).unwrap();
    assert_eq!(hk.sample_nontree(0, 1), Ok(EdgeKey::new(0, 2).unwrap()));
}
