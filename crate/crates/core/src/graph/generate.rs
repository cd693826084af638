use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};

fn max_undirected_edges(n: usize) -> usize {
    n * (n - 1) / 2
}

fn check_edges(n: usize, edges: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 nodes, got {n}")));
    }
    if edges > max_undirected_edges(n) {
        return Err(Error::Parameter(format!(
            "{edges} edges do not fit in a simple graph on {n} nodes"
        )));
    }
    Ok(())
}

fn symmetric_from_pairs(n: usize, pairs: &HashSet<(u32, u32)>) -> Result<CsrMatrix> {
    let mut trip = Vec::with_capacity(pairs.len() * 2);
    for &(a, b) in pairs {
        trip.push((a as usize, b as usize, 1));
        trip.push((b as usize, a as usize, 1));
    }
    CsrMatrix::from_triplets(n, n, trip)
}

/// Tops up `pairs` to `target` by walking (i, j) pairs in lexicographic order.
fn fill_remaining(n: usize, target: usize, pairs: &mut HashSet<(u32, u32)>) {
    'outer: for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if pairs.len() >= target {
                break 'outer;
            }
            pairs.insert((i, j));
        }
    }
}

/// Undirected power-law graph with exactly `edges_target` edges, returned as
/// a symmetric binary adjacency (nnz = 2 × edges_target, no self-loops).
///
/// Node i of a seeded shuffle gets expected-degree weight (i+1)^(-1/(alpha-1)),
/// which yields a degree tail with exponent `alpha`. Endpoints are sampled in
/// proportion to weight; self-loops and repeated pairs are rejected.
pub fn gen_power_law(n: usize, edges_target: usize, alpha: f64, seed: u64) -> Result<CsrMatrix> {
    check_edges(n, edges_target)?;
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::Parameter(format!("alpha must be > 1, got {alpha}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(&mut rng);
    let exponent = -1.0 / (alpha - 1.0);
    let mut weights = vec![0.0f64; n];
    for (rank, &id) in ids.iter().enumerate() {
        weights[id as usize] = ((rank + 1) as f64).powf(exponent);
    }
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::Parameter(format!("degree weights: {e}")))?;

    let mut pairs: HashSet<(u32, u32)> = HashSet::with_capacity(edges_target);
    let max_attempts = 50 * edges_target + 1000;
    let mut attempts = 0;
    while pairs.len() < edges_target && attempts < max_attempts {
        attempts += 1;
        let a = dist.sample(&mut rng) as u32;
        let b = dist.sample(&mut rng) as u32;
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    fill_remaining(n, edges_target, &mut pairs);
    symmetric_from_pairs(n, &pairs)
}

/// Undirected graph with `edges` edges chosen uniformly at random.
pub fn gen_uniform(n: usize, edges: usize, seed: u64) -> Result<CsrMatrix> {
    check_edges(n, edges)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: HashSet<(u32, u32)> = HashSet::with_capacity(edges);
    let max_attempts = 50 * edges + 1000;
    let mut attempts = 0;
    while pairs.len() < edges && attempts < max_attempts {
        attempts += 1;
        let a = rng.gen_range(0..n as u32);
        let b = rng.gen_range(0..n as u32);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    fill_remaining(n, edges, &mut pairs);
    symmetric_from_pairs(n, &pairs)
}

/// Sparse feature matrix: each entry is nonzero with probability `density`,
/// nonzeros drawn uniformly from [-max_abs, max_abs] \ {0}.
pub fn gen_sparse_features(
    n_rows: usize,
    n_cols: usize,
    density: f64,
    max_abs: i32,
    seed: u64,
) -> Result<CsrMatrix> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Parameter(format!(
            "density {density} outside [0, 1]"
        )));
    }
    if max_abs < 1 {
        return Err(Error::Parameter(format!(
            "max_abs must be >= 1, got {max_abs}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trip = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen_bool(density) {
                let mut v = rng.gen_range(1..=max_abs);
                if rng.gen_bool(0.5) {
                    v = -v;
                }
                trip.push((r, c, v));
            }
        }
    }
    CsrMatrix::from_triplets(n_rows, n_cols, trip)
}

/// Dense matrix with entries uniform in [lo, hi].
pub fn random_dense(
    n_rows: usize,
    n_cols: usize,
    lo: i32,
    hi: i32,
    seed: u64,
) -> Result<DenseMatrix> {
    if lo > hi {
        return Err(Error::Parameter(format!("empty range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(DenseMatrix::from_fn(n_rows, n_cols, |_, _| {
        rng.gen_range(lo..=hi)
    }))
}
