#![allow(dead_code)]

use std::collections::BTreeMap;

use flexvector::graph::{gen_power_law, gen_uniform, random_dense, CsrMatrix, DenseMatrix};
use flexvector::preprocess::{SparseTile, SubRow};
use proptest::prelude::*;

/// A tile with up to `width` rows over `width` columns, values in [-8, 8] \ {0}.
pub fn tile_strategy(width: u32) -> impl Strategy<Value = SparseTile> {
    let row =
        proptest::collection::btree_map(0..width, (1..=8i32, any::<bool>()), 1..=width as usize);
    proptest::collection::btree_map(0..width, row, 0..=width as usize).prop_map(|rows| {
        SparseTile::new(
            0,
            0,
            rows.into_iter()
                .map(|(r, cols)| SubRow {
                    parent_row: r,
                    split_seq: 0,
                    col_idx: cols.keys().copied().collect(),
                    values: cols
                        .values()
                        .map(|&(v, neg)| if neg { -v } else { v })
                        .collect(),
                })
                .collect(),
        )
    })
}

/// Per parent row: sum over its sub-rows of value × dense[col].
pub fn tile_product(tile: &SparseTile, dense: &DenseMatrix) -> BTreeMap<u32, Vec<i32>> {
    let mut out: BTreeMap<u32, Vec<i32>> = BTreeMap::new();
    for r in &tile.rows {
        let acc = out
            .entry(r.parent_row)
            .or_insert_with(|| vec![0; dense.n_cols()]);
        for (&c, &v) in r.col_idx.iter().zip(&r.values) {
            for (a, &x) in acc.iter_mut().zip(dense.row(c as usize)) {
                *a = a.wrapping_add(v.wrapping_mul(x));
            }
        }
    }
    out
}

/// Sorted (parent_row, col, value) triples.
pub fn triples(tile: &SparseTile) -> Vec<(u32, u32, i32)> {
    let mut t: Vec<_> = tile
        .rows
        .iter()
        .flat_map(|r| {
            r.col_idx
                .iter()
                .zip(&r.values)
                .map(move |(&c, &v)| (r.parent_row, c, v))
        })
        .collect();
    t.sort_unstable();
    t
}

/// Dense triple-loop product with wrapping arithmetic.
pub fn dense_product(s: &DenseMatrix, d: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(s.n_rows(), d.n_cols(), |i, j| {
        (0..s.n_cols()).fold(0i32, |acc, k| {
            acc.wrapping_add(s.get(i, k).wrapping_mul(d.get(k, j)))
        })
    })
}

/// Random graph: power-law when `seed` is even, uniform otherwise.
pub fn mixed_graph(n: usize, edges: usize, seed: u64) -> CsrMatrix {
    if seed.is_multiple_of(2) {
        gen_power_law(n, edges, 2.1, seed).unwrap()
    } else {
        gen_uniform(n, edges, seed).unwrap()
    }
}

pub fn dense(n: usize, f: usize, seed: u64) -> DenseMatrix {
    random_dense(n, f, -8, 8, seed).unwrap()
}
