use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::topk::{clamp_fixed_k, topk_fixed, VrfMode};
use super::SparseTile;

/// How the fixed-region size k is chosen per tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KPolicy {
    /// Search from ceil(tau × pct) for the largest fitting k.
    TopK,
    /// Use this k, lowered per tile to the largest value that fits.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub tile_rows: usize,
    pub tau: usize,
    pub pct: f64,
    pub depth: usize,
    pub mode: VrfMode,
    pub k_policy: KPolicy,
}

/// A preprocessed tile together with the dense rows it needs and the subset
/// pinned in the fixed VRF region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilePlan {
    pub tile: SparseTile,
    /// Global (permuted) dense-row ids referenced by the tile, ascending.
    pub dense_row_ids: Vec<u32>,
    /// Pinned dense-row ids, most-referenced first.
    pub fixed_set: Vec<u32>,
    pub k: usize,
}

impl TilePlan {
    pub fn global_row(&self, tile_rows: usize, local_col: u32) -> u32 {
        (self.tile.tile_col * tile_rows) as u32 + local_col
    }
}

pub fn plan_tile(tile: &SparseTile, p: &PlanParams) -> TilePlan {
    let base = (tile.tile_col * p.tile_rows) as u32;
    let ranked = tile.columns_by_count();
    let best = match p.k_policy {
        KPolicy::TopK => topk_fixed(tile, p.tau, p.pct, p.depth, p.mode),
        KPolicy::Fixed(k) => clamp_fixed_k(tile, k, p.depth, p.mode),
    };
    let fixed_set: Vec<u32> = ranked.iter().take(best).map(|&c| base + c).collect();
    let mut dense_row_ids: Vec<u32> = ranked.iter().map(|&c| base + c).collect();
    dense_row_ids.sort_unstable();
    TilePlan {
        tile: tile.clone(),
        dense_row_ids,
        k: fixed_set.len(),
        fixed_set,
    }
}

/// Plans every tile; output order matches input order.
pub fn plan_tiles(tiles: &[SparseTile], p: &PlanParams) -> Vec<TilePlan> {
    tiles.par_iter().map(|t| plan_tile(t, p)).collect()
}

/// One line per tile: position, k, max_rnz, sub-row count, dense rows and fixed set.
pub fn plan_report(plans: &[TilePlan]) -> String {
    let mut out = String::new();
    for p in plans {
        let _ = writeln!(
            out,
            "tile {},{} k={} max_rnz={} subrows={} nnz={} dense_rows={:?} fixed={:?}",
            p.tile.tile_row,
            p.tile.tile_col,
            p.k,
            p.tile.max_rnz,
            p.tile.rows.len(),
            p.tile.nnz(),
            p.dense_row_ids,
            p.fixed_set
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::SubRow;
    use super::*;

    fn params(k_policy: KPolicy) -> PlanParams {
        PlanParams {
            tile_rows: 4,
            tau: 3,
            pct: 0.5,
            depth: 4,
            mode: VrfMode::Single,
            k_policy,
        }
    }

    fn tile(tile_col: usize, rows: &[&[u32]]) -> SparseTile {
        SparseTile::new(
            0,
            tile_col,
            rows.iter()
                .enumerate()
                .map(|(i, c)| SubRow {
                    parent_row: i as u32,
                    split_seq: 0,
                    col_idx: c.to_vec(),
                    values: vec![1; c.len()],
                })
                .collect(),
        )
    }

    #[test]
    fn ids_are_global_and_fixed_is_subset() {
        let t = tile(2, &[&[0, 1, 2], &[0, 3]]);
        let p = plan_tile(&t, &params(KPolicy::TopK));
        assert_eq!(p.dense_row_ids, vec![8, 9, 10, 11]);
        assert!(p.fixed_set.iter().all(|id| p.dense_row_ids.contains(id)));
        assert_eq!(p.fixed_set[0], 8);
        assert_eq!(p.k, p.fixed_set.len());
    }

    #[test]
    fn k_never_exceeds_distinct_columns() {
        let t = tile(0, &[&[1]]);
        let p = plan_tile(&t, &params(KPolicy::TopK));
        assert_eq!(p.k, 1);
    }

    #[test]
    fn identical_tiles_identical_k() {
        let a = tile(0, &[&[0, 1, 2], &[0, 3], &[1, 3]]);
        let b = tile(1, &[&[0, 1, 2], &[0, 3], &[1, 3]]);
        let plans = plan_tiles(&[a, b], &params(KPolicy::TopK));
        assert_eq!(plans[0].k, plans[1].k);
        assert_eq!(plans[1].tile.tile_col, 1);
    }

    #[test]
    fn fixed_zero_policy() {
        let t = tile(0, &[&[0, 1, 2], &[0, 3]]);
        let p = plan_tile(&t, &params(KPolicy::Fixed(0)));
        assert!(p.fixed_set.is_empty());
        assert!(plan_report(&[p]).starts_with("tile 0,0 k=0"));
    }
}
