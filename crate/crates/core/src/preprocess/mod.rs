//! Edge-cut partitioning, tiling, vertex-cut row splitting and per-tile
//! fixed-region selection.

mod partition;
mod plan;
mod tiles;
mod topk;

pub use partition::{
    cross_tile_edges, edge_cut_partition, load_external_partition, parse_external_partition,
    Partition,
};
pub use plan::{plan_report, plan_tile, plan_tiles, KPolicy, PlanParams, TilePlan};
pub use tiles::{extract_tiles, tile_matrix, vertex_cut, SparseTile, SubRow};
pub use topk::{clamp_fixed_k, topk_fixed, VrfMode};

use crate::error::Result;
use rayon::prelude::*;

/// Splits oversized rows of every tile (when `tau` is given) and plans the result.
pub fn prepare_tiles(
    tiles: &[SparseTile],
    vertex_cut_tau: Option<usize>,
    params: &PlanParams,
) -> Result<Vec<TilePlan>> {
    let cut: Vec<SparseTile> = match vertex_cut_tau {
        Some(tau) => tiles
            .par_iter()
            .map(|t| vertex_cut(t, tau))
            .collect::<Result<_>>()?,
        None => tiles.to_vec(),
    };
    Ok(plan_tiles(&cut, params))
}
