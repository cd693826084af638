use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Instruction, Program, Region};
use crate::error::{Error, Result};
use crate::graph::DenseMatrix;
use crate::preprocess::{TilePlan, VrfMode};

/// Machine parameters the compiler needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileParams {
    pub tile_rows: usize,
    /// Dense columns per VRF row.
    pub chunk_width: usize,
    pub element_bits: u32,
    pub vrf_depth: usize,
    pub mode: VrfMode,
    /// Skip MV_DYN rows still resident in the target slot.
    pub dedup_dyn: bool,
}

impl CompileParams {
    fn idx_bytes(&self) -> u64 {
        if self.tile_rows <= 256 {
            1
        } else {
            2
        }
    }

    fn elem_bytes(&self) -> u64 {
        (self.element_bits as u64).div_ceil(8)
    }
}

/// Bytes of a sparse tile in the sparse buffer: per sub-row a parent index
/// and a row pointer, one trailing pointer, then indices and values.
pub fn sparse_tile_bytes(plan: &TilePlan, p: &CompileParams) -> u64 {
    let nnz = plan.tile.nnz() as u64;
    let subrows = plan.tile.rows.len() as u64;
    p.idx_bytes() * (2 * subrows + 1 + nnz) + nnz * p.elem_bytes()
}

/// Lowers tile plans of S × D into an instruction stream.
///
/// `dense` is in original row order; row i is placed at `col_perm[i]`.
/// `row_perm` maps original output rows to permuted ones. Output tiles are
/// visited row-block-major, then by column chunk; within an output tile the
/// reduction runs over the block's tiles in ascending tile column.
pub fn compile(
    plans: &[TilePlan],
    dense: &DenseMatrix,
    row_perm: &[u32],
    col_perm: &[u32],
    params: &CompileParams,
) -> Result<Program> {
    if params.tile_rows == 0 || params.chunk_width == 0 || params.vrf_depth == 0 {
        return Err(Error::Parameter(
            "tile_rows, chunk_width and vrf_depth must be >= 1".into(),
        ));
    }
    let dense = dense.permute_rows(col_perm)?;
    crate::graph::check_perm(row_perm, row_perm.len())?;
    let out_rows = row_perm.len();
    let out_cols = dense.n_cols();

    let mut tiles = plans.to_vec();
    tiles.sort_by_key(|p| (p.tile.tile_row, p.tile.tile_col));
    for (id, p) in tiles.iter().enumerate() {
        let t = &p.tile;
        if (t.tile_row + 1) * params.tile_rows > out_rows.next_multiple_of(params.tile_rows)
            || p.dense_row_ids
                .iter()
                .any(|&r| r as usize >= dense.n_rows())
        {
            return Err(Error::Compile {
                tile: id,
                msg: format!(
                    "tile ({},{}) lies outside the operands",
                    t.tile_row, t.tile_col
                ),
            });
        }
        let block_rows = params
            .tile_rows
            .min(out_rows.saturating_sub(t.tile_row * params.tile_rows));
        if let Some(r) = t.rows.iter().find(|r| r.parent_row as usize >= block_rows) {
            return Err(Error::Compile {
                tile: id,
                msg: format!(
                    "parent row {} outside a {block_rows}-row block",
                    r.parent_row
                ),
            });
        }
        if p.k > params.vrf_depth {
            return Err(Error::Compile {
                tile: id,
                msg: format!("k={} exceeds VRF depth {}", p.k, params.vrf_depth),
            });
        }
        let dyn_cap = params.vrf_depth - p.k;
        for (s, row) in t.rows.iter().enumerate() {
            let misses = row
                .col_idx
                .iter()
                .filter(|&&c| !p.fixed_set.contains(&p.global_row(params.tile_rows, c)))
                .count();
            if misses > dyn_cap {
                return Err(Error::Compile {
                    tile: id,
                    msg: format!(
                        "sub-row {s} needs {misses} dynamic rows, only {dyn_cap} available (tau/D mismatch)"
                    ),
                });
            }
        }
    }

    let n_chunks = out_cols.div_ceil(params.chunk_width);
    let mut code = Vec::new();
    let mut start = 0;
    while start < tiles.len() {
        let block = tiles[start].tile.tile_row;
        let end = start
            + tiles[start..]
                .iter()
                .take_while(|p| p.tile.tile_row == block)
                .count();
        let block_rows = params.tile_rows.min(out_rows - block * params.tile_rows);
        for chunk in 0..n_chunks {
            let width = params
                .chunk_width
                .min(out_cols - chunk * params.chunk_width) as u64;
            let mut has_partial = vec![false; params.tile_rows];
            for (id, tile) in tiles.iter().enumerate().take(end).skip(start) {
                emit_round(
                    &mut code,
                    tile,
                    id as u32,
                    chunk as u32,
                    width,
                    id + 1 == end,
                    &mut has_partial,
                    params,
                );
            }
            code.push(Instruction::StD {
                block: block as u32,
                chunk: chunk as u32,
                bytes: block_rows as u64 * width * 4,
            });
        }
        start = end;
    }

    Ok(Program {
        instructions: code,
        tiles,
        dense,
        out_rows,
        out_cols,
        row_perm: row_perm.to_vec(),
        tile_rows: params.tile_rows,
        chunk_width: params.chunk_width,
        element_bits: params.element_bits,
        vrf_depth: params.vrf_depth,
    })
}

#[allow(clippy::too_many_arguments)]
fn emit_round(
    code: &mut Vec<Instruction>,
    plan: &TilePlan,
    tile: u32,
    chunk: u32,
    width: u64,
    last: bool,
    has_partial: &mut [bool],
    p: &CompileParams,
) {
    code.push(Instruction::Config {
        tile,
        k: plan.k as u32,
    });
    code.push(Instruction::LdS {
        tile,
        bytes: sparse_tile_bytes(plan, p),
    });
    code.push(Instruction::LdD {
        tile,
        chunk,
        bytes: plan.dense_row_ids.len() as u64 * width * p.elem_bytes(),
    });
    code.push(Instruction::CalIdx { tile });
    code.push(Instruction::MvFixed {
        tile,
        rows: plan.fixed_set.clone(),
    });
    let fixed: BTreeSet<u32> = plan.fixed_set.iter().copied().collect();
    let mut slots: [BTreeSet<u32>; 2] = Default::default();
    for (s, row) in plan.tile.rows.iter().enumerate() {
        let slot = match p.mode {
            VrfMode::Single => 0,
            VrfMode::Double => (s % 2) as u8,
        };
        let demand: BTreeSet<u32> = row
            .col_idx
            .iter()
            .map(|&c| plan.global_row(p.tile_rows, c))
            .filter(|g| !fixed.contains(g))
            .collect();
        let resident = &mut slots[slot as usize];
        let rows: Vec<u32> = if p.dedup_dyn {
            demand.difference(resident).copied().collect()
        } else {
            demand.iter().copied().collect()
        };
        *resident = demand;
        if !rows.is_empty() {
            code.push(Instruction::MvDyn {
                tile,
                subrow: s as u32,
                slot,
                rows,
            });
        }
        let parent = row.parent_row as usize;
        code.push(Instruction::Cmp {
            tile,
            subrow: s as u32,
            chunk,
            slot,
            accumulate: has_partial[parent],
            dest: if last { Region::Result } else { Region::Temp },
        });
        has_partial[parent] = true;
    }
}
