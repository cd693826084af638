//! Cache-centric comparison machine: per-group high-degree-row preload,
//! per-nonzero execution and run-ahead over rows stalled on a miss.

use std::collections::{BTreeMap, HashSet};

use crate::config::{GrowConfig, MachineConfig, TimingParams};
use crate::error::{Error, Result};
use crate::graph::DenseMatrix;
use crate::metrics::EventCounters;
use crate::preprocess::SparseTile;

/// Result of a baseline run. `output` is in the tiles' (permuted) row order.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowRun {
    pub counters: EventCounters,
    pub output: DenseMatrix,
}

struct Group {
    /// (local row, nonzeros as (global column, value)), rows ascending.
    rows: Vec<(usize, Vec<(u32, i32)>)>,
    hdn: HashSet<u32>,
    sparse_bytes: u64,
}

fn build_groups(
    tiles: &[SparseTile],
    dense_rows: usize,
    tile_rows: usize,
    n_hdn: usize,
    idx_bytes: u64,
    elem_bytes: u64,
) -> Result<Vec<(usize, Group)>> {
    let mut by_block: BTreeMap<usize, BTreeMap<usize, Vec<(u32, i32)>>> = BTreeMap::new();
    for t in tiles {
        let block = by_block.entry(t.tile_row).or_default();
        for sr in &t.rows {
            let row = block.entry(sr.parent_row as usize).or_default();
            for (&c, &v) in sr.col_idx.iter().zip(&sr.values) {
                let g = t.tile_col * tile_rows + c as usize;
                if g >= dense_rows {
                    return Err(Error::Bounds {
                        what: "dense row",
                        index: g,
                        bound: dense_rows,
                    });
                }
                row.push((g as u32, v));
            }
        }
    }
    Ok(by_block
        .into_iter()
        .map(|(block, rows)| {
            let mut cnz: BTreeMap<u32, usize> = BTreeMap::new();
            let mut nnz = 0u64;
            let rows: Vec<_> = rows
                .into_iter()
                .map(|(r, mut nz)| {
                    nz.sort_unstable();
                    for &(c, _) in &nz {
                        *cnz.entry(c).or_default() += 1;
                    }
                    nnz += nz.len() as u64;
                    (r, nz)
                })
                .collect();
            let mut ranked: Vec<(u32, usize)> = cnz.into_iter().collect();
            ranked.sort_by_key(|&(c, n)| (std::cmp::Reverse(n), c));
            let hdn = ranked.iter().take(n_hdn).map(|&(c, _)| c).collect();
            let sparse_bytes = idx_bytes * (rows.len() as u64 + 1 + nnz) + nnz * elem_bytes;
            (
                block,
                Group {
                    rows,
                    hdn,
                    sparse_bytes,
                },
            )
        })
        .collect())
}

struct Dram {
    free: u64,
    t: TimingParams,
}

impl Dram {
    fn request(&mut self, at: u64, bytes: u64) -> u64 {
        let start = at.max(self.free);
        let xfer = self.t.transfer_cycles(bytes);
        self.free = start + xfer;
        start + self.t.dram_latency_cycles + xfer
    }
}

/// Simulates S × D on the baseline. `tiles` and `dense` share one permuted
/// index space; `out_rows` is the row count of S.
///
/// Each `tile_rows` row block is one group. Before a group computes, its
/// sparse data and its top-N most referenced dense rows are loaded; every
/// other nonzero fetches its dense row from DRAM when the row enters the
/// run-ahead window, which spans `lookahead_depth` rows from the oldest
/// unfinished one.
pub fn simulate_grow(
    tiles: &[SparseTile],
    dense: &DenseMatrix,
    out_rows: usize,
    tile_rows: usize,
    cfg: &GrowConfig,
    machine: &MachineConfig,
    t: &TimingParams,
) -> Result<GrowRun> {
    cfg.validate()?;
    t.validate()?;
    if tile_rows == 0 {
        return Err(Error::Parameter("tile_rows must be >= 1".into()));
    }
    let f = dense.n_cols() as u64;
    let eb = machine.element_bits as u64;
    let row_bytes = (f * eb).div_ceil(8);
    let lf = (f * eb).div_ceil(machine.vlen_bits as u64).max(1);
    let idx_bytes = match dense.n_rows() {
        0..=256 => 1,
        257..=65536 => 2,
        _ => 4,
    };
    let groups = build_groups(
        tiles,
        dense.n_rows(),
        tile_rows,
        cfg.hdn_rows(row_bytes),
        idx_bytes,
        eb.div_ceil(8),
    )?;

    let mut out = DenseMatrix::zeros(out_rows, dense.n_cols());
    let mut c = EventCounters::default();
    let mut dram = Dram { free: 0, t: *t };
    let row_cost = |nnz: u64| nnz * (t.mv_cycles_per_row + lf) + t.writeback_cycles;

    let mut lds_done = vec![0u64; groups.len()];
    let mut hdn_done = vec![0u64; groups.len()];
    if let Some((_, g0)) = groups.first() {
        lds_done[0] = dram.request(0, g0.sparse_bytes);
        hdn_done[0] = dram.request(0, g0.hdn.len() as u64 * row_bytes);
    }
    let mut prev_end = 0u64;
    let mut finish = 0u64;
    for (gi, (block, g)) in groups.iter().enumerate() {
        let start = prev_end.max(lds_done[gi]).max(hdn_done[gi]);
        let next = groups.get(gi + 1).map(|(_, n)| n);
        if let (Some(n), true) = (next, cfg.m >= 2) {
            lds_done[gi + 1] = dram.request(start, n.sparse_bytes);
        }

        let nnz: u64 = g.rows.iter().map(|(_, nz)| nz.len() as u64).sum();
        let hdn_rows = g.hdn.len() as u64;
        c.dram_read_bits += (g.sparse_bytes + hdn_rows * row_bytes) * 8;
        c.sram_sparse_accesses += 2 * nnz;
        c.sram_dense_accesses += hdn_rows + nnz;
        c.mac_ops += nnz * lf;

        // run-ahead engine
        let n = g.rows.len();
        let mut ready = vec![u64::MAX; n];
        let mut done = vec![false; n];
        let mut entered = 0usize;
        let mut oldest = 0usize;
        let mut now = start;
        while oldest < n {
            while entered < n && entered < oldest + cfg.lookahead_depth {
                let mut r = now;
                for &(col, _) in &g.rows[entered].1 {
                    if !g.hdn.contains(&col) {
                        r = r.max(dram.request(now, row_bytes));
                        c.vrf_miss_count += 1;
                        c.dram_read_bits += row_bytes * 8;
                        c.sram_dense_accesses += 1;
                    }
                }
                ready[entered] = r;
                entered += 1;
            }
            let pick = (oldest..entered).find(|&i| !done[i] && ready[i] <= now);
            let Some(i) = pick else {
                now = (oldest..entered)
                    .filter(|&i| !done[i])
                    .map(|i| ready[i])
                    .min()
                    .expect("window holds an unfinished row");
                continue;
            };
            let (local, nz) = &g.rows[i];
            now += row_cost(nz.len() as u64);
            let orow = block * tile_rows + local;
            if orow >= out_rows {
                return Err(Error::Bounds {
                    what: "output row",
                    index: orow,
                    bound: out_rows,
                });
            }
            let acc = out.row_mut(orow);
            for &(col, v) in nz {
                for (o, &d) in acc.iter_mut().zip(dense.row(col as usize)) {
                    *o = o.wrapping_add(v.wrapping_mul(d));
                }
            }
            c.sram_dense_accesses += 1;
            done[i] = true;
            while oldest < n && done[oldest] {
                oldest += 1;
            }
        }

        let end = now;
        if let Some(n) = next {
            if cfg.m < 2 {
                lds_done[gi + 1] = dram.request(end, n.sparse_bytes);
            }
            hdn_done[gi + 1] = dram.request(end, n.hdn.len() as u64 * row_bytes);
        }
        let block_rows = tile_rows.min(out_rows - block * tile_rows) as u64;
        let st_bytes = block_rows * f * 4;
        finish = finish.max(dram.request(end, st_bytes));
        c.dram_write_bits += st_bytes * 8;
        c.sram_dense_accesses += block_rows;
        prev_end = end;
        finish = finish.max(end);
    }
    c.cycles = finish;
    Ok(GrowRun {
        counters: c,
        output: out,
    })
}
