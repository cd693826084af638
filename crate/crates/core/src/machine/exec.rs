use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::DenseMatrix;
use crate::isa::{Instruction, Program, Region};

type Key = (u32, u32, u32); // (row block, chunk, row within block)

/// Runs a program without timing and returns the output in original row order.
///
/// CMP reads only rows resident in the fixed region or its paired dynamic
/// slot; a non-resident read, an accumulate without a partial sum, or an
/// overwrite of an existing partial sum is an illegal-program fault.
pub fn execute_functional(prog: &Program) -> Result<DenseMatrix> {
    let fault = |pc: usize, msg: String| Error::IllegalProgram { pc, msg };
    let tr = prog.tile_rows;
    let mut out = DenseMatrix::zeros(prog.out_rows, prog.out_cols);
    let mut fixed: BTreeSet<u32> = BTreeSet::new();
    let mut slots: [BTreeSet<u32>; 2] = Default::default();
    let mut temp: HashMap<Key, Vec<i32>> = HashMap::new();
    let mut result: HashMap<Key, Vec<i32>> = HashMap::new();

    for (pc, ins) in prog.instructions.iter().enumerate() {
        if let Some(t) = ins.tile() {
            if t as usize >= prog.tiles.len() {
                return Err(fault(pc, format!("tile {t} not in directory")));
            }
        }
        match ins {
            Instruction::Config { .. }
            | Instruction::LdS { .. }
            | Instruction::LdD { .. }
            | Instruction::CalIdx { .. } => {}
            Instruction::MvFixed { rows, .. } => {
                if rows.len() > prog.vrf_depth {
                    return Err(fault(pc, "fixed region overflow".into()));
                }
                fixed = rows.iter().copied().collect();
                slots = Default::default();
            }
            Instruction::MvDyn {
                tile,
                subrow,
                slot,
                rows,
            } => {
                let sr = prog
                    .subrow(*tile, *subrow)
                    .ok_or_else(|| fault(pc, format!("no sub-row {subrow} in tile {tile}")))?;
                let s = slots
                    .get_mut(*slot as usize)
                    .ok_or_else(|| fault(pc, format!("slot {slot} out of range")))?;
                let plan = &prog.tiles[*tile as usize];
                let demand: BTreeSet<u32> =
                    sr.col_idx.iter().map(|&c| plan.global_row(tr, c)).collect();
                s.retain(|r| demand.contains(r));
                s.extend(rows.iter().copied());
                if fixed.len() + s.len() > prog.vrf_depth {
                    return Err(fault(pc, "VRF overflow".into()));
                }
            }
            Instruction::Cmp {
                tile,
                subrow,
                chunk,
                slot,
                accumulate,
                dest,
            } => {
                let sr = prog
                    .subrow(*tile, *subrow)
                    .ok_or_else(|| fault(pc, format!("no sub-row {subrow} in tile {tile}")))?;
                let plan = &prog.tiles[*tile as usize];
                let s = slots
                    .get(*slot as usize)
                    .ok_or_else(|| fault(pc, format!("slot {slot} out of range")))?;
                if *chunk as usize >= prog.n_chunks() {
                    return Err(fault(pc, format!("chunk {chunk} out of range")));
                }
                let (lo, hi) = prog.chunk_cols(*chunk as usize);
                let mut acc = vec![0i32; hi.saturating_sub(lo)];
                for (&c, &v) in sr.col_idx.iter().zip(&sr.values) {
                    let g = plan.global_row(tr, c);
                    if !fixed.contains(&g) && !s.contains(&g) {
                        return Err(fault(pc, format!("dense row {g} not resident")));
                    }
                    let row = prog.dense.row(g as usize);
                    for (a, &x) in acc.iter_mut().zip(&row[lo..hi]) {
                        *a = a.wrapping_add(v.wrapping_mul(x));
                    }
                }
                let key = (plan.tile.tile_row as u32, *chunk, sr.parent_row);
                let existing = match dest {
                    Region::Result => result.remove(&key).or_else(|| temp.remove(&key)),
                    Region::Temp => temp.remove(&key).or_else(|| result.remove(&key)),
                };
                let merged = match (accumulate, existing) {
                    (true, Some(mut base)) => {
                        for (b, a) in base.iter_mut().zip(&acc) {
                            *b = b.wrapping_add(*a);
                        }
                        base
                    }
                    (true, None) => {
                        return Err(fault(pc, "accumulate without a partial sum".into()));
                    }
                    (false, Some(_)) => {
                        return Err(fault(pc, "overwrite of an existing partial sum".into()));
                    }
                    (false, None) => acc,
                };
                match dest {
                    Region::Result => result.insert(key, merged),
                    Region::Temp => temp.insert(key, merged),
                };
            }
            Instruction::StD { block, chunk, .. } => {
                if *chunk as usize >= prog.n_chunks() {
                    return Err(fault(pc, format!("chunk {chunk} out of range")));
                }
                let (lo, hi) = prog.chunk_cols(*chunk as usize);
                let base = *block as usize * tr;
                for p in 0..tr {
                    let key = (*block, *chunk, p as u32);
                    let vals = result.remove(&key).or_else(|| temp.remove(&key));
                    if base + p >= prog.out_rows {
                        if vals.is_some() {
                            return Err(fault(pc, format!("row {} outside output", base + p)));
                        }
                        continue;
                    }
                    if let Some(vals) = vals {
                        out.row_mut(base + p)[lo..hi].copy_from_slice(&vals);
                    }
                }
            }
        }
    }
    if !temp.is_empty() || !result.is_empty() {
        return Err(fault(
            prog.instructions.len(),
            "partial sums never stored".into(),
        ));
    }
    out.unpermute_rows(&prog.row_perm)
}
