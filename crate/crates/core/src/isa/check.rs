use std::collections::BTreeSet;

use super::{Instruction, Program};
use crate::error::{Error, Result};

/// Static dataflow check: walks the stream tracking which dense rows each VRF
/// region holds and verifies every CMP only touches resident rows, every
/// operand names an existing tile / sub-row, and no move overfills the VRF.
pub fn check_program(prog: &Program) -> Result<()> {
    let fault = |pc: usize, msg: String| Error::IllegalProgram { pc, msg };
    let mut fixed: BTreeSet<u32> = BTreeSet::new();
    let mut slots: [BTreeSet<u32>; 2] = Default::default();
    let n_chunks = prog.n_chunks() as u32;
    for (pc, ins) in prog.instructions.iter().enumerate() {
        if let Some(t) = ins.tile() {
            if t as usize >= prog.tiles.len() {
                return Err(fault(pc, format!("tile {t} not in directory")));
            }
        }
        match ins {
            Instruction::MvFixed { rows, .. } => {
                if rows.len() > prog.vrf_depth {
                    return Err(fault(pc, format!("{} fixed rows exceed depth", rows.len())));
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
                let Some(sr) = prog.subrow(*tile, *subrow) else {
                    return Err(fault(
                        pc,
                        format!("sub-row {subrow} missing in tile {tile}"),
                    ));
                };
                if *slot > 1 {
                    return Err(fault(pc, format!("slot {slot} out of range")));
                }
                let plan = &prog.tiles[*tile as usize];
                let demand: BTreeSet<u32> = sr
                    .col_idx
                    .iter()
                    .map(|&c| plan.global_row(prog.tile_rows, c))
                    .collect();
                let s = &mut slots[*slot as usize];
                let mut next: BTreeSet<u32> = s.intersection(&demand).copied().collect();
                next.extend(rows.iter().copied());
                if fixed.len() + next.len() > prog.vrf_depth {
                    return Err(fault(
                        pc,
                        format!(
                            "{} fixed + {} dynamic rows exceed depth",
                            fixed.len(),
                            next.len()
                        ),
                    ));
                }
                *s = next;
            }
            Instruction::Cmp {
                tile,
                subrow,
                chunk,
                slot,
                ..
            } => {
                let Some(sr) = prog.subrow(*tile, *subrow) else {
                    return Err(fault(
                        pc,
                        format!("sub-row {subrow} missing in tile {tile}"),
                    ));
                };
                if *slot > 1 || *chunk >= n_chunks.max(1) {
                    return Err(fault(pc, "slot or chunk out of range".into()));
                }
                let plan = &prog.tiles[*tile as usize];
                for &c in &sr.col_idx {
                    let g = plan.global_row(prog.tile_rows, c);
                    if !fixed.contains(&g) && !slots[*slot as usize].contains(&g) {
                        return Err(fault(pc, format!("dense row {g} not resident")));
                    }
                }
            }
            Instruction::LdD { chunk, .. } | Instruction::StD { chunk, .. } => {
                if *chunk >= n_chunks.max(1) {
                    return Err(fault(pc, format!("chunk {chunk} out of range")));
                }
            }
            Instruction::Config { .. } | Instruction::LdS { .. } | Instruction::CalIdx { .. } => {}
        }
    }
    Ok(())
}
