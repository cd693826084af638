use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::{MachineConfig, TimingParams};
use crate::error::{Error, Result};
use crate::isa::{Instruction, Program};
use crate::metrics::EventCounters;

/// Issue/completion window of one committed instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub pc: usize,
    pub start: u64,
    pub end: u64,
}

/// Text trace, one line per instruction: `start end OPCODE operands`.
pub fn format_trace(prog: &Program, trace: &[TraceEntry]) -> String {
    let mut s = String::new();
    for e in trace {
        let text = prog.instructions[e.pc].to_string();
        let (op, args) = text.split_once(' ').unwrap_or((&text, ""));
        let _ = writeln!(s, "{} {} {} {}", e.start, e.end, op, args);
    }
    s
}

/// Single FIFO DRAM channel. A transfer occupies the channel for
/// ceil(bytes / bandwidth) cycles and completes `latency` cycles later.
struct Dram {
    free: u64,
    latency: u64,
    t: TimingParams,
}

impl Dram {
    fn new(t: &TimingParams) -> Self {
        Dram {
            free: 0,
            latency: t.dram_latency_cycles,
            t: *t,
        }
    }

    /// Returns (start, completion).
    fn request(&mut self, at: u64, bytes: u64) -> (u64, u64) {
        let start = at.max(self.free);
        let xfer = self.t.transfer_cycles(bytes);
        self.free = start + xfer;
        (start, start + self.latency + xfer)
    }
}

#[derive(Default)]
struct Step {
    dyn_pc: Option<usize>,
    dyn_rows: u64,
    /// Dynamic rows resident for this sub-row (misses outside the fixed set).
    resident: u64,
    cmp_pc: usize,
    nnz: u64,
    width: usize,
    accumulate: bool,
    slot: usize,
}

#[derive(Default)]
struct Round {
    config_pc: Option<usize>,
    lds: Option<(usize, u64)>,
    ldd: Option<(usize, u64)>,
    ldd_rows: u64,
    cal_pc: Option<usize>,
    mvf: Option<(usize, u64)>,
    k: u64,
    nnz: u64,
    steps: Vec<Step>,
    stores: Vec<(usize, u64, u64)>, // pc, bytes, rows
}

fn split_rounds(prog: &Program) -> Result<Vec<Round>> {
    let mut rounds: Vec<Round> = Vec::new();
    let bad = |pc: usize, msg: &str| Error::IllegalProgram {
        pc,
        msg: msg.to_string(),
    };
    for (pc, ins) in prog.instructions.iter().enumerate() {
        if let Some(t) = ins.tile() {
            if t as usize >= prog.tiles.len() {
                return Err(bad(pc, "tile not in directory"));
            }
        }
        if let Instruction::Config { tile, k } = ins {
            rounds.push(Round {
                config_pc: Some(pc),
                k: *k as u64,
                nnz: prog.tiles[*tile as usize].tile.nnz() as u64,
                ..Default::default()
            });
            continue;
        }
        let Some(r) = rounds.last_mut() else {
            return Err(bad(pc, "instruction before the first CONFIG"));
        };
        match ins {
            Instruction::LdS { bytes, .. } => r.lds = Some((pc, *bytes)),
            Instruction::LdD { tile, bytes, .. } => {
                r.ldd = Some((pc, *bytes));
                r.ldd_rows = prog.tiles[*tile as usize].dense_row_ids.len() as u64;
            }
            Instruction::CalIdx { .. } => r.cal_pc = Some(pc),
            Instruction::MvFixed { rows, .. } => r.mvf = Some((pc, rows.len() as u64)),
            Instruction::MvDyn { rows, .. } => r.steps.push(Step {
                dyn_pc: Some(pc),
                dyn_rows: rows.len() as u64,
                cmp_pc: usize::MAX,
                ..Default::default()
            }),
            Instruction::Cmp {
                tile,
                subrow,
                chunk,
                slot,
                accumulate,
                ..
            } => {
                let plan = &prog.tiles[*tile as usize];
                let sr = prog
                    .subrow(*tile, *subrow)
                    .ok_or_else(|| bad(pc, "sub-row not in tile"))?;
                let resident = sr
                    .col_idx
                    .iter()
                    .filter(|&&c| !plan.fixed_set.contains(&plan.global_row(prog.tile_rows, c)))
                    .count() as u64;
                let (lo, hi) = prog.chunk_cols(*chunk as usize);
                let pending = matches!(r.steps.last(), Some(s) if s.cmp_pc == usize::MAX);
                if !pending {
                    r.steps.push(Step::default());
                }
                let s = r.steps.last_mut().unwrap();
                s.cmp_pc = pc;
                s.nnz = sr.nnz() as u64;
                s.width = hi.saturating_sub(lo);
                s.accumulate = *accumulate;
                s.slot = (*slot as usize).min(1);
                s.resident = resident;
            }
            Instruction::StD { bytes, block, .. } => {
                let rows = prog.tile_rows.min(
                    prog.out_rows
                        .saturating_sub(*block as usize * prog.tile_rows),
                );
                r.stores.push((pc, *bytes, rows as u64));
            }
            Instruction::Config { .. } => unreachable!(),
        }
    }
    for r in &rounds {
        if r.steps.iter().any(|s| s.cmp_pc == usize::MAX) {
            return Err(bad(
                r.config_pc.unwrap_or(0),
                "MV_DYN without a following CMP",
            ));
        }
    }
    Ok(rounds)
}

/// Consecutive rounds sharing one buffer slot; each group holds at least one round.
fn group_rounds(
    rounds: &[Round],
    dense_slot: u64,
    sparse_slot: u64,
) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let (mut d, mut s) = (0u64, 0u64);
    for (i, r) in rounds.iter().enumerate() {
        let rd = r.ldd.map_or(0, |x| x.1);
        let rs = r.lds.map_or(0, |x| x.1);
        if i > start && (d + rd > dense_slot || s + rs > sparse_slot) {
            groups.push(start..i);
            start = i;
            d = 0;
            s = 0;
        }
        d += rd;
        s += rs;
    }
    if start < rounds.len() {
        groups.push(start..rounds.len());
    }
    groups
}

/// Cycle-level timing of a compiled program. Returns counters and, when
/// requested, a per-instruction trace in program order.
pub fn simulate_timing(
    prog: &Program,
    mc: &MachineConfig,
    t: &TimingParams,
    want_trace: bool,
) -> Result<(EventCounters, Vec<TraceEntry>)> {
    mc.validate()?;
    t.validate()?;
    let rounds = split_rounds(prog)?;
    let groups = group_rounds(&rounds, mc.dense_slot_bytes(), mc.sparse_slot_bytes());
    let mut c = EventCounters::default();
    for ins in &prog.instructions {
        c.instr_counts[ins.opcode().index()] += 1;
    }
    let mut spans = vec![(0u64, 0u64); prog.instructions.len()];
    let mut dram = Dram::new(t);
    let mut finish = 0u64;

    let mut lds_done = vec![0u64; rounds.len()];
    let mut ldd_done = vec![0u64; rounds.len()];
    let issue_loads = |g: usize,
                       at: u64,
                       dram: &mut Dram,
                       spans: &mut [(u64, u64)],
                       c: &mut EventCounters,
                       lds: &mut [u64],
                       ldd: &mut [u64]| {
        for ri in groups[g].clone() {
            let r = &rounds[ri];
            for (which, done) in [(r.lds, &mut lds[ri]), (r.ldd, &mut ldd[ri])] {
                *done = at;
                if let Some((pc, bytes)) = which {
                    let (s, e) = dram.request(at, bytes);
                    spans[pc] = (s, e);
                    *done = e;
                    c.dram_read_bits += bytes * 8;
                }
            }
        }
    };
    for g in 0..groups.len().min(mc.m) {
        issue_loads(
            g,
            0,
            &mut dram,
            &mut spans,
            &mut c,
            &mut lds_done,
            &mut ldd_done,
        );
    }

    let dyn_cap = |k: u64| (mc.vrf_depth as u64).saturating_sub(k);
    let (mut port, mut decoder, mut lanes) = (0u64, 0u64, 0u64);
    // per slot: end of the last CMP that used it and its resident row count
    let mut slot_end = [0u64; 2];
    let mut slot_rows = [0u64; 2];
    for g in 0..groups.len() {
        let mut group_end = 0u64;
        for ri in groups[g].clone() {
            let r = &rounds[ri];
            if let Some(pc) = r.config_pc {
                spans[pc] = (port, port + t.config_cycles);
                port += t.config_cycles;
            }
            let mut cal_end = lds_done[ri];
            if let Some(pc) = r.cal_pc {
                let s = decoder.max(lds_done[ri]);
                cal_end = s + r.nnz * t.cal_idx_cycles_per_nnz;
                decoder = cal_end;
                spans[pc] = (s, cal_end);
                c.sram_sparse_accesses += r.nnz;
            }
            if r.lds.is_some() {
                c.sram_sparse_accesses += r.nnz;
            }
            c.sram_dense_accesses += r.ldd_rows;
            let s = port.max(ldd_done[ri]).max(cal_end);
            let rows = r.mvf.map_or(0, |x| x.1);
            let mvf_end = s + rows * t.mv_cycles_per_row;
            if let Some((pc, _)) = r.mvf {
                spans[pc] = (s, mvf_end);
            }
            port = mvf_end;
            c.vrf_writes += rows;
            c.sram_dense_accesses += rows;
            group_end = group_end.max(mvf_end);

            let mut round_end = mvf_end;
            for st in &r.steps {
                let mut ready = mvf_end;
                if let Some(pc) = st.dyn_pc {
                    let other = 1 - st.slot;
                    let mut dep = slot_end[st.slot];
                    if st.resident + slot_rows[other] > dyn_cap(r.k) {
                        dep = dep.max(slot_end[other]);
                    }
                    let s = port.max(dep);
                    let e = s + st.dyn_rows * t.mv_cycles_per_row;
                    spans[pc] = (s, e);
                    port = e;
                    ready = ready.max(e);
                    c.vrf_writes += st.dyn_rows;
                    c.vrf_miss_count += st.dyn_rows;
                    c.sram_dense_accesses += st.dyn_rows;
                }
                let lf = mc.lane_factor(st.width);
                let s = lanes.max(ready);
                let e = s + st.nnz * lf + t.writeback_cycles;
                spans[st.cmp_pc] = (s, e);
                lanes = e;
                slot_end[st.slot] = e;
                slot_rows[st.slot] = st.resident;
                c.vrf_reads += st.nnz;
                c.mac_ops += st.nnz * lf;
                c.sram_dense_accesses += 1 + st.accumulate as u64;
                round_end = round_end.max(e);
            }
            group_end = group_end.max(round_end);
            for &(pc, bytes, rows) in &r.stores {
                let (s, e) = dram.request(round_end, bytes);
                spans[pc] = (s, e);
                c.dram_write_bits += bytes * 8;
                c.sram_dense_accesses += rows;
                finish = finish.max(e);
            }
        }
        finish = finish.max(group_end);
        if g + mc.m < groups.len() {
            issue_loads(
                g + mc.m,
                group_end,
                &mut dram,
                &mut spans,
                &mut c,
                &mut lds_done,
                &mut ldd_done,
            );
        }
    }
    for &(s, e) in &spans {
        finish = finish.max(e.max(s));
    }
    c.cycles = finish;
    let trace = if want_trace {
        spans
            .iter()
            .enumerate()
            .map(|(pc, &(start, end))| TraceEntry { pc, start, end })
            .collect()
    } else {
        Vec::new()
    };
    Ok((c, trace))
}
