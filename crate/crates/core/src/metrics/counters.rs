use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::isa::Opcode;

/// Raw event counts of one simulation run.
///
/// For the cache-centric baseline `vrf_miss_count` holds dense-row buffer
/// misses and the VRF counters stay zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounters {
    pub cycles: u64,
    pub dram_read_bits: u64,
    pub dram_write_bits: u64,
    pub sram_sparse_accesses: u64,
    pub sram_dense_accesses: u64,
    pub vrf_reads: u64,
    pub vrf_writes: u64,
    pub vrf_miss_count: u64,
    pub mac_ops: u64,
    /// Indexed by [`Opcode::index`].
    pub instr_counts: [u64; 8],
}

impl EventCounters {
    pub fn dram_bits(&self) -> u64 {
        self.dram_read_bits + self.dram_write_bits
    }

    pub fn instr(&self, op: Opcode) -> u64 {
        self.instr_counts[op.index()]
    }

    pub fn total_instructions(&self) -> u64 {
        self.instr_counts.iter().sum()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        let mut out = self.clone();
        for v in out.fields_mut() {
            *v *= factor;
        }
        out
    }

    fn fields_mut(&mut self) -> impl Iterator<Item = &mut u64> {
        [
            &mut self.cycles,
            &mut self.dram_read_bits,
            &mut self.dram_write_bits,
            &mut self.sram_sparse_accesses,
            &mut self.sram_dense_accesses,
            &mut self.vrf_reads,
            &mut self.vrf_writes,
            &mut self.vrf_miss_count,
            &mut self.mac_ops,
        ]
        .into_iter()
        .chain(self.instr_counts.iter_mut())
    }
}

impl Add for EventCounters {
    type Output = EventCounters;

    /// Field-wise sum (cycles included, as for back-to-back runs).
    fn add(mut self, mut rhs: EventCounters) -> EventCounters {
        for (a, b) in self.fields_mut().zip(rhs.fields_mut()) {
            *a += *b;
        }
        self
    }
}
