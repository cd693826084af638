use serde::{Deserialize, Serialize};

use super::EventCounters;
use crate::error::{Error, Result};

/// Per-access SRAM energy for buffers up to `max_bytes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SramTier {
    pub max_bytes: u64,
    pub pj_per_access: f64,
}

/// Linear energy model coefficients. SRAM access energy grows with buffer
/// capacity through a tier table; capacities above the last tier use it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyCoeffs {
    pub dram_pj_per_bit: f64,
    pub sram_tiers: Vec<SramTier>,
    pub vrf_pj_per_access: f64,
    pub mac_pj_per_op: f64,
    pub leakage_pj_per_cycle: f64,
}

impl Default for EnergyCoeffs {
    fn default() -> Self {
        let tier = |max_bytes, pj_per_access| SramTier {
            max_bytes,
            pj_per_access,
        };
        EnergyCoeffs {
            dram_pj_per_bit: 7.0,
            sram_tiers: vec![
                tier(1 << 10, 0.5),
                tier(8 << 10, 1.2),
                tier(64 << 10, 4.0),
                tier(1 << 20, 20.0),
                tier(u64::MAX, 50.0),
            ],
            vrf_pj_per_access: 0.2,
            mac_pj_per_op: 0.5,
            leakage_pj_per_cycle: 0.5,
        }
    }
}

impl EnergyCoeffs {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.dram_pj_per_bit,
            self.vrf_pj_per_access,
            self.mac_pj_per_op,
            self.leakage_pj_per_cycle,
        ];
        if scalars.iter().any(|v| v.is_nan() || *v < 0.0)
            || self
                .sram_tiers
                .iter()
                .any(|t| t.pj_per_access.is_nan() || t.pj_per_access < 0.0)
        {
            return Err(Error::Config("energy coefficients must be >= 0".into()));
        }
        if self.sram_tiers.is_empty() {
            return Err(Error::Config("energy.sram_tiers must not be empty".into()));
        }
        if self
            .sram_tiers
            .windows(2)
            .any(|w| w[0].max_bytes >= w[1].max_bytes)
        {
            return Err(Error::Config(
                "energy.sram_tiers must have increasing max_bytes".into(),
            ));
        }
        Ok(())
    }

    pub fn sram_pj_per_access(&self, capacity_bytes: u64) -> f64 {
        self.sram_tiers
            .iter()
            .find(|t| capacity_bytes <= t.max_bytes)
            .or(self.sram_tiers.last())
            .map_or(0.0, |t| t.pj_per_access)
    }
}

/// Energy by source, in pJ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dram: f64,
    pub sram: f64,
    pub vrf: f64,
    pub mac: f64,
    pub leakage: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.dram + self.sram + self.vrf + self.mac + self.leakage
    }
}

/// Buffer capacities that select the SRAM energy tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferSizes {
    pub dense_bytes: u64,
    pub sparse_bytes: u64,
}

pub fn energy(c: &EventCounters, coeffs: &EnergyCoeffs, buffers: BufferSizes) -> EnergyBreakdown {
    EnergyBreakdown {
        dram: c.dram_bits() as f64 * coeffs.dram_pj_per_bit,
        sram: c.sram_dense_accesses as f64 * coeffs.sram_pj_per_access(buffers.dense_bytes)
            + c.sram_sparse_accesses as f64 * coeffs.sram_pj_per_access(buffers.sparse_bytes),
        vrf: (c.vrf_reads + c.vrf_writes) as f64 * coeffs.vrf_pj_per_access,
        mac: c.mac_ops as f64 * coeffs.mac_pj_per_op,
        leakage: c.cycles as f64 * coeffs.leakage_pj_per_cycle,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: BufferSizes = BufferSizes {
        dense_bytes: 2048,
        sparse_bytes: 256,
    };

    #[test]
    fn pure_dram_bits() {
        let c = EventCounters {
            dram_read_bits: 1024,
            ..Default::default()
        };
        let e = energy(&c, &EnergyCoeffs::default(), SMALL);
        assert_eq!(e.dram, 7168.0);
        assert_eq!(e.total(), 7168.0);
    }

    #[test]
    fn zero_counters_zero_energy() {
        let e = energy(&EventCounters::default(), &EnergyCoeffs::default(), SMALL);
        assert_eq!(e.total(), 0.0);
    }

    #[test]
    fn linear_in_counters() {
        let c = EventCounters {
            cycles: 10,
            dram_read_bits: 3,
            dram_write_bits: 5,
            sram_sparse_accesses: 7,
            sram_dense_accesses: 11,
            vrf_reads: 13,
            vrf_writes: 17,
            vrf_miss_count: 2,
            mac_ops: 19,
            instr_counts: [1; 8],
        };
        let k = EnergyCoeffs::default();
        let one = energy(&c, &k, SMALL);
        let two = energy(&c.scaled(2), &k, SMALL);
        assert_eq!(two.dram, 2.0 * one.dram);
        assert_eq!(two.sram, 2.0 * one.sram);
        assert_eq!(two.vrf, 2.0 * one.vrf);
        assert_eq!(two.mac, 2.0 * one.mac);
        assert_eq!(two.leakage, 2.0 * one.leakage);
        let merged = energy(&(c.clone() + c), &k, SMALL);
        assert_eq!(merged, two);
    }

    #[test]
    fn tiers_grow_with_capacity() {
        let k = EnergyCoeffs::default();
        assert!(k.sram_pj_per_access(256) < k.sram_pj_per_access(2048));
        assert!(k.sram_pj_per_access(2048) < k.sram_pj_per_access(512 << 10));
        assert!(k.validate().is_ok());
        let bad = EnergyCoeffs {
            mac_pj_per_op: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
