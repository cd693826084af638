//! Machine, timing, baseline, energy and area parameters, loadable from a
//! TOML file with sections `[machine]`, `[timing]`, `[grow]`, `[energy]`, `[area]`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::isa::CompileParams;
use crate::metrics::{AreaModel, BufferSizes, EnergyCoeffs, HwShape};
use crate::preprocess::{KPolicy, PlanParams, VrfMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineConfig {
    pub vlen_bits: u32,
    /// 8 or 32.
    pub element_bits: u32,
    pub vrf_depth: usize,
    pub vrf_mode: VrfMode,
    /// Per-row nonzero bound enforced by vertex-cut.
    pub tau: usize,
    /// Start point of the top-k search, as a fraction of tau.
    pub pct: f64,
    pub vertex_cut: bool,
    pub k_policy: KPolicy,
    pub dense_buffer_bytes: u64,
    pub sparse_buffer_bytes: u64,
    /// Multi-buffer slots in the rows-to-compute region.
    pub m: usize,
    pub tile_rows: usize,
    pub dedup_dyn: bool,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            vlen_bits: 128,
            element_bits: 8,
            vrf_depth: 12,
            vrf_mode: VrfMode::Double,
            tau: 6,
            pct: 0.5,
            vertex_cut: true,
            k_policy: KPolicy::TopK,
            dense_buffer_bytes: 2048,
            sparse_buffer_bytes: 256,
            m: 6,
            tile_rows: 16,
            dedup_dyn: false,
        }
    }
}

impl MachineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.element_bits != 8 && self.element_bits != 32 {
            return bad(format!(
                "element_bits must be 8 or 32, got {}",
                self.element_bits
            ));
        }
        if self.vlen_bits == 0
            || !self.vlen_bits.is_multiple_of(self.element_bits)
            || !self.vlen_bits.is_multiple_of(32)
        {
            return bad(format!(
                "vlen_bits {} must be a positive multiple of 32 and of element_bits",
                self.vlen_bits
            ));
        }
        if self.vrf_depth == 0 || self.tau == 0 || self.m == 0 || self.tile_rows == 0 {
            return bad("vrf_depth, tau, m and tile_rows must be >= 1".into());
        }
        if !(self.pct > 0.0 && self.pct <= 1.0) {
            return bad(format!("pct must be in (0, 1], got {}", self.pct));
        }
        if self.dense_buffer_bytes < self.m as u64 || self.sparse_buffer_bytes < self.m as u64 {
            return bad("each buffer needs at least one byte per slot".into());
        }
        Ok(())
    }

    /// Dense elements held by one VRF row.
    pub fn chunk_width(&self) -> usize {
        (self.vlen_bits / self.element_bits) as usize
    }

    /// Lane cycles per nonzero for a dense row segment of `width` elements.
    pub fn lane_factor(&self, width: usize) -> u64 {
        (width as u64 * self.element_bits as u64)
            .div_ceil(self.vlen_bits as u64)
            .max(1)
    }

    pub fn dense_slot_bytes(&self) -> u64 {
        self.dense_buffer_bytes / self.m as u64
    }

    pub fn sparse_slot_bytes(&self) -> u64 {
        self.sparse_buffer_bytes / self.m as u64
    }

    pub fn plan_params(&self) -> PlanParams {
        PlanParams {
            tile_rows: self.tile_rows,
            tau: self.tau,
            pct: self.pct,
            depth: self.vrf_depth,
            mode: self.vrf_mode,
            k_policy: self.k_policy,
        }
    }

    pub fn compile_params(&self) -> CompileParams {
        CompileParams {
            tile_rows: self.tile_rows,
            chunk_width: self.chunk_width(),
            element_bits: self.element_bits,
            vrf_depth: self.vrf_depth,
            mode: self.vrf_mode,
            dedup_dyn: self.dedup_dyn,
        }
    }

    pub fn hw_shape(&self) -> HwShape {
        HwShape {
            dense_buffer_bytes: self.dense_buffer_bytes,
            sparse_buffer_bytes: self.sparse_buffer_bytes,
            vrf_bytes: self.vrf_depth as u64 * self.vlen_bits as u64 / 8,
            lanes: self.vlen_bits as u64 / 32,
        }
    }

    pub fn buffer_sizes(&self) -> BufferSizes {
        BufferSizes {
            dense_bytes: self.dense_buffer_bytes,
            sparse_bytes: self.sparse_buffer_bytes,
        }
    }
}

/// Cycle costs shared by both simulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    pub dram_latency_cycles: u64,
    pub dram_bytes_per_cycle: u64,
    pub mv_cycles_per_row: u64,
    pub writeback_cycles: u64,
    pub config_cycles: u64,
    pub cal_idx_cycles_per_nnz: u64,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            dram_latency_cycles: 100,
            dram_bytes_per_cycle: 128,
            mv_cycles_per_row: 1,
            writeback_cycles: 1,
            config_cycles: 1,
            cal_idx_cycles_per_nnz: 1,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        if self.dram_bytes_per_cycle == 0 {
            return Err(Error::Config("dram_bytes_per_cycle must be >= 1".into()));
        }
        Ok(())
    }

    pub fn transfer_cycles(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.dram_bytes_per_cycle)
    }
}

/// Cache-centric baseline: HDN preload buffer plus run-ahead over stalled rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowConfig {
    pub dense_buffer_bytes: u64,
    pub sparse_buffer_bytes: u64,
    pub m: usize,
    pub lookahead_depth: usize,
    /// Overrides the number of preloaded high-degree rows (default: as many as fit).
    pub top_n_hdn: Option<usize>,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            dense_buffer_bytes: 2048,
            sparse_buffer_bytes: 256,
            m: 6,
            lookahead_depth: 16,
            top_n_hdn: None,
        }
    }
}

impl GrowConfig {
    /// Large-cache variant: 512 KB dense, 12 KB sparse.
    pub fn large() -> Self {
        GrowConfig {
            dense_buffer_bytes: 512 << 10,
            sparse_buffer_bytes: 12 << 10,
            m: 2273,
            ..Default::default()
        }
    }

    /// Buffers sized as `m` slots of the default per-slot capacity.
    pub fn with_m(m: usize) -> Self {
        let d = GrowConfig::default();
        GrowConfig {
            dense_buffer_bytes: d.dense_buffer_bytes * m as u64 / d.m as u64,
            sparse_buffer_bytes: d.sparse_buffer_bytes * m as u64 / d.m as u64,
            m,
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookahead_depth == 0 || self.m == 0 {
            return Err(Error::Config(
                "grow.lookahead_depth and grow.m must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Dense rows of `row_bytes` that fit the buffer, unless overridden.
    pub fn hdn_rows(&self, row_bytes: u64) -> usize {
        self.top_n_hdn
            .unwrap_or((self.dense_buffer_bytes / row_bytes.max(1)) as usize)
    }

    pub fn hw_shape(&self, vlen_bits: u32) -> HwShape {
        HwShape {
            dense_buffer_bytes: self.dense_buffer_bytes,
            sparse_buffer_bytes: self.sparse_buffer_bytes,
            vrf_bytes: 0,
            lanes: vlen_bits as u64 / 32,
        }
    }

    pub fn buffer_sizes(&self) -> BufferSizes {
        BufferSizes {
            dense_bytes: self.dense_buffer_bytes,
            sparse_bytes: self.sparse_buffer_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub machine: MachineConfig,
    pub timing: TimingParams,
    pub grow: GrowConfig,
    pub energy: EnergyCoeffs,
    pub area: AreaModel,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.machine.validate()?;
        self.timing.validate()?;
        self.grow.validate()?;
        self.energy.validate()?;
        self.area.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// First 16 hex digits of SHA-256 over the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = Config::default();
        c.validate().unwrap();
        let back = Config::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = Config::from_toml("[machine]\nvrf_mode = \"single\"\nvrf_depth = 16\n").unwrap();
        assert_eq!(c.machine.vrf_mode, VrfMode::Single);
        assert_eq!(c.machine.m, 6);
        assert_eq!(c.timing.dram_latency_cycles, 100);
        assert_ne!(c.hash(), Config::default().hash());
    }

    #[test]
    fn fixed_k_policy_parses() {
        let c = Config::from_toml("[machine]\nk_policy = { fixed = 3 }\n").unwrap();
        assert_eq!(c.machine.k_policy, KPolicy::Fixed(3));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Config::from_toml("[machine]\nelement_bits = 16\n").is_err());
        assert!(Config::from_toml("[machine]\nvlen_bits = 100\n").is_err());
        assert!(Config::from_toml("[machine]\nm = 0\n").is_err());
        assert!(Config::from_toml("[timing]\ndram_bytes_per_cycle = 0\n").is_err());
        assert!(Config::from_toml("[machine]\nbogus = 1\n").is_err());
    }

    #[test]
    fn derived_quantities() {
        let m = MachineConfig::default();
        assert_eq!(m.chunk_width(), 16);
        assert_eq!(m.lane_factor(16), 1);
        assert_eq!(m.hw_shape().vrf_bytes, 192);
        assert_eq!(GrowConfig::default().hdn_rows(16), 128);
        assert_eq!(GrowConfig::with_m(1).dense_buffer_bytes, 341);
    }
}
