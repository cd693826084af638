use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear area model in μm². The defaults are a fit: they reproduce a
/// 39.43K μm² total with ~59.8% on-chip memory (buffers + VRF) for the
/// default machine (2 KB + 256 B buffers, 12 × 128-bit VRF, four 32-bit lanes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AreaModel {
    pub buffer_area_per_byte: f64,
    pub vrf_area_per_byte: f64,
    pub lane_area_per_lane: f64,
    pub control_area_fixed: f64,
    pub decoder_dma_area_fixed: f64,
}

impl Default for AreaModel {
    fn default() -> Self {
        AreaModel {
            buffer_area_per_byte: 7.547,
            vrf_area_per_byte: 32.24,
            lane_area_per_lane: 571.7,
            control_area_fixed: 6427.1,
            decoder_dma_area_fixed: 7137.732,
        }
    }
}

/// Hardware quantities the area model scales with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HwShape {
    pub dense_buffer_bytes: u64,
    pub sparse_buffer_bytes: u64,
    pub vrf_bytes: u64,
    /// 32-bit lanes.
    pub lanes: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AreaBreakdown {
    pub buffers: f64,
    pub vrf: f64,
    pub lanes: f64,
    pub control: f64,
    pub decoder_dma: f64,
}

impl AreaBreakdown {
    pub fn total(&self) -> f64 {
        self.buffers + self.vrf + self.lanes + self.control + self.decoder_dma
    }

    /// Fraction of area taken by buffers and VRF.
    pub fn memory_share(&self) -> f64 {
        let t = self.total();
        if t == 0.0 {
            0.0
        } else {
            (self.buffers + self.vrf) / t
        }
    }
}

impl AreaModel {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.buffer_area_per_byte,
            self.vrf_area_per_byte,
            self.lane_area_per_lane,
            self.control_area_fixed,
            self.decoder_dma_area_fixed,
        ];
        if all.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::Config("area coefficients must be >= 0".into()));
        }
        Ok(())
    }

    pub fn breakdown(&self, hw: &HwShape) -> AreaBreakdown {
        AreaBreakdown {
            buffers: (hw.dense_buffer_bytes + hw.sparse_buffer_bytes) as f64
                * self.buffer_area_per_byte,
            vrf: hw.vrf_bytes as f64 * self.vrf_area_per_byte,
            lanes: hw.lanes as f64 * self.lane_area_per_lane,
            control: self.control_area_fixed,
            decoder_dma: self.decoder_dma_area_fixed,
        }
    }

    pub fn area(&self, hw: &HwShape) -> f64 {
        self.breakdown(hw).total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_machine_anchor() {
        let hw = HwShape {
            dense_buffer_bytes: 2048,
            sparse_buffer_bytes: 256,
            vrf_bytes: 12 * 16,
            lanes: 4,
        };
        let b = AreaModel::default().breakdown(&hw);
        assert!((b.total() - 39_430.0).abs() < 1.0);
        assert!((b.memory_share() - 0.598).abs() < 0.002);
    }

    #[test]
    fn zero_capacity_leaves_fixed_terms() {
        let m = AreaModel::default();
        let hw = HwShape {
            dense_buffer_bytes: 0,
            sparse_buffer_bytes: 0,
            vrf_bytes: 0,
            lanes: 0,
        };
        assert_eq!(m.area(&hw), m.control_area_fixed + m.decoder_dma_area_fixed);
    }
}
