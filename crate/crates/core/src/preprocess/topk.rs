use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SparseTile;
use crate::error::{Error, Result};

/// How the dynamic VRF region is used: one slot, or two alternating slots
/// that let the next sub-row's rows load while the current one computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VrfMode {
    Single,
    Double,
}

impl fmt::Display for VrfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VrfMode::Single => "single",
            VrfMode::Double => "double",
        })
    }
}

impl FromStr for VrfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(VrfMode::Single),
            "double" => Ok(VrfMode::Double),
            other => Err(Error::Parameter(format!("unknown VRF mode {other:?}"))),
        }
    }
}

/// Per-sub-row miss counts, descending, when the first `k` entries of
/// `ranked` are held in the fixed region.
fn sorted_misses(tile: &SparseTile, ranked: &[u32], k: usize) -> Vec<usize> {
    let fixed = &ranked[..k.min(ranked.len())];
    let mut misses: Vec<usize> = tile
        .rows
        .iter()
        .map(|r| r.col_idx.iter().filter(|c| !fixed.contains(c)).count())
        .collect();
    misses.sort_unstable_by(|a, b| b.cmp(a));
    misses
}

pub(crate) fn fits(
    tile: &SparseTile,
    ranked: &[u32],
    k: usize,
    depth: usize,
    mode: VrfMode,
) -> bool {
    let m = sorted_misses(tile, ranked, k);
    let m0 = m.first().copied().unwrap_or(0);
    let m1 = m.get(1).copied().unwrap_or(0);
    match mode {
        VrfMode::Single => k + m0 <= depth,
        VrfMode::Double => k + m0 + m1 <= depth,
    }
}

/// Picks how many of the tile's most-referenced dense rows to pin in the
/// fixed VRF region.
///
/// Starts at ceil(tau × pct) and walks in one direction: upward while the
/// next k still fits, or downward until one fits. Returns 0 when nothing fits.
pub fn topk_fixed(tile: &SparseTile, tau: usize, pct: f64, depth: usize, mode: VrfMode) -> usize {
    let ranked = tile.columns_by_count();
    let start = ((tau as f64 * pct).ceil() as usize).min(depth);
    let fit = |k| fits(tile, &ranked, k, depth, mode);
    let mut k = start;
    if fit(k) {
        while k < depth && fit(k + 1) {
            k += 1;
        }
        k
    } else {
        while k > 0 {
            k -= 1;
            if fit(k) {
                return k;
            }
        }
        0
    }
}

/// Largest feasible k not above `requested` (0 if none).
pub fn clamp_fixed_k(tile: &SparseTile, requested: usize, depth: usize, mode: VrfMode) -> usize {
    let ranked = tile.columns_by_count();
    (0..=requested.min(depth))
        .rev()
        .find(|&k| fits(tile, &ranked, k, depth, mode))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::super::SubRow;
    use super::*;

    fn tile(rows: &[&[u32]]) -> SparseTile {
        SparseTile::new(
            0,
            0,
            rows.iter()
                .enumerate()
                .map(|(i, cols)| SubRow {
                    parent_row: i as u32,
                    split_seq: 0,
                    col_idx: cols.to_vec(),
                    values: vec![1; cols.len()],
                })
                .collect(),
        )
    }

    #[test]
    fn empty_tile_takes_full_depth() {
        let t = tile(&[]);
        assert_eq!(topk_fixed(&t, 3, 0.5, 4, VrfMode::Single), 4);
        assert_eq!(topk_fixed(&t, 3, 0.5, 4, VrfMode::Double), 4);
    }

    #[test]
    fn single_row_fits_with_equality_everywhere() {
        let t = tile(&[&[0, 1, 2, 3]]);
        assert_eq!(topk_fixed(&t, 4, 0.5, 4, VrfMode::Single), 4);
    }

    #[test]
    fn shared_columns_are_pinned() {
        // column 0 appears in every row
        let t = tile(&[&[0, 1, 2], &[0, 3, 4], &[0, 5, 6]]);
        // single: k=1 leaves 2 misses per row; k=2 pins {0,1} and row 1 still misses 2
        assert_eq!(topk_fixed(&t, 3, 0.5, 4, VrfMode::Single), 2);
        // double with D=6: k=1 -> 1+2+2=5 fits, k=2 -> 2+2+2=6 fits, k=3 -> 3+2+2 no
        assert_eq!(topk_fixed(&t, 3, 0.5, 6, VrfMode::Double), 2);
        // D=4 double: start k=2 fails (6), k=1 fails (5), k=0 fails (6)
        assert_eq!(topk_fixed(&t, 3, 0.5, 4, VrfMode::Double), 0);
    }

    #[test]
    fn result_always_fits() {
        let t = tile(&[&[0, 1, 2, 3], &[1, 2], &[4, 5, 6], &[0, 6]]);
        let ranked = t.columns_by_count();
        for d in 1..10 {
            for mode in [VrfMode::Single, VrfMode::Double] {
                let k = topk_fixed(&t, 4, 0.5, d, mode);
                let feasible_any = (0..=d).any(|j| fits(&t, &ranked, j, d, mode));
                if feasible_any {
                    assert!(fits(&t, &ranked, k, d, mode), "d={d} mode={mode}");
                }
            }
        }
    }

    #[test]
    fn clamp_respects_request() {
        let t = tile(&[&[0, 1, 2], &[0, 3, 4], &[0, 5, 6]]);
        assert_eq!(clamp_fixed_k(&t, 0, 4, VrfMode::Single), 0);
        assert_eq!(clamp_fixed_k(&t, 1, 4, VrfMode::Single), 1);
        assert_eq!(clamp_fixed_k(&t, 4, 4, VrfMode::Single), 2);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("double".parse::<VrfMode>().unwrap(), VrfMode::Double);
        assert!("triple".parse::<VrfMode>().is_err());
    }
}
