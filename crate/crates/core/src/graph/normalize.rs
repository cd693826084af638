use super::CsrMatrix;
use crate::error::{Error, Result};

/// Default number of fractional bits used to quantise the normalised adjacency.
pub const DEFAULT_FRAC_BITS: u32 = 8;

/// Symmetric GCN normalisation D̃^(-1/2)(A+I)D̃^(-1/2), quantised to fixed point
/// with `frac_bits` fractional bits (round half away from zero).
///
/// Entries of `a` are edge weights; D̃ is the row-sum degree of A+I, so an
/// existing self-loop is counted once more after the identity is added.
pub fn normalize_adjacency(a: &CsrMatrix, frac_bits: u32) -> Result<CsrMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "adjacency must be square, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    if frac_bits > 24 {
        return Err(Error::Parameter(format!("frac_bits {frac_bits} > 24")));
    }
    let n = a.n_rows();
    // A + I as (row, col, weight)
    let mut entries: Vec<(usize, usize, i64)> = Vec::with_capacity(a.nnz() + n);
    for r in 0..n {
        let (cols, vals) = a.row(r);
        let mut diag_seen = false;
        for (&c, &v) in cols.iter().zip(vals) {
            let c = c as usize;
            if c == r {
                diag_seen = true;
                entries.push((r, c, v as i64 + 1));
            } else {
                entries.push((r, c, v as i64));
            }
        }
        if !diag_seen {
            entries.push((r, r, 1));
        }
    }
    let mut degree = vec![0i64; n];
    for &(r, _, w) in &entries {
        degree[r] += w;
    }
    if let Some(r) = degree.iter().position(|&d| d <= 0) {
        return Err(Error::Parameter(format!(
            "node {r} has non-positive degree"
        )));
    }
    let scale = (1u64 << frac_bits) as f64;
    let quantised = entries.into_iter().map(|(r, c, w)| {
        let x = w as f64 * scale / ((degree[r] as f64) * (degree[c] as f64)).sqrt();
        (r, c, x.round() as i32)
    });
    CsrMatrix::from_triplets(n, n, quantised)
}
