use serde::{Deserialize, Serialize};

use super::DenseMatrix;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FVCS";
const VERSION: u32 = 1;

/// Compressed-sparse-row matrix with 32-bit integer values.
///
/// Rows hold strictly increasing column indices; explicit zeros are allowed
/// (they still count as structural nonzeros).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<i32>,
}

impl CsrMatrix {
    /// Builds a matrix from raw arrays, checking every CSR invariant.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<i32>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidCsr("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != col_idx.len() {
            return Err(Error::InvalidCsr(format!(
                "row_ptr end {} / col_idx {} / values {} disagree",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for r in 0..n_rows {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            if hi < lo {
                return Err(Error::InvalidCsr(format!("row_ptr decreases at row {r}")));
            }
            let cols = &col_idx[lo..hi];
            for (i, &c) in cols.iter().enumerate() {
                if c as usize >= n_cols {
                    return Err(Error::InvalidCsr(format!(
                        "column {c} out of range in row {r} (n_cols {n_cols})"
                    )));
                }
                if i > 0 && cols[i - 1] >= c {
                    return Err(Error::InvalidCsr(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: vec![1; n],
        }
    }

    /// Builds a matrix from (row, col, value) entries in any order.
    /// Duplicate coordinates collapse to the first occurrence.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, i32)>,
    {
        let mut rows: Vec<Vec<(u32, i32)>> = vec![Vec::new(); n_rows];
        for (r, c, v) in entries {
            if r >= n_rows {
                return Err(Error::Bounds {
                    what: "row",
                    index: r,
                    bound: n_rows,
                });
            }
            if c >= n_cols {
                return Err(Error::Bounds {
                    what: "column",
                    index: c,
                    bound: n_cols,
                });
            }
            rows[r].push((c as u32, v));
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            // stable sort keeps insertion order among duplicates, so dedup keeps the first
            row.sort_by_key(|&(c, _)| c);
            row.dedup_by_key(|e| e.0);
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Keeps every nonzero entry of a dense matrix.
    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..d.n_rows() {
            for (c, &v) in d.row(r).iter().enumerate() {
                if v != 0 {
                    col_idx.push(c as u32);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: d.n_rows(),
            n_cols: d.n_cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn row(&self, r: usize) -> (&[u32], &[i32]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// (row, col, value) for every stored entry, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32, i32)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Nonzero count per column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_cols];
        for &c in &self.col_idx {
            counts[c as usize] += 1;
        }
        counts
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            d.set(r, c as usize, v);
        }
        d
    }

    /// Relabels rows and columns: entry (i, j) moves to (row_perm[i], col_perm[j]).
    pub fn permute(&self, row_perm: &[u32], col_perm: &[u32]) -> Result<Self> {
        check_perm(row_perm, self.n_rows)?;
        check_perm(col_perm, self.n_cols)?;
        let entries = self
            .iter()
            .map(|(r, c, v)| (row_perm[r] as usize, col_perm[c as usize] as usize, v));
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, entries)
    }

    /// Symmetric relabelling P·A·Pᵀ of a square matrix.
    pub fn permute_symmetric(&self, perm: &[u32]) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "symmetric permutation needs a square matrix, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        self.permute(perm, perm)
    }

    /// Versioned little-endian binary encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 8 * self.row_ptr.len() + 8 * self.nnz());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_cols as u64).to_le_bytes());
        out.extend_from_slice(&(self.nnz() as u64).to_le_bytes());
        for &p in &self.row_ptr {
            out.extend_from_slice(&(p as u64).to_le_bytes());
        }
        for &c in &self.col_idx {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for &v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { buf: bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Format("bad CSR magic".into()));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported CSR version {version}")));
        }
        let n_rows = cur.u64()? as usize;
        let n_cols = cur.u64()? as usize;
        let nnz = cur.u64()? as usize;
        let expected = 8 * (n_rows + 1) + 8 * nnz;
        if bytes.len() - cur.pos != expected {
            return Err(Error::Format(format!(
                "CSR payload is {} bytes, expected {expected}",
                bytes.len() - cur.pos
            )));
        }
        let row_ptr = (0..=n_rows)
            .map(|_| cur.u64().map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let col_idx = (0..nnz)
            .map(|_| {
                cur.take(4)
                    .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = (0..nnz)
            .map(|_| {
                cur.take(4)
                    .map(|b| i32::from_le_bytes(b.try_into().unwrap()))
            })
            .collect::<Result<Vec<_>>>()?;
        CsrMatrix::new(n_rows, n_cols, row_ptr, col_idx, values)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format("truncated CSR stream".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub(crate) fn check_perm(perm: &[u32], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Shape(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        let p = p as usize;
        if p >= n || seen[p] {
            return Err(Error::Parameter("permutation is not a bijection".into()));
        }
        seen[p] = true;
    }
    Ok(())
}
