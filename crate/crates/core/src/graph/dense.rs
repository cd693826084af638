use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of 32-bit integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<i32>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<i32>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::Shape(format!(
                "dense data has {} elements, expected {}x{}",
                data.len(),
                n_rows,
                n_cols
            )));
        }
        Ok(DenseMatrix {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| (r == c) as i32)
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> i32) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> i32 {
        self.data[r * self.n_cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i32) {
        self.data[r * self.n_cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[i32] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [i32] {
        &mut self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Row i of `self` becomes row perm[i] of the result.
    pub fn permute_rows(&self, perm: &[u32]) -> Result<Self> {
        super::check_perm(perm, self.n_rows)?;
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, &p) in perm.iter().enumerate() {
            out.row_mut(p as usize).copy_from_slice(self.row(i));
        }
        Ok(out)
    }

    /// Inverse of [`permute_rows`](Self::permute_rows): row i of the result is row perm[i].
    pub fn unpermute_rows(&self, perm: &[u32]) -> Result<Self> {
        super::check_perm(perm, self.n_rows)?;
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, &p) in perm.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(p as usize));
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(i32) -> i32) -> Self {
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}
