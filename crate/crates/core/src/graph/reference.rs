use super::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};

/// S × D with wrapping 32-bit accumulation, row by row in column-index order.
pub fn spmm_reference(s: &CsrMatrix, d: &DenseMatrix) -> Result<DenseMatrix> {
    if s.n_cols() != d.n_rows() {
        return Err(Error::Shape(format!(
            "spmm: sparse is {}x{}, dense is {}x{}",
            s.n_rows(),
            s.n_cols(),
            d.n_rows(),
            d.n_cols()
        )));
    }
    let mut out = DenseMatrix::zeros(s.n_rows(), d.n_cols());
    for r in 0..s.n_rows() {
        let (cols, vals) = s.row(r);
        let acc = out.row_mut(r);
        for (&c, &v) in cols.iter().zip(vals) {
            for (o, &x) in acc.iter_mut().zip(d.row(c as usize)) {
                *o = o.wrapping_add(v.wrapping_mul(x));
            }
        }
    }
    Ok(out)
}

/// One GCN layer evaluated as Â × (X × W), optionally followed by ReLU.
pub fn gcn_layer_reference(
    a_hat: &CsrMatrix,
    x: &CsrMatrix,
    w: &DenseMatrix,
    relu: bool,
) -> Result<DenseMatrix> {
    let xw = spmm_reference(x, w)?;
    let out = spmm_reference(a_hat, &xw)?;
    Ok(if relu { out.map(|v| v.max(0)) } else { out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_dense_through() {
        let d = DenseMatrix::new(3, 2, vec![1, -2, 3, 4, 5, 6]).unwrap();
        assert_eq!(spmm_reference(&CsrMatrix::identity(3), &d).unwrap(), d);
    }

    #[test]
    fn small_hand_product() {
        let s = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1), (1, 0, 2), (1, 1, 3)]).unwrap();
        let d = DenseMatrix::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(spmm_reference(&s, &d).unwrap().data(), &[1, 1, 5, 5]);
    }

    #[test]
    fn zero_row_stays_zero() {
        let s = CsrMatrix::from_triplets(2, 2, vec![(1, 1, 7)]).unwrap();
        let d = DenseMatrix::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(spmm_reference(&s, &d).unwrap().data(), &[0, 0, 21, 28]);
    }

    #[test]
    fn shape_mismatch() {
        let s = CsrMatrix::zeros(2, 3);
        assert!(matches!(
            spmm_reference(&s, &DenseMatrix::zeros(2, 2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn double_identity_gives_x() {
        let x = CsrMatrix::from_triplets(3, 3, vec![(0, 2, 4), (2, 1, -1)]).unwrap();
        let out = gcn_layer_reference(
            &CsrMatrix::identity(3),
            &x,
            &DenseMatrix::identity(3),
            false,
        )
        .unwrap();
        assert_eq!(out, x.to_dense());
    }

    #[test]
    fn relu_clamps_negative() {
        let x = CsrMatrix::from_triplets(2, 2, vec![(0, 0, -1), (1, 1, -3)]).unwrap();
        let w = DenseMatrix::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        let out = gcn_layer_reference(&CsrMatrix::identity(2), &x, &w, true).unwrap();
        assert!(out.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn chain_graph_layer() {
        // 0-1-2 with self-loops, X = I, W = ones(3x2): output = row sums of Â
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, 1),
                (0, 1, 1),
                (1, 0, 1),
                (1, 1, 1),
                (1, 2, 1),
                (2, 1, 1),
                (2, 2, 1),
            ],
        )
        .unwrap();
        let w = DenseMatrix::new(3, 2, vec![1; 6]).unwrap();
        let out = gcn_layer_reference(&a, &CsrMatrix::identity(3), &w, false).unwrap();
        assert_eq!(out.data(), &[2, 2, 3, 3, 2, 2]);
    }
}
