mod common;

use flexvector::graph::{
    gcn_layer_reference, gen_power_law, parse_edge_list, parse_matrix_market, spmm_reference,
    CsrMatrix, DenseMatrix,
};
use proptest::prelude::*;

fn small_csr() -> impl Strategy<Value = CsrMatrix> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(r, c)| {
        proptest::collection::vec((0..r, 0..c, -20i32..=20), 0..=r * c)
            .prop_map(move |t| CsrMatrix::from_triplets(r, c, t).unwrap())
    })
}

fn dense_of(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-50i32..=50, rows * cols)
        .prop_map(move |d| DenseMatrix::new(rows, cols, d).unwrap())
}

fn rebuilt(m: &CsrMatrix) -> flexvector::Result<CsrMatrix> {
    CsrMatrix::new(
        m.n_rows(),
        m.n_cols(),
        m.row_ptr().to_vec(),
        m.col_idx().to_vec(),
        m.values().to_vec(),
    )
}

proptest! {
    #[test]
    fn csr_bytes_round_trip(m in small_csr()) {
        let back = CsrMatrix::from_bytes(&m.to_bytes()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn spmm_matches_dense_triple_loop(
        (s, d) in small_csr().prop_flat_map(|s| {
            let k = s.n_cols();
            (Just(s), (1usize..=6).prop_flat_map(move |f| dense_of(k, f)))
        })
    ) {
        let expected = common::dense_product(&s.to_dense(), &d);
        prop_assert_eq!(spmm_reference(&s, &d).unwrap(), expected);
    }

    #[test]
    fn gcn_layer_is_two_products(
        (a, x, w) in (1usize..=8, 1usize..=6, 1usize..=5).prop_flat_map(|(n, fin, fout)| {
            let a = proptest::collection::vec((0..n, 0..n, -4i32..=4), 0..=n * n)
                .prop_map(move |t| CsrMatrix::from_triplets(n, n, t).unwrap());
            let x = proptest::collection::vec((0..n, 0..fin, -4i32..=4), 0..=n * fin)
                .prop_map(move |t| CsrMatrix::from_triplets(n, fin, t).unwrap());
            (a, x, dense_of(fin, fout))
        })
    ) {
        let direct = spmm_reference(&a, &spmm_reference(&x, &w).unwrap()).unwrap();
        prop_assert_eq!(gcn_layer_reference(&a, &x, &w, false).unwrap(), direct.clone());
        prop_assert_eq!(gcn_layer_reference(&a, &x, &w, true).unwrap(), direct.map(|v| v.max(0)));
    }

    #[test]
    fn edge_list_text_round_trip(m in small_csr()) {
        let n = m.n_rows().max(m.n_cols());
        let text: String = m.iter().map(|(r, c, _)| format!("{r} {c}\n")).collect();
        let back = parse_edge_list(&text, n, "mem").unwrap();
        let expected: Vec<(usize, u32)> = m.iter().map(|(r, c, _)| (r, c)).collect();
        let got: Vec<(usize, u32)> = back.iter().map(|(r, c, _)| (r, c)).collect();
        prop_assert_eq!(got, expected);
        prop_assert!(back.values().iter().all(|&v| v == 1));
    }

    #[test]
    fn matrix_market_round_trip(m in small_csr()) {
        let mut text = format!(
            "%%MatrixMarket matrix coordinate integer general\n{} {} {}\n",
            m.n_rows(),
            m.n_cols(),
            m.nnz()
        );
        for (r, c, v) in m.iter() {
            text.push_str(&format!("{} {} {}\n", r + 1, c + 1, v));
        }
        prop_assert_eq!(parse_matrix_market(&text).unwrap(), m);
    }
}

#[test]
fn power_law_graphs_are_valid_csr() {
    for seed in 0..100u64 {
        let n = 64 + (seed as usize % 5) * 50;
        let e = n * 2;
        let a = gen_power_law(n, e, 2.1, seed).unwrap();
        rebuilt(&a).unwrap();
        assert_eq!(a.nnz(), 2 * e, "seed {seed}");
        for (r, c, v) in a.iter() {
            assert_ne!(r, c as usize, "self-loop, seed {seed}");
            assert_eq!(v, 1);
            let (cols, _) = a.row(c as usize);
            assert!(
                cols.binary_search(&(r as u32)).is_ok(),
                "asymmetric, seed {seed}"
            );
        }
    }
}
