//! Sparse/dense matrix types, graph ingestion, synthetic graph generation and
//! the reference SpMM / GCN-layer oracle every simulator is checked against.

mod csr;
mod dense;
mod generate;
mod io;
mod normalize;
mod reference;

pub(crate) use csr::check_perm;
pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub use generate::{gen_power_law, gen_sparse_features, gen_uniform, random_dense};
pub use io::{
    load_edge_list, load_matrix_market, parse_edge_list, parse_matrix_market, read_csr, write_csr,
};
pub use normalize::{normalize_adjacency, DEFAULT_FRAC_BITS};
pub use reference::{gcn_layer_reference, spmm_reference};

use serde::{Deserialize, Serialize};

/// Summary of a dataset: name plus the counts a dataset table would list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub name: String,
    pub nodes: usize,
    pub edges: usize,
    pub feature_dim: usize,
}

impl GraphMeta {
    pub fn from_adjacency(name: impl Into<String>, a: &CsrMatrix, feature_dim: usize) -> Self {
        GraphMeta {
            name: name.into(),
            nodes: a.n_rows().max(1),
            edges: a.nnz(),
            feature_dim,
        }
    }
}
