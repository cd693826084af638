use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CsrMatrix;

/// Node reordering that groups nodes into consecutive blocks of `tile_rows`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// old id -> new id
    pub perm: Vec<u32>,
    pub tile_rows: usize,
    pub n_tiles_per_dim: usize,
}

impl Partition {
    pub fn new(perm: Vec<u32>, tile_rows: usize) -> Result<Self> {
        if tile_rows == 0 {
            return Err(Error::Parameter("tile_rows must be >= 1".into()));
        }
        crate::graph::check_perm(&perm, perm.len())?;
        let n_tiles_per_dim = perm.len().div_ceil(tile_rows);
        Ok(Partition {
            perm,
            tile_rows,
            n_tiles_per_dim,
        })
    }

    pub fn identity(n: usize, tile_rows: usize) -> Result<Self> {
        Self::new((0..n as u32).collect(), tile_rows)
    }

    pub fn n_nodes(&self) -> usize {
        self.perm.len()
    }

    /// Block index of an original node id.
    pub fn block_of(&self, node: usize) -> usize {
        self.perm[node] as usize / self.tile_rows
    }
}

/// Greedy BFS growth: each block is seeded at the highest-degree unvisited
/// node (lower id on ties) and filled breadth-first, neighbours in ascending
/// id order. A block whose frontier runs dry is reseeded the same way.
pub fn edge_cut_partition(a: &CsrMatrix, tile_rows: usize) -> Result<Partition> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "partitioning needs a square matrix, got {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    if tile_rows == 0 {
        return Err(Error::Parameter("tile_rows must be >= 1".into()));
    }
    let n = a.n_rows();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(a.row_nnz(v)), v));
    let mut seed_cursor = 0;

    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while order.len() < n {
        let block_end = (order.len() + tile_rows).min(n);
        queue.clear();
        while order.len() < block_end {
            let Some(v) = queue.pop_front() else {
                while visited[by_degree[seed_cursor]] {
                    seed_cursor += 1;
                }
                let s = by_degree[seed_cursor];
                visited[s] = true;
                order.push(s);
                queue.push_back(s);
                continue;
            };
            for &u in a.row(v).0 {
                let u = u as usize;
                if order.len() == block_end {
                    break;
                }
                if !visited[u] {
                    visited[u] = true;
                    order.push(u);
                    queue.push_back(u);
                }
            }
        }
    }
    let mut perm = vec![0u32; n];
    for (pos, &v) in order.iter().enumerate() {
        perm[v] = pos as u32;
    }
    Partition::new(perm, tile_rows)
}

/// Reads one block id per line and orders nodes by block (stable).
pub fn load_external_partition(
    path: impl AsRef<Path>,
    n_nodes: usize,
    tile_rows: usize,
) -> Result<Partition> {
    parse_external_partition(&fs::read_to_string(path)?, n_nodes, tile_rows)
}

pub fn parse_external_partition(text: &str, n_nodes: usize, tile_rows: usize) -> Result<Partition> {
    if tile_rows == 0 {
        return Err(Error::Parameter("tile_rows must be >= 1".into()));
    }
    let max_blocks = n_nodes.div_ceil(tile_rows);
    let mut blocks = Vec::with_capacity(n_nodes);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let b: usize = line
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad block id {line:?}", lineno + 1)))?;
        if b >= max_blocks {
            return Err(Error::Format(format!(
                "line {}: block {b} but {n_nodes} nodes / {tile_rows} rows allow {max_blocks} blocks",
                lineno + 1
            )));
        }
        blocks.push(b);
    }
    if blocks.len() != n_nodes {
        return Err(Error::Format(format!(
            "partition lists {} nodes, expected {n_nodes}",
            blocks.len()
        )));
    }
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.sort_by_key(|&v| blocks[v]);
    let mut perm = vec![0u32; n_nodes];
    for (pos, &v) in order.iter().enumerate() {
        perm[v] = pos as u32;
    }
    Partition::new(perm, tile_rows)
}

/// Number of stored nonzeros whose endpoints fall in different blocks.
pub fn cross_tile_edges(a: &CsrMatrix, part: &Partition) -> usize {
    a.iter()
        .filter(|&(r, c, _)| part.block_of(r) != part.block_of(c as usize))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(n: usize, edges: &[(usize, usize)]) -> CsrMatrix {
        let t = edges.iter().flat_map(|&(a, b)| [(a, b, 1), (b, a, 1)]);
        CsrMatrix::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn two_cliques_split_cleanly() {
        let a = undirected(4, &[(0, 2), (1, 3)]);
        let p = edge_cut_partition(&a, 2).unwrap();
        assert_eq!(cross_tile_edges(&a, &p), 0);
        assert_eq!(p.block_of(0), p.block_of(2));
        assert_eq!(p.block_of(1), p.block_of(3));
    }

    #[test]
    fn single_block_when_tile_covers_graph() {
        let a = undirected(5, &[(0, 1), (3, 4)]);
        let p = edge_cut_partition(&a, 8).unwrap();
        assert_eq!(p.n_tiles_per_dim, 1);
        assert_eq!(cross_tile_edges(&a, &p), 0);
    }

    #[test]
    fn ring_of_eight() {
        let edges: Vec<_> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        let a = undirected(8, &edges);
        let p = edge_cut_partition(&a, 4).unwrap();
        for v in [0, 1, 2, 7] {
            assert_eq!(p.block_of(v), 0);
        }
        for v in [3, 4, 5, 6] {
            assert_eq!(p.block_of(v), 1);
        }
        // two undirected pairs, each stored twice
        assert_eq!(cross_tile_edges(&a, &p), 4);
    }

    #[test]
    fn isolated_nodes_are_still_placed() {
        let a = CsrMatrix::zeros(5, 5);
        let p = edge_cut_partition(&a, 2).unwrap();
        let mut seen = p.perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn external_partition_ordering() {
        let p = parse_external_partition("0\n0\n1\n1\n", 4, 2).unwrap();
        assert_eq!(p.perm, vec![0, 1, 2, 3]);
        let p = parse_external_partition("1\n0\n1\n0\n", 4, 2).unwrap();
        assert_eq!(p.perm, vec![2, 0, 3, 1]);
    }

    #[test]
    fn external_partition_errors() {
        assert!(matches!(
            parse_external_partition("0\n0\n1\n", 4, 2),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_external_partition("0\n0\n1\n2\n", 4, 2),
            Err(Error::Format(_))
        ));
        assert!(parse_external_partition("0\nx\n1\n1\n", 4, 2).is_err());
    }
}
