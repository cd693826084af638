use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};
use crate::graph::CsrMatrix;

/// One (possibly split) row of a sparse tile. Column indices are local to the tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubRow {
    pub parent_row: u32,
    pub split_seq: u32,
    pub col_idx: Vec<u32>,
    pub values: Vec<i32>,
}

impl SubRow {
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }
}

/// A non-empty `tile_rows × tile_rows` block of a permuted sparse matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseTile {
    pub tile_row: usize,
    pub tile_col: usize,
    pub rows: Vec<SubRow>,
    pub max_rnz: usize,
}

impl SparseTile {
    pub fn new(tile_row: usize, tile_col: usize, rows: Vec<SubRow>) -> Self {
        let max_rnz = rows.iter().map(SubRow::nnz).max().unwrap_or(0);
        SparseTile {
            tile_row,
            tile_col,
            rows,
            max_rnz,
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SubRow::nnz).sum()
    }

    /// Nonzero count per local column, sized to the largest column present.
    pub fn col_counts(&self) -> Vec<usize> {
        let width = self
            .rows
            .iter()
            .flat_map(|r| r.col_idx.iter())
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0);
        let mut counts = vec![0; width];
        for r in &self.rows {
            for &c in &r.col_idx {
                counts[c as usize] += 1;
            }
        }
        counts
    }

    /// Local columns ordered by descending nonzero count, lower index first on ties.
    /// Columns the tile never touches are excluded.
    pub fn columns_by_count(&self) -> Vec<u32> {
        let counts = self.col_counts();
        let mut cols: Vec<u32> = (0..counts.len() as u32)
            .filter(|&c| counts[c as usize] > 0)
            .collect();
        cols.sort_by_key(|&c| (std::cmp::Reverse(counts[c as usize]), c));
        cols
    }
}

/// Slices an already-permuted matrix into `tile_rows`-square blocks, in
/// row-major tile order. Empty tiles and empty rows are omitted.
pub fn tile_matrix(a: &CsrMatrix, tile_rows: usize) -> Result<Vec<SparseTile>> {
    if tile_rows == 0 {
        return Err(Error::Parameter("tile_rows must be >= 1".into()));
    }
    let n_tile_cols = a.n_cols().div_ceil(tile_rows);
    let mut tiles = Vec::new();
    for tr in 0..a.n_rows().div_ceil(tile_rows) {
        let mut per_col: Vec<Vec<SubRow>> = vec![Vec::new(); n_tile_cols];
        let r_end = ((tr + 1) * tile_rows).min(a.n_rows());
        for r in tr * tile_rows..r_end {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let tc = c as usize / tile_rows;
                let local = c % tile_rows as u32;
                let bucket = &mut per_col[tc];
                let parent = (r - tr * tile_rows) as u32;
                match bucket.last_mut() {
                    Some(row) if row.parent_row == parent => {
                        row.col_idx.push(local);
                        row.values.push(v);
                    }
                    _ => bucket.push(SubRow {
                        parent_row: parent,
                        split_seq: 0,
                        col_idx: vec![local],
                        values: vec![v],
                    }),
                }
            }
        }
        for (tc, rows) in per_col.into_iter().enumerate() {
            if !rows.is_empty() {
                tiles.push(SparseTile::new(tr, tc, rows));
            }
        }
    }
    Ok(tiles)
}

/// Applies `part` symmetrically to a square matrix and tiles the result.
pub fn extract_tiles(a: &CsrMatrix, part: &Partition) -> Result<Vec<SparseTile>> {
    if a.n_rows() != part.n_nodes() {
        return Err(Error::Shape(format!(
            "partition covers {} nodes, matrix has {} rows",
            part.n_nodes(),
            a.n_rows()
        )));
    }
    tile_matrix(&a.permute_symmetric(&part.perm)?, part.tile_rows)
}

/// Splits every row holding more than `tau` nonzeros so that no sub-row exceeds `tau`.
///
/// The hit set is the `tau` columns with the most nonzeros in the tile. Each
/// oversized row is cut into K = ceil(nnz/tau) pieces; every piece takes
/// ceil(misses/K) misses from the front of the ascending miss list and tops
/// up with hits from the back of the ascending hit list.
pub fn vertex_cut(tile: &SparseTile, tau: usize) -> Result<SparseTile> {
    if tau == 0 {
        return Err(Error::Parameter("tau must be >= 1".into()));
    }
    if tile.max_rnz <= tau {
        return Ok(tile.clone());
    }
    let hit_cols: Vec<u32> = tile.columns_by_count().into_iter().take(tau).collect();
    let mut rows = Vec::with_capacity(tile.rows.len() * 2);
    for row in &tile.rows {
        if row.nnz() <= tau {
            rows.push(row.clone());
            continue;
        }
        let mut miss = Vec::new();
        let mut hit = Vec::new();
        for (&c, &v) in row.col_idx.iter().zip(&row.values) {
            if hit_cols.contains(&c) {
                hit.push((c, v));
            } else {
                miss.push((c, v));
            }
        }
        let k = row.nnz().div_ceil(tau);
        let n_miss = miss.len().div_ceil(k);
        let mut miss = miss.into_iter();
        let mut seq = 0;
        for _ in 0..k {
            let mut piece: Vec<(u32, i32)> = miss.by_ref().take(n_miss).collect();
            while piece.len() < tau {
                match hit.pop() {
                    Some(e) => piece.push(e),
                    None => break,
                }
            }
            if piece.is_empty() {
                continue;
            }
            piece.sort_unstable_by_key(|&(c, _)| c);
            rows.push(SubRow {
                parent_row: row.parent_row,
                split_seq: seq,
                col_idx: piece.iter().map(|&(c, _)| c).collect(),
                values: piece.iter().map(|&(_, v)| v).collect(),
            });
            seq += 1;
        }
        debug_assert!(hit.is_empty() && miss.next().is_none());
    }
    Ok(SparseTile::new(tile.tile_row, tile.tile_col, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(parent: u32, cols: &[u32]) -> SubRow {
        SubRow {
            parent_row: parent,
            split_seq: 0,
            col_idx: cols.to_vec(),
            values: cols.iter().map(|&c| c as i32 + 1).collect(),
        }
    }

    #[test]
    fn identity_gives_diagonal_tiles() {
        let tiles =
            extract_tiles(&CsrMatrix::identity(4), &Partition::identity(4, 2).unwrap()).unwrap();
        assert_eq!(tiles.len(), 2);
        assert_eq!((tiles[0].tile_row, tiles[0].tile_col), (0, 0));
        assert_eq!((tiles[1].tile_row, tiles[1].tile_col), (1, 1));
        for t in &tiles {
            assert_eq!(t.rows.len(), 2);
            assert_eq!(t.rows[0].col_idx, vec![0]);
            assert_eq!(t.rows[1].col_idx, vec![1]);
        }
    }

    #[test]
    fn zero_matrix_has_no_tiles() {
        let p = Partition::identity(4, 2).unwrap();
        assert!(extract_tiles(&CsrMatrix::zeros(4, 4), &p)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn single_entry_lands_in_one_tile() {
        let a = CsrMatrix::from_triplets(4, 4, vec![(3, 0, 9)]).unwrap();
        let tiles = extract_tiles(&a, &Partition::identity(4, 2).unwrap()).unwrap();
        assert_eq!(tiles.len(), 1);
        assert_eq!((tiles[0].tile_row, tiles[0].tile_col), (1, 0));
        assert_eq!(
            tiles[0].rows,
            vec![SubRow {
                parent_row: 1,
                split_seq: 0,
                col_idx: vec![0],
                values: vec![9]
            }]
        );
    }

    #[test]
    fn rectangular_matrix_tiles() {
        let a = CsrMatrix::from_triplets(3, 5, vec![(0, 4, 1), (2, 1, 1)]).unwrap();
        let tiles = tile_matrix(&a, 2).unwrap();
        let ids: Vec<_> = tiles.iter().map(|t| (t.tile_row, t.tile_col)).collect();
        assert_eq!(ids, vec![(0, 2), (1, 0)]);
    }

    #[test]
    fn split_example_row() {
        // columns 0..=2 carry the most nonzeros in the tile
        let tile = SparseTile::new(
            0,
            0,
            vec![
                row(0, &[1, 2, 3, 4, 5]),
                row(1, &[0, 1, 2]),
                row(2, &[0, 2]),
                row(3, &[0]),
            ],
        );
        let cut = vertex_cut(&tile, 3).unwrap();
        let zero: Vec<_> = cut.rows.iter().filter(|r| r.parent_row == 0).collect();
        assert_eq!(zero.len(), 2);
        assert_eq!(zero[0].col_idx, vec![2, 3, 4]);
        assert_eq!(zero[1].col_idx, vec![1, 5]);
        assert_eq!((zero[0].split_seq, zero[1].split_seq), (0, 1));
        assert_eq!(cut.max_rnz, 3);
        assert_eq!(cut.nnz(), tile.nnz());
    }

    #[test]
    fn small_rows_pass_through() {
        let tile = SparseTile::new(0, 0, vec![row(0, &[1, 2]), row(1, &[0])]);
        assert_eq!(vertex_cut(&tile, 2).unwrap(), tile);
    }

    #[test]
    fn all_miss_row_splits_evenly() {
        // hit set is {0,1}; row 0 uses none of them
        let tile = SparseTile::new(
            0,
            0,
            vec![row(0, &[2, 3, 4, 5]), row(1, &[0, 1]), row(2, &[0, 1])],
        );
        let cut = vertex_cut(&tile, 2).unwrap();
        let zero: Vec<_> = cut.rows.iter().filter(|r| r.parent_row == 0).collect();
        assert_eq!(zero.len(), 2);
        assert_eq!(zero[0].col_idx, vec![2, 3]);
        assert_eq!(zero[1].col_idx, vec![4, 5]);
    }

    #[test]
    fn hits_fill_short_pieces() {
        // 6 nnz, tau 3: 3 hits + 3 misses; second piece gets one miss and two hits
        let tile = SparseTile::new(0, 0, vec![row(0, &[0, 1, 2, 3, 4, 5]), row(1, &[0, 1, 2])]);
        let cut = vertex_cut(&tile, 3).unwrap();
        assert_eq!(cut.rows.len(), 3);
        assert_eq!(cut.rows[0].col_idx, vec![2, 3, 4]);
        assert_eq!(cut.rows[1].col_idx, vec![0, 1, 5]);
    }

    #[test]
    fn tau_zero_rejected() {
        let tile = SparseTile::new(0, 0, vec![row(0, &[1])]);
        assert!(matches!(vertex_cut(&tile, 0), Err(Error::Parameter(_))));
    }
}
