use std::fs;
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Reads a whitespace-separated "src dst" edge list as a binary adjacency
/// matrix. Lines starting with `#` are comments. Duplicate edges collapse.
pub fn load_edge_list(path: impl AsRef<Path>, n_nodes: usize) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, n_nodes, &path.display().to_string())
}

pub fn parse_edge_list(text: &str, n_nodes: usize, source_name: &str) -> Result<CsrMatrix> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            source_name: source_name.to_string(),
            line: lineno + 1,
            msg,
        };
        let mut toks = line.split_whitespace();
        let (Some(a), Some(b), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(parse_err(format!("expected \"src dst\", got {line:?}")));
        };
        let src: usize = a
            .parse()
            .map_err(|_| parse_err(format!("bad node id {a:?}")))?;
        let dst: usize = b
            .parse()
            .map_err(|_| parse_err(format!("bad node id {b:?}")))?;
        for id in [src, dst] {
            if id >= n_nodes {
                return Err(Error::Bounds {
                    what: "node",
                    index: id,
                    bound: n_nodes,
                });
            }
        }
        edges.push((src, dst, 1));
    }
    CsrMatrix::from_triplets(n_nodes, n_nodes, edges)
}

/// Reads a MatrixMarket coordinate file (integer or pattern field, general or
/// symmetric). Pattern entries become 1; symmetric files are mirrored.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty MatrixMarket file".into()))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Format(format!("unsupported header {header:?}")));
    }
    if fields[2] != "coordinate" {
        return Err(Error::Format(format!("unsupported layout {:?}", fields[2])));
    }
    let pattern = match fields[3].as_str() {
        "pattern" => true,
        "integer" => false,
        other => return Err(Error::Format(format!("unsupported field {other:?}"))),
    };
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Format(format!("unsupported symmetry {other:?}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let bad = |msg: &str| Error::Format(format!("line {}: {msg}", lineno + 1));
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some((n_rows, n_cols, _)) = size else {
            if toks.len() != 3 {
                return Err(bad("expected \"rows cols nnz\""));
            }
            let nums: Vec<usize> = toks
                .iter()
                .map(|t| t.parse().map_err(|_| bad("bad size line")))
                .collect::<Result<_>>()?;
            size = Some((nums[0], nums[1], nums[2]));
            continue;
        };
        let want = if pattern { 2 } else { 3 };
        if toks.len() != want {
            return Err(bad("wrong number of fields in entry"));
        }
        let i: usize = toks[0].parse().map_err(|_| bad("bad row index"))?;
        let j: usize = toks[1].parse().map_err(|_| bad("bad column index"))?;
        let v: i32 = if pattern {
            1
        } else {
            toks[2].parse().map_err(|_| bad("bad integer value"))?
        };
        if i == 0 || j == 0 || i > n_rows || j > n_cols {
            return Err(Error::Bounds {
                what: "MatrixMarket entry",
                index: i.max(j),
                bound: n_rows.max(n_cols),
            });
        }
        entries.push((i - 1, j - 1, v));
        if symmetric && i != j {
            entries.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    let (n_rows, n_cols, declared) =
        size.ok_or_else(|| Error::Format("missing size line".into()))?;
    if seen != declared {
        return Err(Error::Format(format!(
            "declared {declared} entries but found {seen}"
        )));
    }
    CsrMatrix::from_triplets(n_rows, n_cols, entries)
}

pub fn write_csr(path: impl AsRef<Path>, m: &CsrMatrix) -> Result<()> {
    fs::write(path, m.to_bytes())?;
    Ok(())
}

pub fn read_csr(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    CsrMatrix::from_bytes(&fs::read(path)?)
}
