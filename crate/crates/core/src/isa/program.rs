use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Instruction, Opcode, Region};
use crate::error::{Error, Result};
use crate::graph::DenseMatrix;
use crate::preprocess::{SparseTile, SubRow, TilePlan};

const MAGIC: &[u8; 4] = b"FVPG";
const VERSION: u32 = 1;

/// A compiled SpMM: the instruction stream plus everything needed to run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    /// Indexed by the `tile` operand of instructions.
    pub tiles: Vec<TilePlan>,
    /// Dense operand with rows already in permuted order.
    pub dense: DenseMatrix,
    pub out_rows: usize,
    pub out_cols: usize,
    /// Original output row i is permuted row `row_perm[i]`.
    pub row_perm: Vec<u32>,
    pub tile_rows: usize,
    pub chunk_width: usize,
    pub element_bits: u32,
    pub vrf_depth: usize,
}

impl Program {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn n_chunks(&self) -> usize {
        self.out_cols.div_ceil(self.chunk_width)
    }

    /// Column range [lo, hi) of a chunk.
    pub fn chunk_cols(&self, chunk: usize) -> (usize, usize) {
        let lo = chunk * self.chunk_width;
        (lo, (lo + self.chunk_width).min(self.out_cols))
    }

    pub fn subrow(&self, tile: u32, subrow: u32) -> Option<&SubRow> {
        self.tiles
            .get(tile as usize)?
            .tile
            .rows
            .get(subrow as usize)
    }

    /// One instruction per line, `OPCODE key=value ...`.
    pub fn disassemble(&self) -> String {
        disassemble(&self.instructions)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        for v in [
            self.tile_rows,
            self.chunk_width,
            self.vrf_depth,
            self.out_rows,
            self.out_cols,
        ] {
            w.u64(v as u64);
        }
        w.u32(self.element_bits);
        w.u32s(&self.row_perm);
        w.u64(self.dense.n_rows() as u64);
        w.u64(self.dense.n_cols() as u64);
        w.i32s(self.dense.data());
        w.u64(self.tiles.len() as u64);
        for p in &self.tiles {
            w.u64(p.tile.tile_row as u64);
            w.u64(p.tile.tile_col as u64);
            w.u64(p.k as u64);
            w.u32s(&p.fixed_set);
            w.u32s(&p.dense_row_ids);
            w.u64(p.tile.rows.len() as u64);
            for r in &p.tile.rows {
                w.u32(r.parent_row);
                w.u32(r.split_seq);
                w.u32s(&r.col_idx);
                w.i32s(&r.values);
            }
        }
        w.u64(self.instructions.len() as u64);
        for i in &self.instructions {
            w.instr(i);
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("not a program file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported program version {version}"
            )));
        }
        let tile_rows = r.usize()?;
        let chunk_width = r.usize()?;
        let vrf_depth = r.usize()?;
        let out_rows = r.usize()?;
        let out_cols = r.usize()?;
        let element_bits = r.u32()?;
        let row_perm = r.u32s()?;
        let (dr, dc) = (r.usize()?, r.usize()?);
        let dense = DenseMatrix::new(dr, dc, r.i32s()?)?;
        let n_tiles = r.usize()?;
        let mut tiles = Vec::with_capacity(n_tiles.min(1 << 20));
        for _ in 0..n_tiles {
            let (tile_row, tile_col, k) = (r.usize()?, r.usize()?, r.usize()?);
            let fixed_set = r.u32s()?;
            let dense_row_ids = r.u32s()?;
            let n_rows = r.usize()?;
            let mut rows = Vec::with_capacity(n_rows.min(1 << 20));
            for _ in 0..n_rows {
                let parent_row = r.u32()?;
                let split_seq = r.u32()?;
                let col_idx = r.u32s()?;
                let values = r.i32s()?;
                if col_idx.len() != values.len() {
                    return Err(Error::Format("sub-row index/value length mismatch".into()));
                }
                rows.push(SubRow {
                    parent_row,
                    split_seq,
                    col_idx,
                    values,
                });
            }
            tiles.push(TilePlan {
                tile: SparseTile::new(tile_row, tile_col, rows),
                dense_row_ids,
                fixed_set,
                k,
            });
        }
        let n_instr = r.usize()?;
        let mut instructions = Vec::with_capacity(n_instr.min(1 << 24));
        for _ in 0..n_instr {
            instructions.push(r.instr()?);
        }
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after program".into()));
        }
        Ok(Program {
            instructions,
            tiles,
            dense,
            out_rows,
            out_cols,
            row_perm,
            tile_rows,
            chunk_width,
            element_bits,
            vrf_depth,
        })
    }
}

pub fn disassemble(instructions: &[Instruction]) -> String {
    let mut s = String::new();
    for i in instructions {
        s.push_str(&i.to_string());
        s.push('\n');
    }
    s
}

/// Parses the text produced by [`disassemble`]. Blank lines and `#` comments are skipped.
pub fn parse_disassembly(text: &str) -> Result<Vec<Instruction>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

/// Instruction histogram with every opcode present (zeros included).
pub fn count_by_opcode(instructions: &[Instruction]) -> BTreeMap<Opcode, u64> {
    let mut counts: BTreeMap<Opcode, u64> = Opcode::ALL.iter().map(|&o| (o, 0)).collect();
    for i in instructions {
        *counts.entry(i.opcode()).or_default() += 1;
    }
    counts
}

/// Length of the equivalent fine-grained stream: a CMP over z nonzeros
/// becomes z (move, multiply-accumulate) pairs, whose moves subsume the
/// MV_DYN row transfers; every other instruction stays one operation.
pub fn expand_fine_grained(prog: &Program) -> u64 {
    prog.instructions
        .iter()
        .map(|i| match *i {
            Instruction::Cmp { tile, subrow, .. } => {
                2 * prog.subrow(tile, subrow).map_or(0, |r| r.nnz()) as u64
            }
            Instruction::MvDyn { .. } => 0,
            _ => 1,
        })
        .sum()
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32s(&mut self, v: &[u32]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|&x| self.u32(x));
    }
    fn i32s(&mut self, v: &[i32]) {
        self.u64(v.len() as u64);
        v.iter()
            .for_each(|&x| self.0.extend_from_slice(&x.to_le_bytes()));
    }
    fn instr(&mut self, i: &Instruction) {
        self.u8(i.opcode().index() as u8);
        match i {
            Instruction::Config { tile, k } => {
                self.u32(*tile);
                self.u32(*k);
            }
            Instruction::LdS { tile, bytes } => {
                self.u32(*tile);
                self.u64(*bytes);
            }
            Instruction::LdD { tile, chunk, bytes } => {
                self.u32(*tile);
                self.u32(*chunk);
                self.u64(*bytes);
            }
            Instruction::CalIdx { tile } => self.u32(*tile),
            Instruction::MvFixed { tile, rows } => {
                self.u32(*tile);
                self.u32s(rows);
            }
            Instruction::MvDyn {
                tile,
                subrow,
                slot,
                rows,
            } => {
                self.u32(*tile);
                self.u32(*subrow);
                self.u8(*slot);
                self.u32s(rows);
            }
            Instruction::Cmp {
                tile,
                subrow,
                chunk,
                slot,
                accumulate,
                dest,
            } => {
                self.u32(*tile);
                self.u32(*subrow);
                self.u32(*chunk);
                self.u8(*slot);
                self.u8(*accumulate as u8);
                self.u8(matches!(dest, Region::Result) as u8);
            }
            Instruction::StD {
                block,
                chunk,
                bytes,
            } => {
                self.u32(*block);
                self.u32(*chunk);
                self.u64(*bytes);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("truncated program".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size overflow".into()))
    }
    fn len(&mut self, elem: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(elem) > self.buf.len() - self.pos {
            return Err(Error::Format("truncated program".into()));
        }
        Ok(n)
    }
    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32()).collect()
    }
    fn i32s(&mut self) -> Result<Vec<i32>> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32().map(|v| v as i32)).collect()
    }
    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(Error::Format(format!("bad flag byte {v}"))),
        }
    }
    fn instr(&mut self) -> Result<Instruction> {
        let code = self.u8()? as usize;
        let op = *Opcode::ALL
            .get(code)
            .ok_or_else(|| Error::Format(format!("bad opcode byte {code}")))?;
        Ok(match op {
            Opcode::Config => Instruction::Config {
                tile: self.u32()?,
                k: self.u32()?,
            },
            Opcode::LdS => Instruction::LdS {
                tile: self.u32()?,
                bytes: self.u64()?,
            },
            Opcode::LdD => Instruction::LdD {
                tile: self.u32()?,
                chunk: self.u32()?,
                bytes: self.u64()?,
            },
            Opcode::CalIdx => Instruction::CalIdx { tile: self.u32()? },
            Opcode::MvFixed => Instruction::MvFixed {
                tile: self.u32()?,
                rows: self.u32s()?,
            },
            Opcode::MvDyn => Instruction::MvDyn {
                tile: self.u32()?,
                subrow: self.u32()?,
                slot: self.u8()?,
                rows: self.u32s()?,
            },
            Opcode::Cmp => Instruction::Cmp {
                tile: self.u32()?,
                subrow: self.u32()?,
                chunk: self.u32()?,
                slot: self.u8()?,
                accumulate: self.bool()?,
                dest: if self.bool()? {
                    Region::Result
                } else {
                    Region::Temp
                },
            },
            Opcode::StD => Instruction::StD {
                block: self.u32()?,
                chunk: self.u32()?,
                bytes: self.u64()?,
            },
        })
    }
}
