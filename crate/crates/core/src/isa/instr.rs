use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output-tile scratch region a CMP writes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Temp,
    Result,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Opcode {
    Config,
    LdS,
    LdD,
    CalIdx,
    MvFixed,
    MvDyn,
    Cmp,
    StD,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Config,
        Opcode::LdS,
        Opcode::LdD,
        Opcode::CalIdx,
        Opcode::MvFixed,
        Opcode::MvDyn,
        Opcode::Cmp,
        Opcode::StD,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Config => "CONFIG",
            Opcode::LdS => "LD_S",
            Opcode::LdD => "LD_D",
            Opcode::CalIdx => "CAL_IDX",
            Opcode::MvFixed => "MV_FIXED",
            Opcode::MvDyn => "MV_DYN",
            Opcode::Cmp => "CMP",
            Opcode::StD => "ST_D",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for Opcode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Opcode::ALL
            .into_iter()
            .find(|o| o.mnemonic() == s)
            .ok_or_else(|| Error::Format(format!("unknown opcode {s:?}")))
    }
}

/// One coarse-grained instruction. `tile` operands index the program's tile
/// directory; row ids are global dense-row ids in permuted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    /// Sets the fixed-region size for the coming tile.
    Config { tile: u32, k: u32 },
    /// Sparse tile DRAM -> sparse buffer.
    LdS { tile: u32, bytes: u64 },
    /// One column chunk of the tile's dense rows DRAM -> dense buffer.
    LdD { tile: u32, chunk: u32, bytes: u64 },
    /// Decodes the tile's CSR indices into VRF addresses.
    CalIdx { tile: u32 },
    /// Dense buffer -> fixed VRF region. Clears the dynamic region.
    MvFixed { tile: u32, rows: Vec<u32> },
    /// Dense buffer -> one dynamic VRF slot, for one sub-row.
    MvDyn {
        tile: u32,
        subrow: u32,
        slot: u8,
        rows: Vec<u32>,
    },
    /// Row-wise SpMM of one sub-row against resident dense rows.
    Cmp {
        tile: u32,
        subrow: u32,
        chunk: u32,
        slot: u8,
        accumulate: bool,
        dest: Region,
    },
    /// Output tile (row block × column chunk) -> DRAM.
    StD { block: u32, chunk: u32, bytes: u64 },
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::Config { .. } => Opcode::Config,
            Instruction::LdS { .. } => Opcode::LdS,
            Instruction::LdD { .. } => Opcode::LdD,
            Instruction::CalIdx { .. } => Opcode::CalIdx,
            Instruction::MvFixed { .. } => Opcode::MvFixed,
            Instruction::MvDyn { .. } => Opcode::MvDyn,
            Instruction::Cmp { .. } => Opcode::Cmp,
            Instruction::StD { .. } => Opcode::StD,
        }
    }

    /// Tile-directory index the instruction refers to (ST_D refers to none).
    pub fn tile(&self) -> Option<u32> {
        match *self {
            Instruction::Config { tile, .. }
            | Instruction::LdS { tile, .. }
            | Instruction::LdD { tile, .. }
            | Instruction::CalIdx { tile }
            | Instruction::MvFixed { tile, .. }
            | Instruction::MvDyn { tile, .. }
            | Instruction::Cmp { tile, .. } => Some(tile),
            Instruction::StD { .. } => None,
        }
    }
}

fn fmt_rows(rows: &[u32]) -> String {
    if rows.is_empty() {
        "-".to_string()
    } else {
        rows.iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = self.opcode();
        match self {
            Instruction::Config { tile, k } => write!(f, "{op} tile={tile} k={k}"),
            Instruction::LdS { tile, bytes } => write!(f, "{op} tile={tile} bytes={bytes}"),
            Instruction::LdD { tile, chunk, bytes } => {
                write!(f, "{op} tile={tile} chunk={chunk} bytes={bytes}")
            }
            Instruction::CalIdx { tile } => write!(f, "{op} tile={tile}"),
            Instruction::MvFixed { tile, rows } => {
                write!(f, "{op} tile={tile} rows={}", fmt_rows(rows))
            }
            Instruction::MvDyn {
                tile,
                subrow,
                slot,
                rows,
            } => write!(
                f,
                "{op} tile={tile} subrow={subrow} slot={slot} rows={}",
                fmt_rows(rows)
            ),
            Instruction::Cmp {
                tile,
                subrow,
                chunk,
                slot,
                accumulate,
                dest,
            } => write!(
                f,
                "{op} tile={tile} subrow={subrow} chunk={chunk} slot={slot} acc={} dest={}",
                *accumulate as u8,
                match dest {
                    Region::Temp => "temp",
                    Region::Result => "result",
                }
            ),
            Instruction::StD {
                block,
                chunk,
                bytes,
            } => write!(f, "{op} block={block} chunk={chunk} bytes={bytes}"),
        }
    }
}

struct Args<'a> {
    line: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Args<'a> {
    fn get(&self, key: &str) -> Result<&'a str> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
            .ok_or_else(|| Error::Format(format!("missing {key}= in {:?}", self.line)))
    }

    fn num<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("bad {key}={v} in {:?}", self.line)))
    }

    fn rows(&self) -> Result<Vec<u32>> {
        let v = self.get("rows")?;
        if v == "-" {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Format(format!("bad row id {s:?} in {:?}", self.line)))
            })
            .collect()
    }
}

impl FromStr for Instruction {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut toks = line.split_whitespace();
        let op: Opcode = toks
            .next()
            .ok_or_else(|| Error::Format("empty instruction".into()))?
            .parse()?;
        let pairs = toks
            .map(|t| {
                t.split_once('=')
                    .ok_or_else(|| Error::Format(format!("expected key=value, got {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let a = Args { line, pairs };
        Ok(match op {
            Opcode::Config => Instruction::Config {
                tile: a.num("tile")?,
                k: a.num("k")?,
            },
            Opcode::LdS => Instruction::LdS {
                tile: a.num("tile")?,
                bytes: a.num("bytes")?,
            },
            Opcode::LdD => Instruction::LdD {
                tile: a.num("tile")?,
                chunk: a.num("chunk")?,
                bytes: a.num("bytes")?,
            },
            Opcode::CalIdx => Instruction::CalIdx {
                tile: a.num("tile")?,
            },
            Opcode::MvFixed => Instruction::MvFixed {
                tile: a.num("tile")?,
                rows: a.rows()?,
            },
            Opcode::MvDyn => Instruction::MvDyn {
                tile: a.num("tile")?,
                subrow: a.num("subrow")?,
                slot: a.num("slot")?,
                rows: a.rows()?,
            },
            Opcode::Cmp => Instruction::Cmp {
                tile: a.num("tile")?,
                subrow: a.num("subrow")?,
                chunk: a.num("chunk")?,
                slot: a.num("slot")?,
                accumulate: match a.get("acc")? {
                    "0" => false,
                    "1" => true,
                    v => return Err(Error::Format(format!("bad acc={v}"))),
                },
                dest: match a.get("dest")? {
                    "temp" => Region::Temp,
                    "result" => Region::Result,
                    v => return Err(Error::Format(format!("bad dest={v}"))),
                },
            },
            Opcode::StD => Instruction::StD {
                block: a.num("block")?,
                chunk: a.num("chunk")?,
                bytes: a.num("bytes")?,
            },
        })
    }
}
