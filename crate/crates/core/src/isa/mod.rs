//! Coarse-grained instruction set, program container and the compiler that
//! lowers tile plans into an output-stationary instruction stream.

mod check;
mod compile;
mod instr;
mod program;

pub use check::check_program;
pub use compile::{compile, sparse_tile_bytes, CompileParams};
pub use instr::{Instruction, Opcode, Region};
pub use program::{count_by_opcode, disassemble, expand_fine_grained, parse_disassembly, Program};
