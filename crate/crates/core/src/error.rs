use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("{what} index {index} out of range (bound {bound})")]
    Bounds {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid CSR matrix: {0}")]
    InvalidCsr(String),

    #[error("compile error in tile {tile}: {msg}")]
    Compile { tile: usize, msg: String },

    #[error("illegal program at instruction {pc}: {msg}")]
    IllegalProgram { pc: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
