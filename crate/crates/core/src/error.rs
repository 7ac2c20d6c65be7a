use alloc::string::String;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("node id {id} out of range 1..={max}")]
    NodeOutOfRange { id: u32, max: u32 },
    #[error("token id {id} out of range 0..={max}")]
    IdOutOfRange { id: u32, max: u32 },
    #[error("shape mismatch in {op}: {lhs_rows}x{lhs_cols} vs {rhs_rows}x{rhs_cols}")]
    ShapeMismatch {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("data length {len} does not match {rows}x{cols}")]
    BadLength { rows: usize, cols: usize, len: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("graph too small: {0}")]
    GraphTooSmall(&'static str),
    #[error("not enough examples: need at least {need}, got {got}")]
    TooFewExamples { need: usize, got: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("no usable context")]
    NoUsableContext,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
