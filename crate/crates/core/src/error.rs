use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("C_k is only defined for k >= 1")]
    ZeroIndex,
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("residue {residue} is not reduced modulo {modulus}")]
    Unreduced { residue: u64, modulus: u64 },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid interval ({lo}, {hi}]")]
    InvalidInterval { lo: u64, hi: u64 },
    #[error("segment (i = {i}, j = {j}) is outside the tree of depth {depth}")]
    SegmentOutOfRange { i: u32, j: u64, depth: u32 },
    #[error("checkpoint covers C_1..C_{have}, past the requested prefix m = {want}")]
    CheckpointAhead { have: u64, want: u64 },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint store {0} is locked by another scan")]
    StoreLocked(PathBuf),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("polynomial moduli differ ({0} vs {1})")]
    ModulusMismatch(u64, u64),
    #[error("unsupported modulus {0}")]
    UnsupportedModulus(u64),
    #[error("Wilson self-check failed for p = {p}: (p-1)! reduced to {got}")]
    WilsonCheck { p: u64, got: u64 },
    #[error("{0}")]
    Precondition(String),
    #[error("malformed residue file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
