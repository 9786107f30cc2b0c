use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator x{index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("rank must be positive")]
    ZeroRank,

    #[error("exponent overflow while reducing a word")]
    ExponentOverflow,

    #[error("series has constant coefficient {0}, expected 1")]
    NotUnipotent(String),

    #[error("comparison not decided up to truncation degree {max_degree}")]
    DepthExceeded { max_degree: usize },

    #[error("reduced rank {rank} exceeds the configured limit {limit}")]
    ReducedRankTooLarge { rank: usize, limit: usize },

    #[error("endomorphism table for rank {rank} has {images} images")]
    TableLength { rank: usize, images: usize },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("unknown generator g{factor}.{generator}")]
    UnknownGenerator { factor: usize, generator: usize },

    #[error("element does not belong to this tower: {0}")]
    SpecMismatch(String),

    #[error("invalid tower spec: {0}")]
    InvalidSpec(String),

    #[error("tower with a single factor has no retraction")]
    NoRetraction,

    #[error("spec file error at line {line}, column {column}: {message}")]
    SpecFile { line: usize, column: usize, message: String },

    #[error("spec file error at {path}: {message}")]
    SpecEntry { path: String, message: String },

    #[error("unsupported preset parameters: {0}")]
    UnsupportedPreset(String),
}
