use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("alphabet size {0} is invalid: must be even and at least 4")]
    InvalidAlphabetSize(usize),
    #[error("letter {0} appears more than once in the reference word")]
    DuplicateLetter(String),
    #[error("reference word has length {found}, expected {expected}")]
    ReferenceLength { expected: usize, found: usize },
    #[error("inverse pairing is not a fixed-point-free involution: {0}")]
    BadPairing(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("malformed surface description: {0}")]
    MalformedSurface(String),
    #[error("word is not reduced: letters {0} and {1} are inverse neighbours")]
    NotReduced(usize, usize),
    #[error("word is not joinable: last letter is the inverse of the first")]
    NotJoinable,
    #[error("word must have length at least {min}, got {len}")]
    TooShort { min: usize, len: usize },
    #[error("prefixes must have length at least k = {k} (got {left} and {right})")]
    PrefixTooShort { k: usize, left: usize, right: usize },
    #[error("kernel index k must be at least 2, got {0}")]
    KernelIndex(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("necklace has period {period} < length {len}; pass force_nonprimitive to evaluate anyway")]
    NonPrimitive { period: usize, len: usize },
    #[error("gap argument out of range: {0}")]
    GapOutOfRange(i64),
    #[error("exhaustive run over {0} words exceeds the configured limit; use --force")]
    Infeasible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
