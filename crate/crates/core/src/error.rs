use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("key component out of domain: {0}")]
    InvalidKeyDomain(String),

    #[error("cannot rank an empty segment")]
    EmptySegment,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("value {value} at position {position} is outside 0..{levels}")]
    ValueOutOfRange {
        position: usize,
        value: u32,
        levels: u32,
    },

    /// A plain/cipher pair whose per-leaf value counts disagree, so it cannot
    /// come from a pure permutation under the key the tree has seen so far.
    #[error("pair {pair} is inconsistent with the permutation model (leaf {leaf}, value {value}: {plain} plain vs {cipher} cipher positions)")]
    InconsistentPair {
        pair: usize,
        leaf: usize,
        value: u32,
        plain: usize,
        cipher: usize,
    },

    #[error("no plaintext/ciphertext pairs supplied")]
    NoPairs,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
