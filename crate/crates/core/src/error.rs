use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate protocol parameters: m={m}, n={n} (both must be at least 1)")]
    DegenerateParameters { m: usize, n: usize },

    #[error("message must contain at least one bit")]
    EmptyMessage,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("attack size r={r} exceeds state length {len}")]
    AttackTooLarge { r: usize, len: usize },

    #[error("position {position} is out of range for state length {len}")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("position {0} is attacked more than once")]
    DuplicatePosition(usize),

    #[error("invalid secret key: {0}")]
    InvalidKey(String),

    #[error("invalid bitstring: {0:?}")]
    InvalidBitString(String),

    #[error("prover strategy {strategy} cannot serve task {task}")]
    IncompatibleStrategy { strategy: &'static str, task: &'static str },

    #[error("conditional estimate undefined: no trial was accepted")]
    NoAcceptedTrials,

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("authentication key already used for another message")]
    KeyReuse,

    #[error("unsupported field size: {0} bits")]
    UnsupportedFieldSize(u32),

    #[error("value does not fit in the field: {0}")]
    FieldOverflow(String),

    #[error("message of {bits} bits is too long for a {field_bits}-bit length block")]
    MessageTooLong { bits: usize, field_bits: u32 },

    #[error("invalid hex string: {0:?}")]
    InvalidHex(String),
}
