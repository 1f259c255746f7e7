use thiserror::Error;

use crate::expr::ParseError;
use crate::qcm::EnsembleId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("register of {requested} qubits exceeds the cap of {cap}")]
    TooManyQubits { requested: usize, cap: usize },

    #[error("qubit position {position} is outside a {n_qubits}-qubit register")]
    InvalidPosition { position: usize, n_qubits: usize },

    #[error("qubit position {0} appears more than once")]
    DuplicatePosition(usize),

    #[error("gate {gate} acts on {expected} qubits but {got} positions were given")]
    ArityMismatch {
        gate: String,
        expected: usize,
        got: usize,
    },

    #[error("register parts do not partition the {n_qubits} qubit positions")]
    NotAPartition { n_qubits: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid gate {gate}: {reason}")]
    InvalidGate { gate: String, reason: String },

    #[error("value {value} is outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("unknown ensemble {0}")]
    UnknownEnsemble(EnsembleId),

    #[error("ensemble {0} was already consumed")]
    ConsumedEnsemble(EnsembleId),

    #[error("ensemble {0} used as both operands; clone it first")]
    SameOperand(EnsembleId),

    #[error("denominator {value:e} is below the floor {floor:e}")]
    DenominatorNearZero { value: f64, floor: f64 },

    #[error("divisor {value:e} is below the floor {floor:e}")]
    DivisorNearZero { value: f64, floor: f64 },

    #[error(
        "sampled denominator {denominator:e} is within {z} standard errors ({standard_error:e}) of zero; increase the shot count"
    )]
    DenominatorIndistinguishableFromZero {
        denominator: f64,
        standard_error: f64,
        z: f64,
    },

    #[error("shot count must be at least 1")]
    InvalidShots,

    #[error("confidence level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
