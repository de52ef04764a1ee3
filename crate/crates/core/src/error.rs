use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotQubitRegister(usize),

    #[error("register of {0} qubits exceeds the supported maximum of {max}", max = crate::qcore::MAX_QUBITS)]
    RegisterTooLarge(usize),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit index {0} appears more than once")]
    DuplicateQubit(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not idempotent (max deviation {0:.3e})")]
    NotIdempotent(f64),

    #[error("operator is not diagonal (max off-diagonal {0:.3e})")]
    NotDiagonal(f64),

    #[error("trace {found:.3e} violates the {kind} constraint")]
    BadTrace { kind: &'static str, found: f64 },

    #[error("state has negative eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("expectation has imaginary part {0:.3e}; observable or state is not Hermitian")]
    ComplexExpectation(f64),

    #[error("operation requires a normalized state")]
    RequiresNormalized,

    #[error("missing block for ancilla state {0}")]
    MissingBlock(usize),

    #[error("level {level} out of range for a {d}-level oscillator")]
    LevelOutOfRange { level: usize, d: usize },

    #[error("inconsistent joint-probability table: {0}")]
    InconsistentTable(String),

    #[error("design matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("records inconsistent with plan: residual {residual:.3e} exceeds {limit:.3e}")]
    InconsistentRecords { residual: f64, limit: f64 },

    #[error("zero-norm input")]
    ZeroNorm,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
