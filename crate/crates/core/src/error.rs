use thiserror::Error;

/// Everything that can go wrong when building or combining effect-algebra objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("objects live on different cone models")]
    ModelMismatch,

    #[error("invalid cone model: {0}")]
    InvalidModel(String),

    #[error("not an effect: {0}")]
    NotAnEffect(String),

    #[error("not a state: {0}")]
    NotAState(String),

    #[error("effects are not orthogonal: their sum exceeds the unit")]
    NotOrthogonal,

    #[error("scalar {0} is outside [0, 1]")]
    ScalarOutOfRange(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid operation: {0}")]
    InvalidOperation(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("unknown outcome label `{0}`")]
    UnknownOutcome(String),

    #[error("the measured effect has probability {0} in this state; the update is undefined")]
    ZeroProbability(f64),

    #[error("the operation does not measure the given effect (deviation {0:e})")]
    DoesNotMeasure(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("malformed linear program: {0}")]
    MalformedProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
