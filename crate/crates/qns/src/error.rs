use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("leg name `{0}` appears more than once")]
    LegCollision(String),
    #[error("unknown leg `{0}`")]
    UnknownLeg(String),
    #[error("leg `{0}` has size zero")]
    EmptyLeg(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("requested order is not a permutation of the legs")]
    NotAPermutation,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace preservation violated by {0:e}")]
    NotTracePreserving(f64),
    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),
    #[error("operator entries fail to commute (violation {0:e})")]
    Commutation(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("not a projection (deviation {0:e})")]
    NotProjection(f64),
    #[error("vector is not normalised (norm {0})")]
    NotUnit(f64),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("block isometry condition violated by {0:e}")]
    NotIsometry(f64),
    #[error("functional is not tracial on the generators (violation {0:e})")]
    NotTracial(f64),
    #[error("marginal depends on the auxiliary state (deviation {0:e})")]
    MarginalDependence(f64),
    #[error("consistency check failed: {what} deviates by {deviation:e}")]
    Inconsistent { what: String, deviation: f64 },
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("game has no admissible tuples")]
    EmptyGame,
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
