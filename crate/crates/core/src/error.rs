use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("leading matrix is singular; the series is not invertible on its window")]
    SingularLeadingMatrix,
    #[error("exponential needs a positive-valuation argument or an exactly nilpotent one")]
    NonPositiveValuation,
    #[error("matrix is not in the Lie algebra: {0}")]
    NotInAlgebra(String),
    #[error("gauge element is not in the group: {0}")]
    NotInGroup(String),
    #[error("matrix is not regular")]
    NotRegular,
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix is not regular nilpotent")]
    NotRegularNilpotent,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("order undetermined: all coefficients vanish on the known window")]
    OrderUndetermined,
    #[error("order {0} is too large: normalization needs order < -1")]
    OrderTooLarge(i64),
    #[error("order {0} is invalid: regularization needs order <= -2")]
    InvalidOrder(i64),
    #[error("linear solver degenerate: {0}")]
    SolverDegenerate(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("gauge element is not a point of the fiber")]
    NotMember,
    #[error("leading-term nilpotency violated: {0}")]
    LemmaViolation(String),
    #[error("tangent dimension did not stabilize: {lower} at depth {depth}, {upper} at depth {}", depth + 2)]
    Unstabilized { depth: i64, lower: usize, upper: usize },
    #[error("incompatible algebra contexts: {0}")]
    ContextMismatch(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("malformed JSON: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// Failures that a larger precision or search budget may cure.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::SearchExhausted(_)
                | Error::PrecisionExhausted(_)
                | Error::OrderUndetermined
                | Error::Unstabilized { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularLeadingMatrix => "SingularLeadingMatrix",
            Error::NonPositiveValuation => "NonPositiveValuation",
            Error::NotInAlgebra(_) => "NotInAlgebra",
            Error::NotInGroup(_) => "NotInGroup",
            Error::NotRegular => "NotRegular",
            Error::NotNilpotent => "NotNilpotent",
            Error::NotRegularNilpotent => "NotRegularNilpotent",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::OrderUndetermined => "OrderUndetermined",
            Error::OrderTooLarge(_) => "OrderTooLarge",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::SolverDegenerate(_) => "SolverDegenerate",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::NotMember => "NotMember",
            Error::LemmaViolation(_) => "LemmaViolation",
            Error::Unstabilized { .. } => "Unstabilized",
            Error::ContextMismatch(_) => "ContextMismatch",
            Error::Invariant(_) => "Invariant",
            Error::Schema { .. } => "Schema",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
