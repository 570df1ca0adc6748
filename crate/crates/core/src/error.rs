use thiserror::Error;

/// Errors produced by field evaluation, family evaluation and the checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered during evaluation")]
    NumericalBlowup,
    #[error("direction y = 0 is not admissible for a Finsler argument")]
    DegenerateDirection,
    #[error("evaluation point left the declared domain: {0}")]
    DomainExit(String),
    #[error("metric tensor a_ij is singular at the evaluation point")]
    SingularMetric,
    #[error("1-form degenerates (xi = eta = 0) at a sampled point")]
    DegenerateForm,
    #[error("ODE coefficient vanishes on the integration interval")]
    SingularODE,
    #[error("family is of Randers type: 2*a4 + a2^2 = 0")]
    RandersTypeDegenerate,
    #[error("fundamental tensor g_ij is singular at the sample")]
    SingularFundamentalTensor,
    #[error("spray formula singular: phi - s*phi' = 0 or Delta = 0")]
    SprayFormulaSingular,
    #[error("F is not positive at the sample")]
    NotPositive,
    #[error("fewer than {0} usable angle samples")]
    InsufficientSamples(usize),
    #[error("prerequisite check failed: {0}")]
    PrerequisiteFailed(String),
    #[error("parameter out of admissible range: {0}")]
    RangeViolation(String),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
