use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid group spec: {0}")]
    InvalidGroupSpec(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("not a homomorphism: entry ({row},{col}) = {value} violates {value}*{col_modulus} = 0 mod {row_modulus}")]
    NotAHomomorphism {
        row: usize,
        col: usize,
        value: u64,
        row_modulus: u64,
        col_modulus: u64,
    },

    #[error("endomorphism is not an automorphism")]
    NotAnAutomorphism,

    #[error("not a probability distribution: {0}")]
    NotAProbability(String),

    #[error("objects live on different groups")]
    GroupMismatch,

    #[error("group contains elements of order 2")]
    OrderTwoElementPresent,

    #[error("characteristic function vanishes (min modulus {min_modulus:e})")]
    VanishingCF { min_modulus: f64 },

    #[error("conditional symmetry hypothesis does not hold")]
    HypothesisNotSatisfied,

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("support of omega is not contained in Ker(I+alpha)")]
    SupportViolation,

    #[error("random generation exhausted after {attempts} attempts: {what}")]
    GenerationExhausted { what: String, attempts: usize },

    #[error("invalid theta input: {0}")]
    InvalidThetaInput(String),

    #[error("invalid gaussian parameters: {0}")]
    InvalidGaussian(String),

    #[error("evaluation grid is empty")]
    GridEmpty,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// The variant name, as reported in JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGroupSpec(_) => "InvalidGroupSpec",
            Error::InvalidElement(_) => "InvalidElement",
            Error::NotAHomomorphism { .. } => "NotAHomomorphism",
            Error::NotAnAutomorphism => "NotAnAutomorphism",
            Error::NotAProbability(_) => "NotAProbability",
            Error::GroupMismatch => "GroupMismatch",
            Error::OrderTwoElementPresent => "OrderTwoElementPresent",
            Error::VanishingCF { .. } => "VanishingCF",
            Error::HypothesisNotSatisfied => "HypothesisNotSatisfied",
            Error::DecompositionFailed(_) => "DecompositionFailed",
            Error::SupportViolation => "SupportViolation",
            Error::GenerationExhausted { .. } => "GenerationExhausted",
            Error::InvalidThetaInput(_) => "InvalidThetaInput",
            Error::InvalidGaussian(_) => "InvalidGaussian",
            Error::GridEmpty => "GridEmpty",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
