use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("second moment of the weights diverges: 2 * proposal variance ({proposal_variance}) must exceed target variance ({target_variance})")]
    DivergentSecondMoment {
        target_variance: f64,
        proposal_variance: f64,
    },

    #[error("every importance weight is zero")]
    AllWeightsZero,

    #[error("normalized weights are invalid: {0}")]
    InvalidWeights(String),

    #[error("the integrand vanishes at every weighted sample")]
    NoMassUnderH,

    #[error("SNIS replicate variance is zero; increase the number of replicates")]
    DegenerateVariance,

    #[error("true value must be non-zero for a relative error")]
    ZeroTrueValue,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
