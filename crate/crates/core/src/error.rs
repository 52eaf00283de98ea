use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("inadmissible boundary pair: {0}")]
    InvalidPair(String),

    #[error("singular matrix (condition estimate {condition:e})")]
    Singular { condition: f64 },

    /// Denominator of the S-matrix is singular; carries the offending eigenvalue of U.
    #[error("S-matrix pole: U has eigenvalue {re:+e}{im:+e}i")]
    ScatteringPole { re: f64, im: f64 },

    /// Evaluation energy sits on (or numerically next to) a pole of a Green's function.
    #[error("near pole: {what} (|denominator| = {magnitude:e})")]
    NearPole { what: &'static str, magnitude: f64 },

    #[error("degenerate approximation stage: {0}")]
    DegenerateStage(String),

    #[error("energy lies on the spectrum of the discretized operator")]
    EnergyOnSpectrum,
}

pub type Result<T> = std::result::Result<T, Error>;
