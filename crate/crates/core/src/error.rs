use thiserror::Error;

/// Errors raised across the construction and spectral pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration step size underflow at r = {r}")]
    StepUnderflow { r: f64 },

    #[error("non-finite state encountered at r = {r}")]
    NonFinite { r: f64 },

    #[error("bridge bracket 1/2 < f < 2 violated at r = {r} (f = {f})")]
    BridgeBracket { r: f64, f: f64 },

    #[error("contract II (envelope) violated at r = {r}: |V - tau^2| (1 + r) / h(r) = {ratio}")]
    Envelope { r: f64, ratio: f64 },

    #[error("pole proximity: |J_nu(sqrt z)| = {value:e} near Bessel zero lambda = {nearest_zero}")]
    Pole { value: f64, nearest_zero: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
