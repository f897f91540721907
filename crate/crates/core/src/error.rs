use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("not admissible: {0}")]
    NotAdmissible(String),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("realization exceeded the state cap of {cap} states (non-terminating construction)")]
    StateCap { cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid integrator config: {0}")]
    Config(String),

    #[error("step size {h:e} fell below the minimum at t = {t}; last good state {state:?}")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("theta = {theta}: {source}")]
    AtTheta {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("term {term} ({composition}): {source}")]
    AtTerm {
        term: usize,
        composition: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
