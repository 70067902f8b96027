use thiserror::Error;

use crate::harness::scenario::ScenarioError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode id {0:?}")]
    InvalidMode(String),

    #[error("{0} photons exceed the cap of {cap}", cap = crate::fockstate::MAX_PHOTONS)]
    PhotonCap(usize),

    #[error("photon number mismatch: {0} vs {1}")]
    PhotonNumberMismatch(usize, usize),

    #[error("states overlap in spatial mode `{0}`")]
    OverlappingModes(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("slot map is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("mode `{0}` is not registered in the circuit")]
    UnknownMode(String),

    #[error("outcome has zero probability")]
    ZeroProbability,

    #[error("conditional state is a mixture over {0} orthogonal detector records")]
    MixedConditional(usize),

    #[error("no correction is defined for a rejected outcome")]
    NoCorrection,

    #[error("outcome spaces differ: {0}")]
    OutcomeSpaceMismatch(String),

    #[error("curve is degenerate: {0}")]
    DegenerateCurve(&'static str),

    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
