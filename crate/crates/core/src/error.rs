use thiserror::Error;

use crate::state::ModeLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has no weight left to normalize")]
    ZeroState,
    #[error("a state needs at least one term")]
    EmptyState,
    #[error("states use different polarization conventions")]
    IncompatibleStates,
    #[error("kets mix polarization-tagged and untagged photons")]
    MixedConvention,
    #[error("kets carry different photon numbers ({0} vs {1})")]
    MixedPhotonNumber(usize, usize),
    #[error("squared norm {0} exceeds 1")]
    NormTooLarge(f64),
    #[error("mode {0} would hold more than one photon")]
    ModeCollision(ModeLabel),
    #[error("mode {0} is not registered in this state")]
    UnknownMode(ModeLabel),
    #[error("transmittance {0} is outside [0, 1]")]
    BadTransmittance(f64),
    #[error("element requires polarization-tagged photons")]
    WrongConvention,
    #[error("invalid coefficients: {0}")]
    BadCoefficients(String),
    #[error("invalid mode labels: {0}")]
    BadLabels(String),
    #[error("invalid plan: {0}")]
    BadPlan(String),
    #[error("outside the comparison domain: {0}")]
    Domain(String),
}
