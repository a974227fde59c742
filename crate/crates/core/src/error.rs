//! Crate-wide error type with machine-readable categories.

use thiserror::Error;

use crate::config::ConfigError;
use crate::crystal::CrystalError;
use crate::dynamics::DynamicsError;
use crate::gw::GwError;
use crate::oracle::OracleError;
use crate::spectra::SpectraError;
use crate::steady_state::SteadyStateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Crystal(#[from] CrystalError),
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Gw(#[from] GwError),
}

impl Error {
    /// Stable snake_case identifier of the failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(e) => match e {
                ConfigError::MissingKey(_) => "missing_key",
                ConfigError::UnitParseError(_) => "unit_parse_error",
                ConfigError::InvariantViolation(_) => "invariant_violation",
                ConfigError::Syntax { .. } => "config_syntax",
                ConfigError::UnknownKey(_) => "unknown_key",
                ConfigError::DuplicateKey(_) => "duplicate_key",
            },
            Error::Crystal(CrystalError::SingularInput { .. }) => "singular_input",
            Error::SteadyState(e) => match e {
                SteadyStateError::AboveThreshold { .. } => "above_threshold",
                SteadyStateError::ZeroCoupling => "zero_coupling",
                SteadyStateError::PumpBlocked => "pump_blocked",
            },
            Error::Dynamics(DynamicsError::SingularSystem { .. }) => "singular_system",
            Error::Spectra(e) => match e {
                SpectraError::NoCutoffFound(_) => "no_cutoff_found",
                SpectraError::AssumptionViolated(_) => "assumption_violated",
                SpectraError::InvalidGrid(_) => "invalid_grid",
            },
            Error::Oracle(e) => match e {
                OracleError::UnstableIntegration(_) => "unstable_integration",
                OracleError::InvalidProbe(_) => "invalid_probe",
            },
            Error::Gw(e) => match e {
                GwError::ZeroFrequency => "zero_frequency",
                GwError::MissingFilterLinewidth => "missing_filter_linewidth",
                GwError::InvalidIfo(_) => "invalid_ifo",
            },
        }
    }
}
