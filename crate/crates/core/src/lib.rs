//! Quadrature noise spectra of a degenerate optical parametric amplifier with
//! photothermal (thermo-refractive and thermo-elastic) noise, and their
//! projection onto the quantum noise of a conventional GW interferometer.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`.

pub mod config;
pub mod crystal;
pub mod dynamics;
pub mod error;
pub mod gw;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod spectra;
pub mod steady_state;

pub use config::{derive_rates, load_params, load_params_with, ConfigError, LoadOptions, PumpSetting};
pub use crystal::{coupling_derivatives, coupling_strength, phase_mismatch, CrystalError};
pub use dynamics::{DynamicsError, ThetaSet};
pub use error::Error;
pub use gw::{GwError, SqueezeAngle};
pub use oracle::{sde_oracle, OracleError, OracleEstimate, OracleSettings};
pub use scalar::{to_db, Cx, Real};
pub use spectra::{cutoff_estimate, spectrum, FrequencyGrid, Quadrature, SpectraError};
pub use steady_state::SteadyStateError;

pub type Params = config::OpaParams<f64>;
pub type Rates = config::CavityRates<f64>;
pub type Model = spectra::Opa<f64>;
pub type Point = spectra::SpectrumPoint<f64>;
pub type Steady = steady_state::SteadyState<f64>;
pub type Coupling = crystal::CouplingState<f64>;
pub type Thermal = crystal::ThermalCoeffs<f64>;
pub type Ifo = gw::IfoParams<f64>;
pub type InputVariances = spectra::InputVariances<f64>;
