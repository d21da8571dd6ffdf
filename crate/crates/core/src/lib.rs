//! Physics side of the corrosion monitoring stack.
//!
//! The corrosion rate of exposed steel is modelled from air temperature and
//! relative humidity alone:
//!
//! ```text
//! CR = C · RH^n · exp(−Ea / (R · T))
//! ```
//!
//! with `RH` as a fraction, `T` in Kelvin and `CR` in µm/year. `C` and `n`
//! are calibrated against observed rates by damped Gauss-Newton least
//! squares ([`calibrate`]); `Ea` and `R` are held fixed. Rates map onto
//! ISO 9223-style corrosivity bands and a binary alarm via
//! [`classify_risk`].

mod calibrate;
mod error;
pub mod io;
mod model;
mod risk;

pub use calibrate::{calibrate, residual_norm, CalibrationOptions, CalibrationPoint, CalibrationResult};
pub use error::{CoreError, Result};
pub use model::{corrosion_rate, ModelParams, ABSOLUTE_ZERO_C, DEFAULT_ACTIVATION_ENERGY, GAS_CONSTANT};
pub use risk::{classify_risk, classify_risk_with, CorrosivityClass, RiskClass, RiskThresholds};
