use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Universal gas constant, J/(mol·K). Fixed, never fitted.
pub const GAS_CONSTANT: f64 = 8.314;

/// Activation energy used for steel, J/mol.
pub const DEFAULT_ACTIVATION_ENERGY: f64 = 50_000.0;

/// Offset between Celsius and Kelvin.
pub const ABSOLUTE_ZERO_C: f64 = -273.15;

/// Parameters of the temperature/humidity corrosion model.
///
/// Only `c` and `n` are calibrated; `ea` and `r_gas` stay at their
/// physical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Scale coefficient (µm/year).
    #[serde(rename = "C")]
    pub c: f64,
    /// Humidity exponent.
    pub n: f64,
    /// Activation energy (J/mol).
    #[serde(rename = "Ea")]
    pub ea: f64,
    /// Gas constant (J/(mol·K)).
    #[serde(rename = "R_gas")]
    pub r_gas: f64,
}

impl Default for ModelParams {
    /// The uncalibrated starting point: `C = 50`, `n = 1.5`.
    fn default() -> Self {
        Self::new(50.0, 1.5)
    }
}

impl ModelParams {
    pub fn new(c: f64, n: f64) -> Self {
        Self {
            c,
            n,
            ea: DEFAULT_ACTIVATION_ENERGY,
            r_gas: GAS_CONSTANT,
        }
    }

    pub fn with_activation_energy(mut self, ea: f64) -> Self {
        self.ea = ea;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(CoreError::InvalidParams(format!("C must be positive, got {}", self.c)));
        }
        if !(self.n.is_finite() && self.n > 0.0 && self.n <= 10.0) {
            return Err(CoreError::InvalidParams(format!("n must lie in (0, 10], got {}", self.n)));
        }
        if !(self.ea.is_finite() && self.ea > 0.0) {
            return Err(CoreError::InvalidParams(format!("Ea must be positive, got {}", self.ea)));
        }
        if self.r_gas != GAS_CONSTANT {
            return Err(CoreError::InvalidParams(format!(
                "R_gas is fixed at {GAS_CONSTANT}, got {}",
                self.r_gas
            )));
        }
        Ok(())
    }

    /// `exp(−Ea / (R·T))` for a Celsius temperature.
    pub fn arrhenius_factor(&self, temp_c: f64) -> f64 {
        (-self.ea / (self.r_gas * (temp_c - ABSOLUTE_ZERO_C))).exp()
    }
}

/// Corrosion rate in µm/year at `temp_c` (°C) and relative humidity
/// `rh_frac` (0..=1).
pub fn corrosion_rate(params: &ModelParams, temp_c: f64, rh_frac: f64) -> Result<f64> {
    if !temp_c.is_finite() || !rh_frac.is_finite() {
        return Err(CoreError::Domain(format!(
            "non-finite input (temp_c={temp_c}, rh_frac={rh_frac})"
        )));
    }
    if !(0.0..=1.0).contains(&rh_frac) {
        return Err(CoreError::Domain(format!("rh_frac {rh_frac} outside [0, 1]")));
    }
    if temp_c <= ABSOLUTE_ZERO_C {
        return Err(CoreError::Domain(format!("temperature {temp_c} °C below absolute zero")));
    }
    if rh_frac == 0.0 {
        return Ok(0.0);
    }
    Ok(params.c * rh_frac.powf(params.n) * params.arrhenius_factor(temp_c))
}
