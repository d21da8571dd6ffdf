//! Shared outdoor environment.
//!
//! Temperature is a diurnal plus seasonal sinusoid on top of a slow AR(1)
//! anomaly; relative humidity falls linearly with the temperature anomaly
//! and carries its own AR(1) term. Humidity is not clipped and can exceed
//! 100 % near saturation.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, unit_f64};
use crate::station::WindDir;

const MS_PER_MINUTE: i64 = 60_000;
const DAY_MS: f64 = 86_400_000.0;
const YEAR_MS: f64 = 365.0 * DAY_MS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentModel {
    pub temp_mean_c: f64,
    pub diurnal_amplitude_c: f64,
    pub diurnal_peak_hour: f64,
    pub seasonal_amplitude_c: f64,
    /// Day of the simulation year at which the seasonal term peaks.
    pub seasonal_peak_day: f64,
    pub temp_noise_std_c: f64,
    pub rh_mean_pct: f64,
    /// Humidity drop per °C of temperature anomaly.
    pub rh_temp_slope: f64,
    pub rh_noise_std_pct: f64,
    /// Correlation time of the AR(1) anomalies, minutes.
    pub noise_tau_min: f64,
    pub wind_mean_kmh: f64,
    pub wind_diurnal_kmh: f64,
    pub wind_noise_std_kmh: f64,
    pub prevailing_wind_deg: f64,
    pub wind_dir_noise_deg: f64,
    /// Rain is possible above this outdoor humidity.
    pub rain_rh_threshold_pct: f64,
}

impl Default for EnvironmentModel {
    /// Long-run moments: T 30.3 ± 5.7 °C, RH 66.5 ± 13.2 %.
    ///
    /// var(T) = A_d²/2 + A_s²/2 + σ_T² = 12.5 + 8 + 11.99 = 32.49;
    /// var(RH) = β²·var(T) + σ_RH² = 83.17 + 91.07 = 174.24.
    fn default() -> Self {
        Self {
            temp_mean_c: 30.3,
            diurnal_amplitude_c: 5.0,
            diurnal_peak_hour: 14.0,
            seasonal_amplitude_c: 4.0,
            seasonal_peak_day: 120.0,
            temp_noise_std_c: 11.99f64.sqrt(),
            rh_mean_pct: 66.5,
            rh_temp_slope: 1.6,
            rh_noise_std_pct: 91.0684f64.sqrt(),
            noise_tau_min: 180.0,
            wind_mean_kmh: 8.0,
            wind_diurnal_kmh: 4.0,
            wind_noise_std_kmh: 3.0,
            prevailing_wind_deg: 45.0,
            wind_dir_noise_deg: 35.0,
            rain_rh_threshold_pct: 90.0,
        }
    }
}

impl EnvironmentModel {
    /// A flat environment at the long-run means.
    pub fn constant() -> Self {
        Self {
            diurnal_amplitude_c: 0.0,
            seasonal_amplitude_c: 0.0,
            temp_noise_std_c: 0.0,
            rh_noise_std_pct: 0.0,
            wind_diurnal_kmh: 0.0,
            wind_noise_std_kmh: 0.0,
            wind_dir_noise_deg: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSample {
    pub temp_c: f64,
    pub rh_pct: f64,
    pub wind_kmh: f64,
    pub wind_dir: WindDir,
    pub rain_mm: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Anomaly {
    temp: f64,
    rh: f64,
    wind: f64,
    dir: f64,
}

/// Environment realisation for one seed over a fixed horizon.
///
/// The AR(1) anomalies live on a one-minute grid precomputed up to the
/// horizon, so sampling is a pure function of `(seed, t)`.
#[derive(Debug, Clone)]
pub struct Environment {
    model: EnvironmentModel,
    seed: u64,
    anomalies: Vec<Anomaly>,
}

impl Environment {
    pub fn new(model: EnvironmentModel, seed: u64, horizon_ms: i64) -> Self {
        let minutes = (horizon_ms.max(0) / MS_PER_MINUTE + 2) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xE4, 0));
        let phi = if model.noise_tau_min > 0.0 {
            (-1.0 / model.noise_tau_min).exp()
        } else {
            0.0
        };
        let innov = (1.0 - phi * phi).sqrt();
        let sigmas = [
            model.temp_noise_std_c,
            model.rh_noise_std_pct,
            model.wind_noise_std_kmh,
            model.wind_dir_noise_deg,
        ];
        let mut state = [0.0f64; 4];
        let mut anomalies = Vec::with_capacity(minutes);
        for k in 0..minutes {
            for (s, sigma) in state.iter_mut().zip(sigmas) {
                let e: f64 = StandardNormal.sample(&mut rng);
                // Stationary start, then the AR(1) recursion.
                *s = if k == 0 { sigma * e } else { phi * *s + sigma * innov * e };
            }
            anomalies.push(Anomaly {
                temp: state[0],
                rh: state[1],
                wind: state[2],
                dir: state[3],
            });
        }
        Self { model, seed, anomalies }
    }

    pub fn model(&self) -> &EnvironmentModel {
        &self.model
    }

    /// Conditions at true time `t_ms` after the simulation epoch. Times past
    /// the horizon reuse the last anomaly.
    pub fn sample(&self, t_ms: i64) -> EnvSample {
        let m = &self.model;
        let minute = (t_ms.div_euclid(MS_PER_MINUTE)).clamp(0, self.anomalies.len() as i64 - 1) as usize;
        let a = self.anomalies[minute];
        let t = t_ms as f64;
        let diurnal = (TAU * (t / DAY_MS - (m.diurnal_peak_hour - 6.0) / 24.0)).sin();
        let seasonal = (TAU * (t / YEAR_MS - (m.seasonal_peak_day - 91.25) / 365.0)).sin();
        let temp_c = m.temp_mean_c + m.diurnal_amplitude_c * diurnal + m.seasonal_amplitude_c * seasonal + a.temp;
        let rh_pct = m.rh_mean_pct - m.rh_temp_slope * (temp_c - m.temp_mean_c) + a.rh;
        let wind_kmh = (m.wind_mean_kmh + m.wind_diurnal_kmh * diurnal + a.wind).max(0.0);
        let wind_dir = WindDir::from_degrees(m.prevailing_wind_deg + a.dir);
        let rain_mm = if rh_pct > m.rain_rh_threshold_pct {
            let p = ((rh_pct - m.rain_rh_threshold_pct) / 10.0).min(1.0);
            let u = unit_f64(derive_seed(self.seed, 0x5A1, minute as u64));
            if u < p {
                0.2
            } else {
                0.0
            }
        } else {
            0.0
        };
        EnvSample {
            temp_c,
            rh_pct,
            wind_kmh,
            wind_dir,
            rain_mm,
        }
    }
}
