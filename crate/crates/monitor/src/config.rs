use chrono::{NaiveDate, NaiveDateTime};
use corrosion_core::RiskThresholds;
use serde::{Deserialize, Serialize};

use crate::error::{MonitorError, Result};

/// Fallback rate law: `base + m·(k_h·max(0, RH − RH_ref) + k_t·max(0, T − T_ref))`,
/// `m` being the event multiplier while an event is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContingencyParams {
    pub base_rate: f64,
    pub rh_ref: f64,
    pub temp_ref: f64,
    pub k_h: f64,
    pub k_t: f64,
    pub event_multiplier: f64,
}

impl Default for ContingencyParams {
    fn default() -> Self {
        Self {
            base_rate: 5.0,
            rh_ref: 66.5,
            temp_ref: 30.3,
            k_h: 2.0,
            k_t: 1.5,
            event_multiplier: 1.5,
        }
    }
}

impl ContingencyParams {
    pub fn rate(&self, rh_excess: f64, temp_excess: f64, multiplier: f64) -> f64 {
        self.base_rate + multiplier * (self.k_h * rh_excess + self.k_t * temp_excess)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    pub temp_mean: f64,
    pub temp_std: f64,
    pub rh_mean: f64,
    pub rh_std: f64,
    /// Simulated seconds per tick.
    pub sim_seconds_per_tick: i64,
    pub start: NaiveDateTime,
    pub history_capacity: usize,
    pub contingency: ContingencyParams,
    pub thresholds: RiskThresholds,
    pub dehumidify_rh_above: f64,
    pub ventilate_temp_above: f64,
    /// Consecutive ticks at C3 or worse before an inspection is advised.
    pub inspection_after_ticks: u32,
    /// Station code fed to trained models.
    pub station_code: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            temp_mean: 30.3,
            temp_std: 5.7,
            rh_mean: 66.5,
            rh_std: 13.2,
            sim_seconds_per_tick: 2,
            start: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            history_capacity: 3600,
            contingency: ContingencyParams::default(),
            thresholds: RiskThresholds::default(),
            dehumidify_rh_above: 80.0,
            ventilate_temp_above: 35.0,
            inspection_after_ticks: 30,
            station_code: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MonitorError::Config(m));
        if !(self.temp_std >= 0.0 && self.rh_std >= 0.0) {
            return bad("standard deviations must be non-negative".into());
        }
        if self.sim_seconds_per_tick <= 0 {
            return bad("sim_seconds_per_tick must be positive".into());
        }
        if self.history_capacity == 0 {
            return bad("history_capacity must be positive".into());
        }
        let c = &self.contingency;
        if !(c.base_rate >= 0.0 && c.k_h >= 0.0 && c.k_t >= 0.0 && c.event_multiplier >= 0.0) {
            return bad("contingency coefficients must be non-negative".into());
        }
        Ok(())
    }
}
