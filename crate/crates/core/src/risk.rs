use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// ISO 9223 style corrosivity category, ordered from mildest to most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CorrosivityClass {
    C1,
    C2,
    C3,
    C4,
    C5,
    CX,
}

impl CorrosivityClass {
    pub const ALL: [CorrosivityClass; 6] = [Self::C1, Self::C2, Self::C3, Self::C4, Self::C5, Self::CX];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::C1 => "C1",
            Self::C2 => "C2",
            Self::C3 => "C3",
            Self::C4 => "C4",
            Self::C5 => "C5",
            Self::CX => "CX",
        }
    }
}

impl fmt::Display for CorrosivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorrosivityClass {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CoreError::Format(format!("unknown corrosivity class {s:?}")))
    }
}

/// Upper bounds (inclusive, µm/year) of C1..C5; anything above the last is CX.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskThresholds {
    pub upper_bounds: [f64; 5],
    pub alarm_threshold: f64,
}

impl Default for RiskThresholds {
    /// First-year carbon steel bands; alarm at the C4 lower bound.
    fn default() -> Self {
        Self {
            upper_bounds: [1.3, 25.0, 50.0, 80.0, 200.0],
            alarm_threshold: 50.0,
        }
    }
}

impl RiskThresholds {
    pub fn with_alarm_threshold(mut self, alarm_threshold: f64) -> Self {
        self.alarm_threshold = alarm_threshold;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RiskClass {
    pub class: CorrosivityClass,
    pub alarm: bool,
}

pub fn classify_risk(rate: f64) -> Result<RiskClass> {
    classify_risk_with(rate, &RiskThresholds::default())
}

/// A rate sitting exactly on a band boundary belongs to the lower band.
pub fn classify_risk_with(rate: f64, thresholds: &RiskThresholds) -> Result<RiskClass> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(CoreError::Domain(format!("corrosion rate must be finite and >= 0, got {rate}")));
    }
    let class = thresholds
        .upper_bounds
        .iter()
        .position(|&upper| rate <= upper)
        .map_or(CorrosivityClass::CX, |i| CorrosivityClass::ALL[i]);
    Ok(RiskClass {
        class,
        alarm: rate >= thresholds.alarm_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use CorrosivityClass::*;

    #[test]
    fn table_lookup() {
        let cases = [
            (0.0, C1, false),
            (1.3, C1, false),
            (1.31, C2, false),
            (25.0, C2, false),
            (50.0, C3, true),
            (55.0, C4, true),
            (80.0, C4, true),
            (200.0, C5, true),
            (500.0, CX, true),
        ];
        for (rate, class, alarm) in cases {
            assert_eq!(classify_risk(rate).unwrap(), RiskClass { class, alarm }, "rate {rate}");
        }
    }

    #[test]
    fn configurable_alarm() {
        let t = RiskThresholds::default().with_alarm_threshold(10.0);
        assert!(classify_risk_with(12.0, &t).unwrap().alarm);
        assert!(!classify_risk(12.0).unwrap().alarm);
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(classify_risk(-0.1).is_err());
        assert!(classify_risk(f64::NAN).is_err());
        assert!(classify_risk(f64::INFINITY).is_err());
    }

    #[test]
    fn class_round_trips_through_text() {
        for c in CorrosivityClass::ALL {
            assert_eq!(c.to_string().parse::<CorrosivityClass>().unwrap(), c);
        }
    }
}
