use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

/// What a station measures: TH = temperature + humidity, THV adds wind
/// speed, THVDR adds wind direction and rainfall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StationKind {
    TH,
    THV,
    THVDR,
}

impl StationKind {
    pub fn measures_wind_speed(self) -> bool {
        matches!(self, Self::THV | Self::THVDR)
    }

    pub fn measures_wind_dir_and_rain(self) -> bool {
        matches!(self, Self::THVDR)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Indoor,
    Doorway,
    Roof,
    Tower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationConfig {
    pub id: String,
    pub kind: StationKind,
    pub placement: Placement,
    /// RTC drift, parts per million, within [-200, 200].
    pub drift_ppm: f64,
    /// (ΔT °C, ΔRH %) relative to the shared outdoor environment.
    pub microclimate_offset: (f64, f64),
}

impl StationConfig {
    pub fn new(id: impl Into<String>, kind: StationKind, placement: Placement) -> Self {
        Self {
            id: id.into(),
            kind,
            placement,
            drift_ppm: 0.0,
            microclimate_offset: (0.0, 0.0),
        }
    }

    pub fn with_drift(mut self, drift_ppm: f64) -> Self {
        self.drift_ppm = drift_ppm;
        self
    }

    pub fn with_offset(mut self, d_temp: f64, d_rh: f64) -> Self {
        self.microclimate_offset = (d_temp, d_rh);
        self
    }
}

/// Fourteen stations: ten indoor TH nodes, two doorway and one roof THV
/// node, and the THVDR weather station on the tower.
pub fn default_roster() -> Vec<StationConfig> {
    const DRIFTS: [f64; 14] = [12.0, -8.0, 25.0, -20.0, 5.0, 18.0, -15.0, 30.0, -3.0, 9.0, 22.0, -11.0, 16.0, -25.0];
    const INDOOR: [(f64, f64); 10] = [
        (-1.2, 4.0),
        (-0.8, 3.0),
        (-1.5, 5.5),
        (-0.5, 2.0),
        (-1.0, 6.0),
        (-1.8, 4.5),
        (-0.3, 1.5),
        (-1.1, 3.5),
        (-0.6, 5.0),
        (-1.4, 2.5),
    ];
    let mut roster: Vec<StationConfig> = INDOOR
        .iter()
        .enumerate()
        .map(|(i, &(dt, drh))| {
            StationConfig::new(format!("S{:02}", i + 1), StationKind::TH, Placement::Indoor).with_offset(dt, drh)
        })
        .collect();
    roster.push(StationConfig::new("S11", StationKind::THV, Placement::Doorway).with_offset(-0.2, 1.0));
    roster.push(StationConfig::new("S12", StationKind::THV, Placement::Doorway).with_offset(-0.4, 1.5));
    roster.push(StationConfig::new("S13", StationKind::THV, Placement::Roof).with_offset(1.0, -3.0));
    roster.push(StationConfig::new("S14", StationKind::THVDR, Placement::Tower).with_offset(0.5, -2.0));
    for (s, d) in roster.iter_mut().zip(DRIFTS) {
        s.drift_ppm = d;
    }
    roster
}

/// 16-sector compass bearing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WindDir {
    N,
    NNE,
    NE,
    ENE,
    E,
    ESE,
    SE,
    SSE,
    S,
    SSW,
    SW,
    WSW,
    W,
    WNW,
    NW,
    NNW,
}

impl WindDir {
    pub const ALL: [WindDir; 16] = [
        Self::N,
        Self::NNE,
        Self::NE,
        Self::ENE,
        Self::E,
        Self::ESE,
        Self::SE,
        Self::SSE,
        Self::S,
        Self::SSW,
        Self::SW,
        Self::WSW,
        Self::W,
        Self::WNW,
        Self::NW,
        Self::NNW,
    ];

    pub fn from_degrees(deg: f64) -> Self {
        let sector = (deg.rem_euclid(360.0) / 22.5).round() as usize % 16;
        Self::ALL[sector]
    }

    pub fn as_str(self) -> &'static str {
        const NAMES: [&str; 16] = [
            "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW",
        ];
        NAMES[self as usize]
    }
}

impl fmt::Display for WindDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WindDir {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown wind direction {s:?}"))
    }
}

/// One station observation, stamped with the station-clock minute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorRecord {
    pub timestamp: NaiveDateTime,
    /// Index into the network roster.
    pub station: u16,
    pub temp_c: Option<f64>,
    pub rh_pct: Option<f64>,
    pub wind_kmh: Option<f64>,
    pub wind_dir: Option<WindDir>,
    pub rain_mm: Option<f64>,
}
