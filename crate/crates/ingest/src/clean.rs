use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::parse::RawRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanRecord {
    pub timestamp: NaiveDateTime,
    pub station_id: String,
    pub temp_c: f64,
    pub rh_pct: f64,
    pub temp_k: f64,
    pub rh_frac: f64,
    pub wind_kmh: Option<f64>,
    pub wind_dir: Option<String>,
    pub rain_mm: Option<f64>,
}

impl CleanRecord {
    pub fn new(timestamp: NaiveDateTime, station_id: impl Into<String>, temp_c: f64, rh_pct: f64) -> Self {
        let rh_pct = rh_pct.clamp(0.0, 100.0);
        Self {
            timestamp,
            station_id: station_id.into(),
            temp_c,
            rh_pct,
            temp_k: temp_c + 273.15,
            rh_frac: rh_pct / 100.0,
            wind_kmh: None,
            wind_dir: None,
            rain_mm: None,
        }
    }
}

impl From<CleanRecord> for RawRecord {
    fn from(r: CleanRecord) -> Self {
        RawRecord {
            timestamp: r.timestamp,
            station_id: r.station_id,
            temp_c: Some(r.temp_c),
            rh_pct: Some(r.rh_pct),
            wind_kmh: r.wind_kmh,
            wind_dir: r.wind_dir,
            rain_mm: r.rain_mm,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleanOutcome {
    /// Sorted by `(station_id, timestamp)`.
    pub records: Vec<CleanRecord>,
    /// Repeated `(station_id, timestamp)` keys; the first occurrence is kept.
    pub duplicates: u64,
    /// Records of stations with no valid temperature or humidity at all.
    pub dropped_station: u64,
    pub clipped_rh: u64,
    pub imputed_temp: u64,
    pub imputed_rh: u64,
}

/// Forward fill then backward fill. Returns `None` when nothing is present.
fn fill(values: &mut [Option<f64>]) -> Option<u64> {
    let first = values.iter().flatten().next().copied()?;
    let mut filled = 0;
    let mut last = first;
    for v in values.iter_mut() {
        match v {
            Some(x) => last = *x,
            None => {
                *v = Some(last);
                filled += 1;
            }
        }
    }
    Some(filled)
}

/// Sorts per station, drops duplicate keys, clips RH to [0, 100] and
/// imputes gaps within each station.
pub fn clean(mut records: Vec<RawRecord>) -> CleanOutcome {
    records.sort_by(|a, b| {
        a.station_id
            .cmp(&b.station_id)
            .then_with(|| a.timestamp.cmp(&b.timestamp))
    });
    let before = records.len();
    records.dedup_by(|b, a| a.station_id == b.station_id && a.timestamp == b.timestamp);
    let mut out = CleanOutcome {
        duplicates: (before - records.len()) as u64,
        records: Vec::with_capacity(records.len()),
        ..Default::default()
    };

    let mut start = 0;
    while start < records.len() {
        let end = start + records[start..].partition_point(|r| r.station_id == records[start].station_id);
        let group = &mut records[start..end];
        let mut temps: Vec<_> = group.iter().map(|r| r.temp_c).collect();
        let mut rhs: Vec<_> = group.iter().map(|r| r.rh_pct).collect();
        match (fill(&mut temps), fill(&mut rhs)) {
            (Some(ft), Some(fr)) => {
                out.imputed_temp += ft;
                out.imputed_rh += fr;
                for ((r, t), rh) in group.iter_mut().zip(temps).zip(rhs) {
                    let rh = rh.unwrap();
                    if !(0.0..=100.0).contains(&rh) {
                        out.clipped_rh += 1;
                    }
                    let mut c = CleanRecord::new(r.timestamp, std::mem::take(&mut r.station_id), t.unwrap(), rh);
                    c.wind_kmh = r.wind_kmh;
                    c.wind_dir = r.wind_dir.take();
                    c.rain_mm = r.rain_mm;
                    out.records.push(c);
                }
            }
            _ => out.dropped_station += group.len() as u64,
        }
        start = end;
    }
    out
}
