use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use corrosion_core::{corrosion_rate, ModelParams};
use serde::{Deserialize, Serialize};

use crate::clean::CleanRecord;
use crate::error::{IngestError, Result};
use crate::parse::parse_timestamp;
use crate::rolling::RollingWindow;
use crate::TIMESTAMP_FORMAT;

pub const N_FEATURES: usize = 9;

/// Model inputs, in matrix column order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "temp_c",
    "rh_pct",
    "temp_k",
    "rh_frac",
    "roll24_rh_mean",
    "roll24_rh_std",
    "roll24_tk_mean",
    "hours_wet_24h",
    "station_code",
];

pub const FEATURE_HEADER: [&str; 12] = [
    "timestamp",
    "station_id",
    "temp_c",
    "rh_pct",
    "temp_k",
    "rh_frac",
    "roll24_rh_mean",
    "roll24_rh_std",
    "roll24_tk_mean",
    "hours_wet_24h",
    "station_code",
    "target_cr_um_yr",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub timestamp: NaiveDateTime,
    pub station_id: String,
    pub temp_c: f64,
    pub rh_pct: f64,
    pub temp_k: f64,
    pub rh_frac: f64,
    pub roll24_rh_mean: f64,
    pub roll24_rh_std: f64,
    pub roll24_tk_mean: f64,
    pub hours_wet_24h: f64,
    pub station_code: u32,
    pub target_cr: f64,
}

impl FeatureRow {
    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.temp_c,
            self.rh_pct,
            self.temp_k,
            self.rh_frac,
            self.roll24_rh_mean,
            self.roll24_rh_std,
            self.roll24_tk_mean,
            self.hours_wet_24h,
            self.station_code as f64,
        ]
    }
}

/// Trailing digits of the id when it has any, otherwise a 32-bit FNV-1a hash.
pub fn station_code(id: &str) -> u32 {
    let digits = id.len() - id.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        if let Ok(v) = id[id.len() - digits..].parse() {
            return v;
        }
    }
    id.bytes()
        .fold(0x811c_9dc5u32, |h, b| (h ^ b as u32).wrapping_mul(0x0100_0193))
}

pub fn compute_targets(records: &[CleanRecord], params: &ModelParams) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| corrosion_rate(params, r.temp_c, r.rh_frac).map_err(IngestError::from))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RollingOutcome {
    /// Sorted by `(station_id, timestamp)`.
    pub rows: Vec<FeatureRow>,
    pub dropped_for_coverage: u64,
}

/// Builds feature rows over a trailing window of `window_min` minutes,
/// the current minute included. Rows whose window holds fewer than
/// `min_coverage · window_min` samples are dropped.
pub fn rolling_features(
    records: &[CleanRecord],
    targets: &[f64],
    window_min: u32,
    min_coverage: f64,
) -> Result<RollingOutcome> {
    assert_eq!(records.len(), targets.len(), "one target per record");
    if let Some(i) = records.windows(2).position(|w| {
        (w[0].station_id.as_str(), w[0].timestamp) >= (w[1].station_id.as_str(), w[1].timestamp)
    }) {
        return Err(IngestError::Unsorted(i + 1));
    }
    let needed = ((min_coverage * window_min as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut out = RollingOutcome {
        rows: Vec::with_capacity(records.len()),
        dropped_for_coverage: 0,
    };
    let mut window = RollingWindow::new(window_min as i64 * 60, 60);
    let mut code = 0;
    for (i, (r, &target)) in records.iter().zip(targets).enumerate() {
        if i == 0 || r.station_id != records[i - 1].station_id {
            window = RollingWindow::new(window_min as i64 * 60, 60);
            code = station_code(&r.station_id);
        }
        window.push(r.timestamp.and_utc().timestamp(), r.rh_frac, r.temp_k);
        let stats = window.stats().expect("window holds the current sample");
        if stats.count < needed {
            out.dropped_for_coverage += 1;
            continue;
        }
        out.rows.push(FeatureRow {
            timestamp: r.timestamp,
            station_id: r.station_id.clone(),
            temp_c: r.temp_c,
            rh_pct: r.rh_pct,
            temp_k: r.temp_k,
            rh_frac: r.rh_frac,
            roll24_rh_mean: stats.rh_mean,
            roll24_rh_std: stats.rh_std,
            roll24_tk_mean: stats.tk_mean,
            hours_wet_24h: stats.hours_wet,
            station_code: code,
            target_cr: target,
        });
    }
    Ok(out)
}

pub fn write_features<W: Write>(writer: W, rows: &[FeatureRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(FEATURE_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            r.station_id.clone(),
            r.temp_c.to_string(),
            r.rh_pct.to_string(),
            r.temp_k.to_string(),
            r.rh_frac.to_string(),
            r.roll24_rh_mean.to_string(),
            r.roll24_rh_std.to_string(),
            r.roll24_tk_mean.to_string(),
            r.hours_wet_24h.to_string(),
            r.station_code.to_string(),
            r.target_cr.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_features_file(path: impl AsRef<Path>, rows: &[FeatureRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_features(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

/// Strict reader for feature files: any bad row is an error.
pub fn read_features<R: Read>(reader: R) -> Result<Vec<FeatureRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(FEATURE_HEADER) {
        return Err(IngestError::Header {
            expected: FEATURE_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| IngestError::FeatureRow { line, msg };
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("column {}: {e}", FEATURE_HEADER[i])))
        };
        rows.push(FeatureRow {
            timestamp: parse_timestamp(&rec[0]).ok_or_else(|| bad(format!("bad timestamp `{}`", &rec[0])))?,
            station_id: rec[1].to_string(),
            temp_c: num(2)?,
            rh_pct: num(3)?,
            temp_k: num(4)?,
            rh_frac: num(5)?,
            roll24_rh_mean: num(6)?,
            roll24_rh_std: num(7)?,
            roll24_tk_mean: num(8)?,
            hours_wet_24h: num(9)?,
            station_code: rec[10].parse().map_err(|e| bad(format!("column station_code: {e}")))?,
            target_cr: num(11)?,
        });
    }
    Ok(rows)
}

pub fn read_features_file(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    read_features(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn station_codes() {
        assert_eq!(station_code("S01"), 1);
        assert_eq!(station_code("S14"), 14);
        assert_eq!(station_code("tower-7"), 7);
        assert_eq!(station_code("roof"), station_code("roof"));
        assert_ne!(station_code("roof"), station_code("door"));
        // 32-bit FNV-1a of the empty string is the offset basis.
        assert_eq!(station_code(""), 0x811c_9dc5);
    }
}
