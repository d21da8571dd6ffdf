use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{IngestError, Result};

pub const CORPUS_HEADER: [&str; 7] = ["timestamp", "station_id", "temp_c", "rh_pct", "wind_kmh", "wind_dir", "rain_mm"];

const WIND_SECTORS: [&str; 16] = [
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub timestamp: NaiveDateTime,
    pub station_id: String,
    pub temp_c: Option<f64>,
    pub rh_pct: Option<f64>,
    pub wind_kmh: Option<f64>,
    pub wind_dir: Option<String>,
    pub rain_mm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub records: Vec<RawRecord>,
    /// Data rows seen, including skipped ones.
    pub rows_read: u64,
    pub skipped: u64,
}

/// Accepts the canonical minute form plus a few common variants and
/// truncates to the minute.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S"];
    let s = s.trim();
    let s = s.strip_suffix('Z').unwrap_or(s);
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .and_then(|t| t.with_second(0))
        .and_then(|t| t.with_nanosecond(0))
}

fn optional_number(s: &str) -> std::result::Result<Option<f64>, ()> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| ())?;
    Ok(v.is_finite().then_some(v))
}

fn parse_row(row: &csv::StringRecord) -> Option<RawRecord> {
    if row.len() != CORPUS_HEADER.len() {
        return None;
    }
    let timestamp = parse_timestamp(&row[0])?;
    let station_id = row[1].trim();
    if station_id.is_empty() {
        return None;
    }
    let wind_dir = match row[5].trim() {
        "" => None,
        d if WIND_SECTORS.contains(&d) => Some(d.to_string()),
        _ => return None,
    };
    Some(RawRecord {
        timestamp,
        station_id: station_id.to_string(),
        temp_c: optional_number(&row[2]).ok()?,
        rh_pct: optional_number(&row[3]).ok()?,
        wind_kmh: optional_number(&row[4]).ok()?,
        wind_dir,
        rain_mm: optional_number(&row[6]).ok()?,
    })
}

/// Reads a gateway corpus. A wrong header is fatal; bad rows are skipped
/// and counted.
pub fn parse_corpus<R: Read>(reader: R) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => csv::StringRecord::new(),
    };
    if header.iter().map(str::trim).ne(CORPUS_HEADER) {
        return Err(IngestError::Header {
            expected: CORPUS_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = ParseOutcome::default();
    for row in rows {
        out.rows_read += 1;
        match row.ok().as_ref().and_then(parse_row) {
            Some(r) => out.records.push(r),
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

pub fn parse_corpus_file(path: impl AsRef<Path>) -> Result<ParseOutcome> {
    parse_corpus(std::io::BufReader::new(File::open(path)?))
}
