//! Gateway CSV corpus.
//!
//! Header `timestamp,station_id,temp_c,rh_pct,wind_kmh,wind_dir,rain_mm`;
//! timestamps are `YYYY-MM-DDTHH:MM` on the station clock and fields a
//! station does not measure are empty.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::network::Network;
use crate::station::SensorRecord;

pub const CORPUS_HEADER: [&str; 7] = ["timestamp", "station_id", "temp_c", "rh_pct", "wind_kmh", "wind_dir", "rain_mm"];

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// Gateway records sorted by `(timestamp, station_id)`.
pub fn consolidate(network: &Network) -> Vec<SensorRecord> {
    let ids = network.station_ids();
    let mut rows = network.gateway_records().to_vec();
    rows.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| ids[a.station as usize].cmp(ids[b.station as usize]))
    });
    rows
}

pub fn write_corpus<W: Write>(writer: W, rows: &[SensorRecord], station_ids: &[&str]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CORPUS_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        wtr.write_record([
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            station_ids[r.station as usize].to_string(),
            opt(r.temp_c),
            opt(r.rh_pct),
            opt(r.wind_kmh),
            r.wind_dir.map(|d| d.as_str().to_string()).unwrap_or_default(),
            opt(r.rain_mm),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Consolidates `network` and writes the corpus to `path`; returns the row count.
pub fn write_corpus_file(path: impl AsRef<Path>, network: &Network) -> Result<usize> {
    let rows = consolidate(network);
    let mut w = BufWriter::new(File::create(path)?);
    write_corpus(&mut w, &rows, &network.station_ids())?;
    w.flush()?;
    Ok(rows.len())
}
