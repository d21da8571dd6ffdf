use std::io::Read;

use corrosion_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::clean::clean;
use crate::error::{IngestError, Result};
use crate::features::{compute_targets, rolling_features, FeatureRow};
use crate::parse::parse_corpus;

/// Row accounting for one preprocessing run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub skipped_at_parse: u64,
    pub duplicates: u64,
    pub dropped_station: u64,
    pub dropped_for_coverage: u64,
    pub feature_rows: u64,
    pub clipped_rh: u64,
    pub imputed_temp: u64,
    pub imputed_rh: u64,
    pub stations: u64,
}

impl IngestReport {
    /// Every row read is either emitted or counted by exactly one drop reason.
    pub fn is_conserved(&self) -> bool {
        self.rows_read
            == self.feature_rows
                + self.dropped_for_coverage
                + self.skipped_at_parse
                + self.dropped_station
                + self.duplicates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub rows: Vec<FeatureRow>,
    pub report: IngestReport,
}

pub const WINDOW_MINUTES: u32 = 1440;
pub const MIN_COVERAGE: f64 = 0.8;

/// Parse, clean, compute targets and build the 24 h features.
pub fn preprocess<R: Read>(corpus: R, params: &ModelParams) -> Result<Preprocessed> {
    params.validate().map_err(IngestError::from)?;
    let parsed = parse_corpus(corpus)?;
    let cleaned = clean(parsed.records);
    let targets = compute_targets(&cleaned.records, params)?;
    let rolled = rolling_features(&cleaned.records, &targets, WINDOW_MINUTES, MIN_COVERAGE)?;
    let mut stations: Vec<&str> = rolled.rows.iter().map(|r| r.station_id.as_str()).collect();
    stations.dedup();
    let report = IngestReport {
        rows_read: parsed.rows_read,
        skipped_at_parse: parsed.skipped,
        duplicates: cleaned.duplicates,
        dropped_station: cleaned.dropped_station,
        dropped_for_coverage: rolled.dropped_for_coverage,
        feature_rows: rolled.rows.len() as u64,
        clipped_rh: cleaned.clipped_rh,
        imputed_temp: cleaned.imputed_temp,
        imputed_rh: cleaned.imputed_rh,
        stations: stations.len() as u64,
    };
    debug_assert!(report.is_conserved());
    Ok(Preprocessed {
        rows: rolled.rows,
        report,
    })
}
