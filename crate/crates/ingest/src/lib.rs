//! Preprocessing for gateway corpora: parse, clean, derive the physics
//! target and build trailing 24 h features.

mod clean;
mod error;
mod features;
mod parse;
mod pipeline;
mod rolling;
mod summary;

pub use clean::{clean, CleanOutcome, CleanRecord};
pub use error::{IngestError, Result};
pub use features::{
    compute_targets, read_features, read_features_file, rolling_features, station_code, write_features,
    write_features_file, FeatureRow, RollingOutcome, FEATURE_HEADER, FEATURE_NAMES, N_FEATURES,
};
pub use parse::{parse_corpus, parse_corpus_file, parse_timestamp, ParseOutcome, RawRecord, CORPUS_HEADER};
pub use pipeline::{preprocess, IngestReport, Preprocessed, MIN_COVERAGE, WINDOW_MINUTES};
pub use rolling::{RollingStats, RollingWindow, WET_THRESHOLD};
pub use summary::{monthly_summary, write_monthly_summary, MonthlySummary, MONTHLY_HEADER};

/// Timestamp layout used by every CSV this crate reads or writes.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";
