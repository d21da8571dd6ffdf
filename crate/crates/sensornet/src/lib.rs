//! Discrete-event simulation of a heritage-site sensor network.
//!
//! The deployment is a GPS-disciplined reference clock, one LoRa gateway and
//! a roster of stations. Every simulated second the reference clock is
//! snapped to GPS; the gateway resyncs from the reference every ten minutes
//! and each station resyncs from the gateway every minute. Stations sample
//! the shared outdoor environment (plus their own microclimate bias and
//! sensor noise) once per station-clock minute, log to their SD card and
//! uplink a batch every ten station-minutes over a lossy link. The gateway's
//! store is written out as a single CSV corpus.

pub mod clock;
pub mod corpus;
pub mod env;
mod error;
pub mod network;
pub mod rng;
pub mod station;

pub use clock::{Clock, PS_PER_MS};
pub use corpus::{consolidate, write_corpus, write_corpus_file, CORPUS_HEADER, TIMESTAMP_FORMAT};
pub use env::{EnvSample, Environment, EnvironmentModel};
pub use error::{Result, SimError};
pub use network::{transmit, Network, NetworkConfig, SimReport, SyncConfig, SyncStats, UplinkBatch};
pub use station::{default_roster, Placement, SensorRecord, StationConfig, StationKind, WindDir};
