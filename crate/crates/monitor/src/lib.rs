//! Live corrosion-risk loop: environment sampling, events, mitigation,
//! risk classification and an HTTP API over the running state.

pub mod api;
pub mod config;
pub mod error;
pub mod registry;
pub mod service;
pub mod sim;

pub use api::router;
pub use config::{ContingencyParams, SimConfig};
pub use error::{MonitorError, Result};
pub use registry::{ModelEntry, ModelInfo, ModelRegistry, CONTINGENCY_ID};
pub use service::{spawn, MonitorHandle, TickMode};
pub use sim::{
    rate_for, recommend, what_if, ActiveEvent, Command, Event, EventKind, Mitigation, MitigationKind, MonitorSim,
    PredictRequest, PredictResponse, Recommendation, SimState,
};
