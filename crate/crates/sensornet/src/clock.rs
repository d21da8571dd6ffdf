//! Drifting real-time clocks.
//!
//! Time is kept in integer picoseconds. A clock with drift `d` ppb advances `1e9 + d` ps per true millisecond.

use serde::{Deserialize, Serialize};

pub const PS_PER_MS: i128 = 1_000_000_000;
const PS_PER_S: i128 = 1_000 * PS_PER_MS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clock {
    /// Drift in parts per billion (positive runs fast).
    drift_ppb: i64,
    anchor_true_ms: i64,
    anchor_local_ps: i128,
    /// True time of the last synchronisation.
    last_sync_ms: i64,
}

impl Clock {
    /// A clock reading exactly `true_ms` at `true_ms`.
    pub fn new(drift_ppm: f64, true_ms: i64) -> Self {
        Self {
            drift_ppb: (drift_ppm * 1000.0).round() as i64,
            anchor_true_ms: true_ms,
            anchor_local_ps: true_ms as i128 * PS_PER_MS,
            last_sync_ms: true_ms,
        }
    }

    pub fn drift_ppb(&self) -> i64 {
        self.drift_ppb
    }

    pub fn last_sync_ms(&self) -> i64 {
        self.last_sync_ms
    }

    /// Local reading at true time `true_ms`, in picoseconds.
    pub fn local_ps(&self, true_ms: i64) -> i128 {
        let elapsed = (true_ms - self.anchor_true_ms) as i128;
        self.anchor_local_ps + elapsed * (PS_PER_MS + self.drift_ppb as i128)
    }

    /// Local reading truncated to whole milliseconds.
    pub fn local_ms(&self, true_ms: i64) -> i64 {
        self.local_ps(true_ms).div_euclid(PS_PER_MS) as i64
    }

    /// Snap to a parent reading. The RTC keeps whole seconds only, so the
    /// parent value is truncated to the second.
    pub fn sync_to(&mut self, true_ms: i64, parent_ps: i128) {
        self.anchor_true_ms = true_ms;
        self.anchor_local_ps = parent_ps.div_euclid(PS_PER_S) * PS_PER_S;
        self.last_sync_ms = true_ms;
    }
}
