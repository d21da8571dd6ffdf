use std::fs::File;
use std::io::BufReader;
use std::ops::Range;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, PS_PER_MS};
use crate::env::{Environment, EnvironmentModel};
use crate::error::{Result, SimError};
use crate::rng::{derive_seed, unit_f64};
use crate::station::{default_roster, SensorRecord, StationConfig};

const MS_PER_MINUTE: i64 = 60_000;
const QUANTIZATION_PS: i128 = 1_000 * PS_PER_MS;

/// Synchronisation cadence, in seconds of true time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncConfig {
    pub gps_interval_s: u32,
    pub gateway_interval_s: u32,
    pub station_interval_s: u32,
    pub reference_drift_ppm: f64,
    pub gateway_drift_ppm: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        Self {
            gps_interval_s: 1,
            gateway_interval_s: 600,
            station_interval_s: 60,
            reference_drift_ppm: 5.0,
            gateway_drift_ppm: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub stations: Vec<StationConfig>,
    /// Simulation epoch; true time zero.
    pub start: NaiveDateTime,
    pub days: f64,
    pub seed: u64,
    pub loss_p: f64,
    /// Gap-fill the gateway from the SD logs at the end of the run.
    pub retransmit: bool,
    pub sync: SyncConfig,
    /// Station-minutes per uplink.
    pub uplink_every_min: u32,
    pub environment: EnvironmentModel,
    pub temp_noise_std_c: f64,
    pub rh_noise_std_pct: f64,
    /// Probability that a single temperature or humidity read fails.
    pub dropout_p: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            stations: default_roster(),
            start: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            days: 1.0,
            seed: 0,
            loss_p: 0.0,
            retransmit: false,
            sync: SyncConfig::default(),
            uplink_every_min: 10,
            environment: EnvironmentModel::default(),
            temp_noise_std_c: 0.1,
            rh_noise_std_pct: 0.5,
            dropout_p: 0.0005,
        }
    }
}

impl NetworkConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn duration_ms(&self) -> i64 {
        (self.days * 86_400_000.0).round() as i64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.stations.is_empty() || self.stations.len() > u16::MAX as usize {
            return bad(format!("station count {} out of range", self.stations.len()));
        }
        let mut ids: Vec<&str> = self.stations.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("station ids must be unique".into());
        }
        for s in &self.stations {
            if !(-200.0..=200.0).contains(&s.drift_ppm) {
                return bad(format!("station {} drift {} ppm outside [-200, 200]", s.id, s.drift_ppm));
            }
        }
        for d in [self.sync.reference_drift_ppm, self.sync.gateway_drift_ppm] {
            if !(-200.0..=200.0).contains(&d) {
                return bad(format!("clock drift {d} ppm outside [-200, 200]"));
            }
        }
        if !(0.0..=1.0).contains(&self.loss_p) {
            return bad(format!("loss probability {} outside [0, 1]", self.loss_p));
        }
        if !(0.0..=1.0).contains(&self.dropout_p) {
            return bad(format!("dropout probability {} outside [0, 1]", self.dropout_p));
        }
        if self.sync.gps_interval_s == 0 || self.sync.gateway_interval_s == 0 || self.sync.station_interval_s == 0 {
            return bad("sync intervals must be positive".into());
        }
        if self.uplink_every_min == 0 {
            return bad("uplink interval must be positive".into());
        }
        if !(self.days.is_finite() && self.days >= 0.0) {
            return bad(format!("invalid duration {} days", self.days));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UplinkBatch {
    pub station: u16,
    pub records: Vec<SensorRecord>,
    /// Gateway-clock time at reception.
    pub gateway_receive_time: NaiveDateTime,
}

/// Delivers `batch` with probability `1 − loss_p`; the outcome depends only
/// on `seed`.
pub fn transmit(batch: UplinkBatch, loss_p: f64, seed: u64) -> Option<UplinkBatch> {
    let u = unit_f64(crate::rng::splitmix64(seed));
    (u >= loss_p).then_some(batch)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SyncStats {
    /// Largest |station − gateway| seen at a sampling event, ms.
    pub max_station_gateway_offset_ms: f64,
    /// Largest |station − true time| seen at a sampling event, ms.
    pub max_station_true_offset_ms: f64,
    /// Largest |gateway − true time| seen at a sampling event, ms.
    pub max_gateway_true_offset_ms: f64,
    /// Sampling events where the drift + quantisation bound failed.
    pub bound_violations: u64,
    pub checks: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub samples: u64,
    pub batches_sent: u64,
    pub batches_delivered: u64,
    pub records_retransmitted: u64,
    pub gateway_records: u64,
    pub sync: SyncStats,
}

struct StationState {
    clock: Clock,
    next_minute: i64,
    pending: Range<usize>,
    sd_log: Vec<SensorRecord>,
    lost: Vec<Range<usize>>,
    batch_seq: u64,
    rng: ChaCha8Rng,
}

/// The running network. Built at true time zero with the t = 0 events
/// already fired; each [`Network::step`] advances one second.
pub struct Network {
    config: NetworkConfig,
    env: Environment,
    true_ms: i64,
    end_ms: i64,
    reference: Clock,
    gateway: Clock,
    stations: Vec<StationState>,
    gateway_store: Vec<SensorRecord>,
    report: SimReport,
}

impl Network {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let end_ms = config.duration_ms();
        let env = Environment::new(config.environment, config.seed, end_ms);
        let stations = config
            .stations
            .iter()
            .enumerate()
            .map(|(i, s)| StationState {
                clock: Clock::new(s.drift_ppm, 0),
                next_minute: 0,
                pending: 0..0,
                sd_log: Vec::with_capacity((end_ms / MS_PER_MINUTE + 1) as usize),
                lost: Vec::new(),
                batch_seq: 0,
                rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0x57A, i as u64)),
            })
            .collect();
        let mut net = Self {
            reference: Clock::new(config.sync.reference_drift_ppm, 0),
            gateway: Clock::new(config.sync.gateway_drift_ppm, 0),
            env,
            true_ms: 0,
            end_ms,
            stations,
            gateway_store: Vec::new(),
            report: SimReport::default(),
            config,
        };
        if net.end_ms > 0 {
            net.fire_events();
        }
        Ok(net)
    }

    /// Simulates the whole configured duration.
    pub fn run(config: NetworkConfig) -> Result<Self> {
        let mut net = Self::new(config)?;
        while !net.is_finished() {
            net.step();
        }
        net.finish();
        Ok(net)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn true_ms(&self) -> i64 {
        self.true_ms
    }

    pub fn is_finished(&self) -> bool {
        self.true_ms + 1_000 >= self.end_ms
    }

    pub fn station_clock(&self, station: usize) -> &Clock {
        &self.stations[station].clock
    }

    pub fn gateway_clock(&self) -> &Clock {
        &self.gateway
    }

    /// Advance true time by one second and fire everything due.
    pub fn step(&mut self) {
        self.true_ms += 1_000;
        self.fire_events();
    }

    /// Flushes partial batches and, when enabled, gap-fills lost records
    /// from the SD logs.
    pub fn finish(&mut self) {
        for i in 0..self.stations.len() {
            if !self.stations[i].pending.is_empty() {
                self.uplink(i);
            }
        }
        if self.config.retransmit {
            for st in &mut self.stations {
                for range in st.lost.drain(..) {
                    self.report.records_retransmitted += range.len() as u64;
                    self.gateway_store.extend_from_slice(&st.sd_log[range]);
                }
            }
        }
        self.report.gateway_records = self.gateway_store.len() as u64;
    }

    pub fn report(&self) -> SimReport {
        SimReport {
            gateway_records: self.gateway_store.len() as u64,
            ..self.report
        }
    }

    pub fn gateway_records(&self) -> &[SensorRecord] {
        &self.gateway_store
    }

    pub fn sd_log(&self, station: usize) -> &[SensorRecord] {
        &self.stations[station].sd_log
    }

    pub fn station_ids(&self) -> Vec<&str> {
        self.config.stations.iter().map(|s| s.id.as_str()).collect()
    }

    fn fire_events(&mut self) {
        let t = self.true_ms;
        let sync = self.config.sync;
        // Minutes entered before this instant's sync are logged on the unsynced clock.
        self.sample_due();
        if t % (sync.gps_interval_s as i64 * 1_000) == 0 {
            self.reference.sync_to(t, t as i128 * PS_PER_MS);
        }
        if t % (sync.gateway_interval_s as i64 * 1_000) == 0 {
            let r = self.reference.local_ps(t);
            self.gateway.sync_to(t, r);
        }
        if t % (sync.station_interval_s as i64 * 1_000) == 0 {
            let g = self.gateway.local_ps(t);
            for st in &mut self.stations {
                st.clock.sync_to(t, g);
            }
        }
        self.sample_due();
    }

    /// Samples every station whose clock has entered a new minute.
    fn sample_due(&mut self) {
        let t = self.true_ms;
        for i in 0..self.stations.len() {
            let local = self.stations[i].clock.local_ps(t);
            let current_minute = local.div_euclid(MS_PER_MINUTE as i128 * PS_PER_MS) as i64;
            while self.stations[i].next_minute <= current_minute {
                let minute = self.stations[i].next_minute;
                self.sample(i, minute);
                self.stations[i].next_minute += 1;
                if (minute + 1) % self.config.uplink_every_min as i64 == 0 {
                    self.uplink(i);
                }
            }
        }
    }

    fn sample(&mut self, i: usize, minute: i64) {
        let t = self.true_ms;
        self.check_sync_bound(i);
        let env = self.env.sample(t);
        let cfg = &self.config.stations[i];
        let st = &mut self.stations[i];
        let noise_t: f64 = StandardNormal.sample(&mut st.rng);
        let noise_rh: f64 = StandardNormal.sample(&mut st.rng);
        let drop_t = st.rng.random::<f64>() < self.config.dropout_p;
        let drop_rh = st.rng.random::<f64>() < self.config.dropout_p;
        let (d_temp, d_rh) = cfg.microclimate_offset;
        let temp = env.temp_c + d_temp + self.config.temp_noise_std_c * noise_t;
        let rh = env.rh_pct + d_rh + self.config.rh_noise_std_pct * noise_rh;
        let record = SensorRecord {
            timestamp: self.config.start + TimeDelta::minutes(minute),
            station: i as u16,
            temp_c: (!drop_t).then(|| round_to(temp, 100.0)),
            rh_pct: (!drop_rh).then(|| round_to(rh, 10.0)),
            wind_kmh: cfg.kind.measures_wind_speed().then(|| round_to(env.wind_kmh, 10.0)),
            wind_dir: cfg.kind.measures_wind_dir_and_rain().then_some(env.wind_dir),
            rain_mm: cfg.kind.measures_wind_dir_and_rain().then(|| round_to(env.rain_mm, 10.0)),
        };
        st.sd_log.push(record);
        st.pending.end = st.sd_log.len();
        self.report.samples += 1;
    }

    fn check_sync_bound(&mut self, i: usize) {
        let t = self.true_ms;
        let clock = &self.stations[i].clock;
        let station = clock.local_ps(t);
        let gateway = self.gateway.local_ps(t);
        let truth = t as i128 * PS_PER_MS;
        let offset = (station - gateway).abs();
        let rel_drift = (clock.drift_ppb() - self.gateway.drift_ppb()).unsigned_abs() as i128;
        let bound = (t - clock.last_sync_ms()) as i128 * rel_drift + QUANTIZATION_PS;
        let gw_bound =
            (t - self.gateway.last_sync_ms()) as i128 * self.gateway.drift_ppb().unsigned_abs() as i128 + QUANTIZATION_PS;
        let stats = &mut self.report.sync;
        stats.checks += 1;
        if offset > bound || (gateway - truth).abs() > gw_bound {
            stats.bound_violations += 1;
        }
        let to_ms = |ps: i128| ps as f64 / PS_PER_MS as f64;
        stats.max_station_gateway_offset_ms = stats.max_station_gateway_offset_ms.max(to_ms(offset));
        stats.max_station_true_offset_ms = stats.max_station_true_offset_ms.max(to_ms((station - truth).abs()));
        stats.max_gateway_true_offset_ms = stats.max_gateway_true_offset_ms.max(to_ms((gateway - truth).abs()));
    }

    fn uplink(&mut self, i: usize) {
        let received = self.config.start + TimeDelta::milliseconds(self.gateway.local_ms(self.true_ms));
        let st = &mut self.stations[i];
        let range = std::mem::replace(&mut st.pending, st.sd_log.len()..st.sd_log.len());
        let batch = UplinkBatch {
            station: i as u16,
            records: st.sd_log[range.clone()].to_vec(),
            gateway_receive_time: received,
        };
        let seed = derive_seed(self.config.seed, 0x7A + i as u64, st.batch_seq);
        st.batch_seq += 1;
        self.report.batches_sent += 1;
        match transmit(batch, self.config.loss_p, seed) {
            Some(delivered) => {
                self.report.batches_delivered += 1;
                self.gateway_store.extend(delivered.records);
            }
            None => st.lost.push(range),
        }
    }
}

fn round_to(x: f64, scale: f64) -> f64 {
    (x * scale).round() / scale + 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(days: f64) -> NetworkConfig {
        NetworkConfig {
            days,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn transmit_extremes() {
        let batch = UplinkBatch {
            station: 0,
            records: vec![],
            gateway_receive_time: NaiveDateTime::default(),
        };
        for s in 0..200 {
            assert!(transmit(batch.clone(), 0.0, s).is_some());
            assert!(transmit(batch.clone(), 1.0, s).is_none());
        }
    }

    #[test]
    fn transmit_loss_rate() {
        let batch = UplinkBatch {
            station: 0,
            records: vec![],
            gateway_receive_time: NaiveDateTime::default(),
        };
        let delivered = (0..10_000u64)
            .filter(|&k| transmit(batch.clone(), 0.1, derive_seed(99, 1, k)).is_some())
            .count();
        let frac = delivered as f64 / 10_000.0;
        assert!((frac - 0.9).abs() <= 0.01, "{frac}");
    }

    #[test]
    fn one_hour_lossless_counts() {
        let net = Network::run(small(1.0 / 24.0)).unwrap();
        assert_eq!(net.gateway_records().len(), 14 * 60);
        for i in 0..14 {
            assert_eq!(net.sd_log(i).len(), 60);
        }
        assert_eq!(net.report().batches_sent, 14 * 6);
    }

    #[test]
    fn config_validation() {
        let mut c = small(1.0);
        c.loss_p = 1.5;
        assert!(Network::new(c).is_err());
        let mut c = small(1.0);
        c.stations[3].drift_ppm = 250.0;
        assert!(Network::new(c).is_err());
        let mut c = small(1.0);
        c.stations[1].id = c.stations[0].id.clone();
        assert!(Network::new(c).is_err());
    }

    #[test]
    fn optional_fields_follow_station_kind() {
        let net = Network::run(small(0.05)).unwrap();
        for r in net.gateway_records() {
            let kind = net.config().stations[r.station as usize].kind;
            assert_eq!(r.wind_kmh.is_some(), kind.measures_wind_speed());
            assert_eq!(r.wind_dir.is_some(), kind.measures_wind_dir_and_rain());
            assert_eq!(r.rain_mm.is_some(), kind.measures_wind_dir_and_rain());
        }
    }

    #[test]
    fn empty_run() {
        let net = Network::run(small(0.0)).unwrap();
        assert!(net.gateway_records().is_empty());
    }
}
