use std::collections::VecDeque;
use std::sync::Arc;

use chrono::{NaiveDateTime, TimeDelta};
use corrosion_core::{classify_risk_with, CorrosivityClass};
use corrosion_ingest::RollingWindow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{MonitorError, Result};
use crate::registry::{ModelRegistry, CONTINGENCY_ID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    HumiditySpike,
    HeatWave,
}

/// Additive shift of one driver for `duration` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub magnitude: f64,
    pub duration: u32,
}

impl Event {
    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude > 0.0 && self.magnitude.is_finite()) {
            return Err(MonitorError::InvalidCommand(format!("event magnitude {} must be positive", self.magnitude)));
        }
        if self.duration == 0 {
            return Err(MonitorError::InvalidCommand("event duration must be at least 1 tick".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveEvent {
    #[serde(flatten)]
    pub event: Event,
    pub remaining: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationKind {
    Dehumidify,
    Ventilate,
    Coat,
}

impl MitigationKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dehumidify" => Some(Self::Dehumidify),
            "ventilate" => Some(Self::Ventilate),
            "coat" => Some(Self::Coat),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mitigation {
    pub kind: MitigationKind,
    pub strength: f64,
}

impl Mitigation {
    pub fn validate(&self) -> Result<()> {
        if !(self.strength > 0.0 && self.strength <= 1.0) {
            return Err(MonitorError::InvalidCommand(format!("strength {} outside (0, 1]", self.strength)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    Nominal,
    ActivateDehumidifiers,
    IncreaseVentilation,
    ScheduleInspection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub tick: u64,
    pub sim_time: NaiveDateTime,
    /// Effective values after events and mitigation.
    pub temp_c: f64,
    pub rh_pct: f64,
    /// Values after events, before mitigation.
    pub sampled_temp_c: f64,
    pub sampled_rh_pct: f64,
    pub predicted_cr: f64,
    /// Rate at the reference climate with no event or mitigation.
    pub baseline_cr: f64,
    pub risk: CorrosivityClass,
    pub alarm: bool,
    pub active_event: Option<ActiveEvent>,
    pub active_mitigations: Vec<Mitigation>,
    pub selected_model: String,
    /// Rates come from the physics fallback rather than a trained model.
    pub contingency: bool,
    /// Rolling features use less than a full day of history.
    pub rolling_prefix: bool,
    pub recommendation: Recommendation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    InjectEvent(Event),
    ApplyMitigation(Mitigation),
    RemoveMitigation { kind: MitigationKind },
    SelectModel { id: String },
}

/// What-if query. Missing rolling features default to the instantaneous values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub temp_c: f64,
    pub rh_pct: f64,
    pub roll24_rh_mean: Option<f64>,
    pub roll24_rh_std: Option<f64>,
    pub roll24_tk_mean: Option<f64>,
    pub hours_wet_24h: Option<f64>,
    pub model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub predicted_cr: f64,
    pub risk: CorrosivityClass,
    pub alarm: bool,
    pub model: String,
}

/// The live loop state. Exactly one owner mutates it.
pub struct MonitorSim {
    config: SimConfig,
    registry: Arc<ModelRegistry>,
    rng: ChaCha8Rng,
    temp_dist: Normal<f64>,
    rh_dist: Normal<f64>,
    next_tick: u64,
    history: VecDeque<SimState>,
    event: Option<ActiveEvent>,
    mitigations: Vec<Mitigation>,
    selected: String,
    baseline_cr: f64,
    rh_excess: f64,
    temp_excess: f64,
    coat_factor: f64,
    window: RollingWindow,
    high_risk_streak: u32,
}

impl MonitorSim {
    pub fn new(config: SimConfig, registry: Arc<ModelRegistry>) -> Result<Self> {
        config.validate()?;
        let selected = registry.default_id();
        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            temp_dist: Normal::new(config.temp_mean, config.temp_std).map_err(|e| MonitorError::Config(e.to_string()))?,
            rh_dist: Normal::new(config.rh_mean, config.rh_std).map_err(|e| MonitorError::Config(e.to_string()))?,
            window: RollingWindow::new(86_400, config.sim_seconds_per_tick),
            history: VecDeque::with_capacity(config.history_capacity),
            config,
            registry,
            next_tick: 0,
            event: None,
            mitigations: Vec::new(),
            selected: String::new(),
            baseline_cr: 0.0,
            rh_excess: 0.0,
            temp_excess: 0.0,
            coat_factor: 1.0,
            high_risk_streak: 0,
        };
        sim.select(&selected)?;
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn registry(&self) -> &Arc<ModelRegistry> {
        &self.registry
    }

    pub fn current(&self) -> Option<&SimState> {
        self.history.back()
    }

    pub fn history(&self) -> &VecDeque<SimState> {
        &self.history
    }

    pub fn selected_model(&self) -> &str {
        &self.selected
    }

    fn select(&mut self, id: &str) -> Result<()> {
        if !self.registry.contains(id) {
            return Err(MonitorError::UnknownModel(id.to_string()));
        }
        self.selected = id.to_string();
        let c = self.config.contingency;
        let reference = PredictRequest {
            temp_c: c.temp_ref,
            rh_pct: c.rh_ref,
            roll24_rh_mean: None,
            roll24_rh_std: None,
            roll24_tk_mean: None,
            hours_wet_24h: None,
            model: None,
        };
        self.baseline_cr = rate_for(&self.registry, &self.config, id, &reference, 1.0);
        Ok(())
    }

    pub fn apply(&mut self, command: Command) -> Result<()> {
        match command {
            Command::InjectEvent(e) => {
                e.validate()?;
                self.event = Some(ActiveEvent {
                    event: e,
                    remaining: e.duration,
                });
            }
            Command::ApplyMitigation(m) => {
                m.validate()?;
                match self.mitigations.iter_mut().find(|x| x.kind == m.kind) {
                    Some(existing) => existing.strength = m.strength,
                    None => {
                        self.mitigations.push(m);
                        self.mitigations.sort_by_key(|x| x.kind);
                    }
                }
            }
            Command::RemoveMitigation { kind } => {
                self.mitigations.retain(|m| m.kind != kind);
                if !self.mitigations.iter().any(|m| m.kind == MitigationKind::Coat) {
                    self.coat_factor = 1.0;
                }
            }
            Command::SelectModel { id } => self.select(&id)?,
        }
        Ok(())
    }

    /// What-if prediction without touching the loop state.
    pub fn predict(&self, req: &PredictRequest) -> Result<PredictResponse> {
        what_if(&self.registry, &self.config, &self.selected, req)
    }

    /// Advances one tick and returns the new state.
    pub fn tick(&mut self) -> &SimState {
        let c = self.config.contingency;
        let mut temp: f64 = self.temp_dist.sample(&mut self.rng);
        let mut rh: f64 = self.rh_dist.sample(&mut self.rng);
        let active_event = self.event;
        if let Some(ev) = active_event {
            match ev.event.kind {
                EventKind::HumiditySpike => rh += ev.event.magnitude,
                EventKind::HeatWave => temp += ev.event.magnitude,
            }
        }
        let rh = rh.clamp(0.0, 100.0);

        let mut rh_excess = (rh - c.rh_ref).max(0.0);
        let mut temp_excess = (temp - c.temp_ref).max(0.0);
        if self.mitigations.is_empty() {
            self.coat_factor = 1.0;
        } else {
            // Targeted drivers decay geometrically, the others are held.
            let decay = |kind: MitigationKind| {
                self.mitigations
                    .iter()
                    .filter(|m| m.kind == kind)
                    .map(|m| 1.0 - m.strength)
                    .product::<f64>()
            };
            rh_excess = rh_excess.min(self.rh_excess * decay(MitigationKind::Dehumidify));
            temp_excess = temp_excess.min(self.temp_excess * decay(MitigationKind::Ventilate));
            self.coat_factor *= decay(MitigationKind::Coat);
        }
        self.rh_excess = rh_excess;
        self.temp_excess = temp_excess;
        let eff_rh = if rh > c.rh_ref { c.rh_ref + rh_excess } else { rh };
        let eff_temp = if temp > c.temp_ref { c.temp_ref + temp_excess } else { temp };

        let tick = self.next_tick;
        let sim_time = self.config.start + TimeDelta::seconds(tick as i64 * self.config.sim_seconds_per_tick);
        self.window
            .push(tick as i64 * self.config.sim_seconds_per_tick, eff_rh / 100.0, eff_temp + 273.15);
        let stats = self.window.stats().expect("window holds the current sample");

        let multiplier = if active_event.is_some() { c.event_multiplier } else { 1.0 };
        let req = PredictRequest {
            temp_c: eff_temp,
            rh_pct: eff_rh,
            roll24_rh_mean: Some(stats.rh_mean),
            roll24_rh_std: Some(stats.rh_std),
            roll24_tk_mean: Some(stats.tk_mean),
            hours_wet_24h: Some(stats.hours_wet),
            model: None,
        };
        let raw = rate_for(&self.registry, &self.config, &self.selected, &req, multiplier);
        let predicted_cr = if raw > self.baseline_cr {
            self.baseline_cr + self.coat_factor * (raw - self.baseline_cr)
        } else {
            raw
        };
        let risk = classify_risk_with(predicted_cr, &self.config.thresholds).expect("rates are finite and non-negative");

        if risk.class >= CorrosivityClass::C3 {
            self.high_risk_streak += 1;
        } else {
            self.high_risk_streak = 0;
        }
        let contingency = self.selected == CONTINGENCY_ID;
        let state = SimState {
            tick,
            sim_time,
            temp_c: eff_temp,
            rh_pct: eff_rh,
            sampled_temp_c: temp,
            sampled_rh_pct: rh,
            predicted_cr,
            baseline_cr: self.baseline_cr,
            risk: risk.class,
            alarm: risk.alarm,
            active_event,
            active_mitigations: self.mitigations.clone(),
            selected_model: self.selected.clone(),
            contingency,
            rolling_prefix: !contingency && stats.count < self.window.capacity(),
            recommendation: Recommendation::Nominal,
        };
        let state = SimState {
            recommendation: recommend(&state, &self.config, self.high_risk_streak),
            ..state
        };

        self.event = active_event.and_then(|mut e| {
            e.remaining -= 1;
            (e.remaining > 0).then_some(e)
        });
        self.next_tick += 1;
        if self.history.len() == self.config.history_capacity {
            self.history.pop_front();
        }
        self.history.push_back(state);
        self.history.back().expect("just pushed")
    }
}

/// Recommendation rule table applied to a bare state.
pub fn recommend(state: &SimState, config: &SimConfig, high_risk_streak: u32) -> Recommendation {
    if state.alarm && state.rh_pct > config.dehumidify_rh_above {
        Recommendation::ActivateDehumidifiers
    } else if state.alarm && state.temp_c > config.ventilate_temp_above {
        Recommendation::IncreaseVentilation
    } else if high_risk_streak >= config.inspection_after_ticks {
        Recommendation::ScheduleInspection
    } else {
        Recommendation::Nominal
    }
}

/// Rate before coating for model `id`; unknown ids use the contingency law.
pub fn rate_for(registry: &ModelRegistry, config: &SimConfig, id: &str, req: &PredictRequest, event_multiplier: f64) -> f64 {
    let c = &config.contingency;
    match registry.get(id) {
        Some(entry) if id != CONTINGENCY_ID => {
            let rh_frac = req.rh_pct / 100.0;
            let tk = req.temp_c + 273.15;
            let wet_default = if rh_frac > corrosion_ingest::WET_THRESHOLD { 24.0 } else { 0.0 };
            let row = [
                req.temp_c,
                req.rh_pct,
                tk,
                rh_frac,
                req.roll24_rh_mean.unwrap_or(rh_frac),
                req.roll24_rh_std.unwrap_or(0.0),
                req.roll24_tk_mean.unwrap_or(tk),
                req.hours_wet_24h.unwrap_or(wet_default),
                config.station_code as f64,
            ];
            entry.model.predict(&row).max(0.0)
        }
        _ => c.rate(
            (req.rh_pct - c.rh_ref).max(0.0),
            (req.temp_c - c.temp_ref).max(0.0),
            event_multiplier,
        ),
    }
}

/// What-if prediction against `registry`, defaulting to model `selected`.
pub fn what_if(registry: &ModelRegistry, config: &SimConfig, selected: &str, req: &PredictRequest) -> Result<PredictResponse> {
    if !(req.temp_c.is_finite() && req.rh_pct.is_finite() && (0.0..=100.0).contains(&req.rh_pct)) {
        return Err(MonitorError::InvalidCommand("temp_c must be finite and rh_pct within [0, 100]".into()));
    }
    let id = req.model.clone().unwrap_or_else(|| selected.to_string());
    if !registry.contains(&id) {
        return Err(MonitorError::UnknownModel(id));
    }
    let rate = rate_for(registry, config, &id, req, 1.0);
    let risk = classify_risk_with(rate, &config.thresholds).map_err(|e| MonitorError::InvalidCommand(e.to_string()))?;
    Ok(PredictResponse {
        predicted_cr: rate,
        risk: risk.class,
        alarm: risk.alarm,
        model: id,
    })
}
