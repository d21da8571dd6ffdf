use std::collections::VecDeque;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::config::SimConfig;
use crate::error::{MonitorError, Result};
use crate::registry::ModelRegistry;
use crate::sim::{what_if, Command, MonitorSim, PredictRequest, PredictResponse, SimState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickMode {
    /// One tick per period of wall time.
    Wall(Duration),
    /// Ticks only when [`MonitorHandle::step`] is called.
    Manual,
}

struct Request {
    command: Command,
    reply: oneshot::Sender<Result<u64>>,
}

/// Cloneable front end to the tick loop.
#[derive(Clone)]
pub struct MonitorHandle {
    history: Arc<RwLock<VecDeque<SimState>>>,
    commands: mpsc::UnboundedSender<Request>,
    steps: Option<mpsc::UnboundedSender<oneshot::Sender<SimState>>>,
    updates: broadcast::Sender<SimState>,
    registry: Arc<ModelRegistry>,
    config: Arc<SimConfig>,
}

/// Starts the loop. The first tick has already run when this returns.
pub fn spawn(mut sim: MonitorSim, mode: TickMode) -> (MonitorHandle, JoinHandle<()>) {
    let first = sim.tick().clone();
    let capacity = sim.config().history_capacity;
    let history = Arc::new(RwLock::new(VecDeque::from([first])));
    let (cmd_tx, cmd_rx) = mpsc::unbounded_channel();
    let (updates, _) = broadcast::channel(256);
    let (steps, step_rx) = match mode {
        TickMode::Manual => {
            let (tx, rx) = mpsc::unbounded_channel();
            (Some(tx), Some(rx))
        }
        TickMode::Wall(_) => (None, None),
    };
    let handle = MonitorHandle {
        history: history.clone(),
        commands: cmd_tx,
        steps,
        updates: updates.clone(),
        registry: sim.registry().clone(),
        config: Arc::new(sim.config().clone()),
    };
    let mut writer = Writer {
        sim,
        history,
        capacity,
        commands: cmd_rx,
        updates,
    };
    let task = tokio::spawn(async move {
        match (mode, step_rx) {
            (TickMode::Wall(period), _) => {
                let mut interval = tokio::time::interval(period);
                interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
                interval.tick().await;
                loop {
                    interval.tick().await;
                    if writer.step().is_none() {
                        break;
                    }
                }
            }
            (TickMode::Manual, Some(mut rx)) => {
                while let Some(done) = rx.recv().await {
                    match writer.step() {
                        Some(state) => {
                            let _ = done.send(state);
                        }
                        None => break,
                    }
                }
            }
            (TickMode::Manual, None) => unreachable!("manual mode always has a step channel"),
        }
        tracing::debug!("monitor loop stopped");
    });
    (handle, task)
}

struct Writer {
    sim: MonitorSim,
    history: Arc<RwLock<VecDeque<SimState>>>,
    capacity: usize,
    commands: mpsc::UnboundedReceiver<Request>,
    updates: broadcast::Sender<SimState>,
}

impl Writer {
    /// Applies queued commands, ticks, publishes. `None` once every handle is gone.
    fn step(&mut self) -> Option<SimState> {
        let mut pending = Vec::new();
        loop {
            match self.commands.try_recv() {
                Ok(req) => match self.sim.apply(req.command) {
                    Ok(()) => pending.push(req.reply),
                    Err(e) => {
                        let _ = req.reply.send(Err(e));
                    }
                },
                Err(mpsc::error::TryRecvError::Empty) => break,
                Err(mpsc::error::TryRecvError::Disconnected) => return None,
            }
        }
        let state = self.sim.tick().clone();
        {
            let mut h = self.history.write().expect("history lock poisoned");
            if h.len() == self.capacity {
                h.pop_front();
            }
            h.push_back(state.clone());
        }
        let _ = self.updates.send(state.clone());
        for reply in pending {
            let _ = reply.send(Ok(state.tick));
        }
        Some(state)
    }
}

impl MonitorHandle {
    pub fn current(&self) -> SimState {
        self.history
            .read()
            .expect("history lock poisoned")
            .back()
            .cloned()
            .expect("history holds at least the first tick")
    }

    /// Last `n` states, oldest first.
    pub fn history(&self, n: usize) -> Vec<SimState> {
        let h = self.history.read().expect("history lock poisoned");
        h.iter().skip(h.len().saturating_sub(n)).cloned().collect()
    }

    /// State of tick `tick` if still held in history.
    pub fn state_at(&self, tick: u64) -> Option<SimState> {
        let h = self.history.read().expect("history lock poisoned");
        let first = h.front()?.tick;
        let idx = usize::try_from(tick.checked_sub(first)?).ok()?;
        h.get(idx).cloned()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<SimState> {
        self.updates.subscribe()
    }

    pub fn registry(&self) -> &ModelRegistry {
        &self.registry
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Queues a command; the receiver resolves with the tick that first shows its effect.
    pub fn submit(&self, command: Command) -> Result<oneshot::Receiver<Result<u64>>> {
        let (reply, rx) = oneshot::channel();
        self.commands
            .send(Request { command, reply })
            .map_err(|_| MonitorError::Stopped)?;
        Ok(rx)
    }

    /// Queues a command and waits until a published tick reflects it.
    pub async fn apply(&self, command: Command) -> Result<u64> {
        let rx = self.submit(command)?;
        rx.await.map_err(|_| MonitorError::Stopped)?
    }

    /// Runs one tick in manual mode.
    pub async fn step(&self) -> Result<SimState> {
        let steps = self
            .steps
            .as_ref()
            .ok_or_else(|| MonitorError::InvalidCommand("service is not in manual tick mode".into()))?;
        let (tx, rx) = oneshot::channel();
        steps.send(tx).map_err(|_| MonitorError::Stopped)?;
        rx.await.map_err(|_| MonitorError::Stopped)
    }

    pub fn predict(&self, req: &PredictRequest) -> Result<PredictResponse> {
        let selected = self.current().selected_model;
        what_if(&self.registry, &self.config, &selected, req)
    }
}
