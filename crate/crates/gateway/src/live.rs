//! Live service: a real-time engine loop fed by WebSocket clients.
//!
//! One task owns the [`LiveSession`]. Clients push parsed messages into a
//! queue that the engine drains once per tick; outbound messages are
//! serialized once and fanned out over a broadcast channel.

use std::future::Future;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc};
use tokio::time::MissedTickBehavior;
use tokio_tungstenite::tungstenite::Message;
use tracing::{debug, info, warn};

use rover_core::gesture::AccelSample;
use rover_core::world::{Scenario, Simulation};

use crate::headless::{read_scenario, CliError};
use crate::persist::RunRecorder;
use crate::protocol::{parse_inbound, Inbound, LinkView, Outbound, StateMessage};

pub const TICK_PERIOD: Duration = Duration::from_millis(50);

/// Engine plus the per-tick inbox. Socket-free so it can be driven directly.
#[derive(Debug)]
pub struct LiveSession {
    sim: Simulation,
    scenario_dir: PathBuf,
    pending_tilt: Option<(f64, f64)>,
    runs_dir: Option<PathBuf>,
    recorder: Option<RunRecorder>,
}

impl LiveSession {
    /// `scenario_dir` is where `reset` looks up `<scenario_name>.json`.
    pub fn new(scenario: Scenario, scenario_dir: PathBuf) -> Self {
        Self { sim: Simulation::new(scenario), scenario_dir, pending_tilt: None, runs_dir: None, recorder: None }
    }

    /// Persist every run under `runs_dir/<scenario>-<seed>-<start>/`.
    pub fn with_persistence(mut self, runs_dir: PathBuf) -> std::io::Result<Self> {
        self.recorder = Some(Self::open_recorder(&runs_dir, self.sim.scenario())?);
        self.runs_dir = Some(runs_dir);
        Ok(self)
    }

    fn open_recorder(runs_dir: &Path, scenario: &Scenario) -> std::io::Result<RunRecorder> {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_millis());
        let dir = runs_dir.join(format!("{}-{}-{stamp}", scenario.name, scenario.seed));
        RunRecorder::create(&dir, &scenario.name, scenario.seed)
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn recorder(&self) -> Option<&RunRecorder> {
        self.recorder.as_ref()
    }

    /// Queue or apply one inbound message. Tilts are coalesced: only the
    /// latest one before the next tick is used.
    pub fn apply(&mut self, msg: Inbound) -> Result<(), String> {
        match msg {
            Inbound::Tilt { x_g, y_g } => self.pending_tilt = Some((x_g, y_g)),
            Inbound::SetSweep { enabled } => self.sim.set_sweep_enabled(enabled),
            Inbound::Reset { scenario_name, seed } => self.reset(&scenario_name, seed)?,
        }
        Ok(())
    }

    fn reset(&mut self, name: &str, seed: Option<u64>) -> Result<(), String> {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(format!("invalid scenario name `{name}`"));
        }
        let path = self.scenario_dir.join(format!("{name}.json"));
        let mut scenario = read_scenario(&path).map_err(|e: CliError| e.to_string())?;
        if let Some(seed) = seed {
            scenario.seed = seed;
        }
        self.finish_run();
        // Operator settings such as the sweep toggle survive a reset.
        let config = *self.sim.config();
        self.sim = Simulation::with_config(scenario, config);
        self.pending_tilt = None;
        if let Some(dir) = &self.runs_dir {
            self.recorder = Self::open_recorder(dir, self.sim.scenario()).map_err(|e| e.to_string()).ok();
        }
        info!(scenario = name, seed = self.sim.scenario().seed, "session reset");
        Ok(())
    }

    /// Close the current run record, writing its metrics.
    pub fn finish_run(&mut self) {
        if let Some(rec) = self.recorder.take() {
            if let Err(e) = rec.finish(&self.sim.metrics()) {
                warn!("failed to write metrics: {e}");
            }
        }
    }

    pub fn state_message(&self) -> StateMessage {
        let st = self.sim.state();
        StateMessage {
            tick: st.tick,
            pose: st.robot_pose,
            current_command: st.current_command,
            link: LinkView {
                up_loss_p: self.sim.uplink_loss_probability(),
                up_stats: st.uplink.stats,
                down_stats: st.downlink.stats,
            },
            gas: st.gas,
            camera: self.sim.camera(),
        }
    }

    /// Advance one tick; returns alerts raised during it followed by the
    /// state after it.
    pub fn tick(&mut self) -> Vec<Outbound> {
        let tick = self.sim.state().tick;
        let sample = self.pending_tilt.take().map(|(x, y)| AccelSample::new(tick, x, y));
        let new_events = self.sim.step(sample).to_vec();
        if let Some(rec) = &mut self.recorder {
            if let Err(e) = rec.append(&new_events) {
                warn!("failed to persist events: {e}");
            }
        }
        let mut out: Vec<Outbound> =
            new_events.into_iter().filter(|e| e.is_alert()).map(|event| Outbound::Alert { event }).collect();
        out.push(Outbound::State(self.state_message()));
        out
    }
}

type Inbox = mpsc::UnboundedSender<(Inbound, mpsc::UnboundedSender<Arc<str>>)>;

/// Serve clients on `listener` until `shutdown` resolves. The engine ticks
/// at 20 Hz whether or not anyone is connected.
pub async fn serve(
    listener: TcpListener,
    mut session: LiveSession,
    shutdown: impl Future<Output = ()>,
) -> std::io::Result<LiveSession> {
    let (out_tx, _) = broadcast::channel::<Arc<str>>(256);
    let (in_tx, mut in_rx) = mpsc::unbounded_channel();

    let accept_out = out_tx.clone();
    let acceptor = tokio::spawn(async move {
        loop {
            match listener.accept().await {
                Ok((stream, peer)) => {
                    debug!(%peer, "client connected");
                    tokio::spawn(handle_client(stream, in_tx.clone(), accept_out.subscribe()));
                }
                Err(e) => warn!("accept failed: {e}"),
            }
        }
    });

    let mut ticker = tokio::time::interval(TICK_PERIOD);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    tokio::pin!(shutdown);
    loop {
        tokio::select! {
            _ = &mut shutdown => break,
            _ = ticker.tick() => {
                while let Ok((msg, reply)) = in_rx.try_recv() {
                    if let Err(message) = session.apply(msg) {
                        let _ = reply.send(Outbound::Error { message }.to_json().into());
                    }
                }
                for msg in session.tick() {
                    // No receivers is fine: the engine runs unattended.
                    let _ = out_tx.send(msg.to_json().into());
                }
            }
        }
    }
    acceptor.abort();
    session.finish_run();
    Ok(session)
}

async fn handle_client(stream: TcpStream, inbox: Inbox, mut updates: broadcast::Receiver<Arc<str>>) {
    let ws = match tokio_tungstenite::accept_async(stream).await {
        Ok(ws) => ws,
        Err(e) => {
            debug!("websocket handshake failed: {e}");
            return;
        }
    };
    let (mut sink, mut source) = ws.split();
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<Arc<str>>();

    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                r = reply_rx.recv() => match r {
                    Some(t) => t,
                    None => break,
                },
                u = updates.recv() => match u {
                    Ok(t) => t,
                    Err(broadcast::error::RecvError::Lagged(n)) => {
                        debug!(skipped = n, "slow client");
                        continue;
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                },
            };
            if sink.send(Message::text(text.as_ref())).await.is_err() {
                break;
            }
        }
    });

    while let Some(frame) = source.next().await {
        let text = match frame {
            Ok(Message::Text(t)) => t,
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        match parse_inbound(text.as_str()) {
            Ok(msg) => {
                if inbox.send((msg, reply_tx.clone())).is_err() {
                    break;
                }
            }
            Err(message) => {
                let _ = reply_tx.send(Outbound::Error { message }.to_json().into());
            }
        }
    }
    drop(reply_tx);
    writer.abort();
}
