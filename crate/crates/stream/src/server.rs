//! HTTP + websocket front end: `/ws` streams snapshots and accepts control
//! commands, `/config` and `/health` report state.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::extract::ws::{CloseFrame, Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use beliefsim::harness::ExperimentConfig;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::error::{Result, StreamError};
use crate::protocol::{ClientMessage, ControlCommand, ControlState, ServerMessage, PROTOCOL_VERSION};
use crate::service::Simulation;

/// Close code sent to clients that fall behind the snapshot stream.
pub const CLOSE_TOO_SLOW: u16 = 1008;

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Snapshot broadcasts per second, independent of the stepping rate.
    pub snapshot_hz: f64,
    /// Snapshots buffered per client before it counts as too slow.
    pub buffer: usize,
    /// Longest a single websocket write may take.
    pub send_timeout: Duration,
}

impl Default for ServerOptions {
    fn default() -> Self {
        Self {
            snapshot_hz: 20.0,
            buffer: 64,
            send_timeout: Duration::from_secs(5),
        }
    }
}

struct Request {
    command: ControlCommand,
    issued_at: Option<u64>,
    reply: oneshot::Sender<Result<u64, String>>,
}

#[derive(Debug, Clone)]
struct Status {
    tick: u64,
    step: u64,
    config: ExperimentConfig,
    controls: ControlState,
}

#[derive(Clone)]
struct AppState {
    requests: mpsc::Sender<Request>,
    snapshots: broadcast::Sender<Utf8Bytes>,
    status: Arc<RwLock<Status>>,
    clients: Arc<AtomicUsize>,
    shutdown: watch::Receiver<bool>,
    send_timeout: Duration,
}

impl AppState {
    fn status(&self) -> Status {
        self.status.read().expect("status lock").clone()
    }
}

/// A running server. Dropping it without [`Server::shutdown`] leaves the
/// tasks running until the runtime stops.
pub struct Server {
    addr: SocketAddr,
    stop: watch::Sender<bool>,
    simulation: JoinHandle<Simulation>,
    http: JoinHandle<std::io::Result<()>>,
}

impl Server {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops serving and returns the simulation as it was at the end.
    pub async fn shutdown(self) -> Result<Simulation> {
        let _ = self.stop.send(true);
        let sim = self.simulation.await.map_err(|_| StreamError::SimulationGone)?;
        let _ = self.http.await;
        Ok(sim)
    }
}

/// Binds `addr` and starts stepping `sim` at its configured rate.
pub async fn start(sim: Simulation, addr: &str, options: ServerOptions) -> Result<Server> {
    let listener = TcpListener::bind(addr).await.map_err(|source| StreamError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    let local = listener.local_addr().map_err(|source| StreamError::Bind {
        addr: addr.to_string(),
        source,
    })?;

    let (stop, shutdown) = watch::channel(false);
    let (requests, request_rx) = mpsc::channel(64);
    let (snapshots, _) = broadcast::channel(options.buffer.max(1));
    let status = Arc::new(RwLock::new(Status {
        tick: sim.tick(),
        step: sim.world().step_index(),
        config: sim.config().clone(),
        controls: sim.controls(),
    }));
    let state = AppState {
        requests,
        snapshots: snapshots.clone(),
        status: status.clone(),
        clients: Arc::new(AtomicUsize::new(0)),
        shutdown: shutdown.clone(),
        send_timeout: options.send_timeout,
    };

    if !(options.snapshot_hz.is_finite() && options.snapshot_hz > 0.0) {
        return Err(StreamError::Rate(options.snapshot_hz));
    }
    let publish_every = period(options.snapshot_hz);
    let simulation = tokio::spawn(simulation_loop(
        sim,
        request_rx,
        snapshots,
        status,
        shutdown.clone(),
        publish_every,
    ));
    let app = router(state);
    let http = tokio::spawn(async move { axum::serve(listener, app).with_graceful_shutdown(stopped(shutdown)).await });
    log::info!("serving on http://{local}");
    Ok(Server {
        addr: local,
        stop,
        simulation,
        http,
    })
}

fn router(state: AppState) -> Router {
    Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/config", get(config))
        .route("/health", get(health))
        .with_state(state)
}

async fn health(State(state): State<AppState>) -> impl IntoResponse {
    let s = state.status();
    Json(json!({
        "status": "ok",
        "v": PROTOCOL_VERSION,
        "tick": s.tick,
        "step": s.step,
        "paused": s.controls.paused,
        "clients": state.clients.load(Ordering::Relaxed),
    }))
}

async fn config(State(state): State<AppState>) -> impl IntoResponse {
    let s = state.status();
    Json(json!({
        "v": PROTOCOL_VERSION,
        "config": s.config,
        "controls": s.controls,
    }))
}

/// Resolves once the stop flag is raised.
async fn stopped(mut flag: watch::Receiver<bool>) {
    let _ = flag.wait_for(|stop| *stop).await;
}

fn period(steps_per_second: f64) -> Duration {
    Duration::from_secs_f64(1.0 / steps_per_second)
}

fn new_interval(every: Duration) -> tokio::time::Interval {
    let mut interval = tokio::time::interval(every);
    interval.set_missed_tick_behavior(MissedTickBehavior::Skip);
    interval
}

async fn simulation_loop(
    mut sim: Simulation,
    mut requests: mpsc::Receiver<Request>,
    snapshots: broadcast::Sender<Utf8Bytes>,
    status: Arc<RwLock<Status>>,
    shutdown: watch::Receiver<bool>,
    publish_every: Duration,
) -> Simulation {
    let mut stepper = new_interval(period(sim.steps_per_second()));
    let mut publisher = new_interval(publish_every);
    let stop = stopped(shutdown);
    tokio::pin!(stop);
    loop {
        tokio::select! {
            request = requests.recv() => {
                let Some(request) = request else { break };
                let rate = sim.steps_per_second();
                let result = sim
                    .apply_issued(&request.command, request.issued_at)
                    .map(|()| sim.tick())
                    .map_err(|e| e.to_string());
                if sim.steps_per_second() != rate {
                    stepper = new_interval(period(sim.steps_per_second()));
                }
                let _ = request.reply.send(result);
            }
            _ = stepper.tick() => {
                sim.advance();
            }
            // Sent while paused too, so clients see the frozen step.
            _ = publisher.tick() => publish(&mut sim, &snapshots, &status),
            () = &mut stop => break,
        }
    }
    sim
}

fn publish(sim: &mut Simulation, snapshots: &broadcast::Sender<Utf8Bytes>, status: &RwLock<Status>) {
    let snapshot = sim.snapshot();
    {
        let mut s = status.write().expect("status lock");
        s.tick = snapshot.tick;
        s.step = snapshot.step;
        s.controls = snapshot.controls.clone();
    }
    match serde_json::to_string(&ServerMessage::Snapshot(snapshot)) {
        // No receivers is fine: nobody is watching.
        Ok(text) => drop(snapshots.send(text.into())),
        Err(e) => log::error!("snapshot did not serialize: {e}"),
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state))
}

fn encode(message: &ServerMessage) -> Message {
    Message::Text(serde_json::to_string(message).expect("server messages serialize").into())
}

async fn client(mut socket: WebSocket, state: AppState) {
    let mut snapshots = state.snapshots.subscribe();
    let stop = stopped(state.shutdown.clone());
    tokio::pin!(stop);
    state.clients.fetch_add(1, Ordering::Relaxed);
    let s = state.status();
    let hello = ServerMessage::Hello {
        v: PROTOCOL_VERSION,
        seed: s.controls.seed,
        step: s.step,
        config: s.config,
    };
    if socket.send(encode(&hello)).await.is_ok() {
        loop {
            tokio::select! {
                snapshot = snapshots.recv() => match snapshot {
                    Ok(text) => {
                        let sent = tokio::time::timeout(state.send_timeout, socket.send(Message::Text(text))).await;
                        if !matches!(sent, Ok(Ok(()))) {
                            log::warn!("dropping client: send failed or timed out");
                            break;
                        }
                    }
                    Err(broadcast::error::RecvError::Lagged(missed)) => {
                        log::warn!("dropping slow client ({missed} snapshots behind)");
                        let frame = CloseFrame {
                            code: CLOSE_TOO_SLOW,
                            reason: "client too slow".into(),
                        };
                        let _ = socket.send(Message::Close(Some(frame))).await;
                        break;
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                },
                incoming = socket.recv() => match incoming {
                    Some(Ok(Message::Text(text))) => {
                        let reply = handle_text(&state, &text).await;
                        if socket.send(encode(&reply)).await.is_err() {
                            break;
                        }
                    }
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => {}
                },
                () = &mut stop => {
                    let _ = socket.send(Message::Close(None)).await;
                    break;
                }
            }
        }
    }
    state.clients.fetch_sub(1, Ordering::Relaxed);
}

/// Parses one client message. Version is checked before the body so an old
/// client gets a version error rather than a schema error.
pub fn parse_client_message(text: &str) -> Result<ClientMessage> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let got = value.get("v").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if got != PROTOCOL_VERSION {
        return Err(StreamError::UnsupportedVersion {
            got,
            expected: PROTOCOL_VERSION,
        });
    }
    Ok(serde_json::from_value(value)?)
}

async fn handle_text(state: &AppState, text: &str) -> ServerMessage {
    let error = |id, message: String| ServerMessage::Error {
        v: PROTOCOL_VERSION,
        id,
        message,
    };
    let message = match parse_client_message(text) {
        Ok(m) => m,
        Err(e) => return error(None, e.to_string()),
    };
    let (reply, answer) = oneshot::channel();
    let request = Request {
        command: message.command,
        issued_at: message.issued_at,
        reply,
    };
    if state.requests.send(request).await.is_err() {
        return error(message.id, StreamError::SimulationGone.to_string());
    }
    match answer.await {
        Ok(Ok(tick)) => ServerMessage::Ack {
            v: PROTOCOL_VERSION,
            id: message.id,
            tick,
        },
        Ok(Err(e)) => error(message.id, e),
        Err(_) => error(message.id, StreamError::SimulationGone.to_string()),
    }
}
