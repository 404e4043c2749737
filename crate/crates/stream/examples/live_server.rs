//! Start the live server, steer it from a scripted websocket client, then
//! replay the recorded session headlessly and check it matches.
//!
//!     cargo run --example live_server -p beliefsim-stream

use std::time::Duration;

use beliefsim::harness::preset;
use beliefsim::herding::HerdingMode;
use beliefsim_stream::protocol::{ClientMessage, ControlCommand, ServerMessage};
use beliefsim_stream::replay::replay;
use beliefsim_stream::{start, ServerOptions, ServiceOptions, Simulation};
use futures_util::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = preset("herding-control").expect("bundled");
    let options = ServiceOptions {
        steps_per_second: 100.0,
        ..ServiceOptions::default()
    };
    let server = start(Simulation::new(config, 1, options)?, "127.0.0.1:0", ServerOptions::default()).await?;
    let addr = server.local_addr();
    println!("serving on http://{addr}");

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await?;
    let script = [
        (ControlCommand::SetSih { population: 0, value: 0.4 }, 50),
        (
            ControlCommand::SetHerding {
                mode: HerdingMode::ClosestToMean,
                amplified_weight: None,
                amplified_sih: None,
                target_population: None,
                opposing_source: None,
            },
            150,
        ),
        (ControlCommand::SetPopulationMix { nomad_fraction: 0.1 }, 50),
    ];
    for (id, (command, snapshots)) in script.into_iter().enumerate() {
        let text = serde_json::to_string(&ClientMessage::new(command).with_id(id as u64))?;
        ws.send(Message::text(text)).await?;
        let mut seen = 0;
        while seen < snapshots {
            let Some(frame) = ws.next().await else { break };
            let Message::Text(text) = frame? else { continue };
            match serde_json::from_str::<ServerMessage>(&text)? {
                ServerMessage::Snapshot(s) => {
                    seen += 1;
                    if seen == snapshots {
                        let amplified = s.agents.iter().filter(|a| a.amplified).count();
                        let phase = s.phase.map(|p| format!("{:.0}", p.mean_distance)).unwrap_or_default();
                        println!(
                            "step {:>4}: herding {:?}, {amplified} amplified, rolling distance {phase}",
                            s.step, s.controls.herding.mode
                        );
                    }
                }
                ServerMessage::Ack { id, tick, .. } => println!("command {id:?} applied at tick {tick}"),
                ServerMessage::Error { message, .. } => println!("rejected: {message}"),
                ServerMessage::Hello { .. } => {}
            }
        }
    }
    ws.close(None).await?;
    tokio::time::sleep(Duration::from_millis(50)).await;

    let live = server.shutdown().await?;
    let again = replay(live.replay_log(), live.tick())?;
    println!(
        "replayed {} commands over {} ticks: identical = {}",
        live.replay_log().entries.len(),
        live.tick(),
        again.world().agents() == live.world().agents()
    );
    Ok(())
}
