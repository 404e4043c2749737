//! Live streaming, session replay and the command-line front end for
//! [`beliefsim`].

pub mod cli;
pub mod error;
pub mod protocol;
pub mod replay;
pub mod server;
pub mod service;

pub use error::{Result, StreamError};
pub use protocol::{ClientMessage, ControlCommand, ServerMessage, SnapshotMessage, PROTOCOL_VERSION};
pub use server::{start, Server, ServerOptions};
pub use service::{ServiceOptions, Simulation};
