//! Byte-channel framing, the YXML payload encoding, and the message
//! vocabulary between front-ends and the document server.

pub mod client;
pub mod codec;
pub mod server;
pub mod trace;
pub mod wire;
pub mod yxml;

pub use client::{Client, Incoming};
pub use codec::{encode, CodecError, Decoder};
pub use server::{serve_connection, ServeError};
pub use wire::{ClientMessage, ServerMessage, WireError, PROTOCOL_VERSION};
