//! Canonical JSON wire codec for coordinator/client messages.
//!
//! Every message is one envelope `{version, msg_type, round_index,
//! payload}` serialized as canonical JSON (sorted keys, shortest
//! round-trip reals), so encode∘decode is the identity and equal values
//! encode to equal bytes. The schema is closed: the four message bodies
//! below are the only things that can cross the wire, which is the
//! privacy guarantee — there is simply no field that could carry a raw
//! screening record.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical_json_bytes;
use crate::classifiers::ModelParams;
use crate::dataset::SourceId;

use super::types::{ClientStats, ClientUpdate, GlobalModel};

/// The one protocol version this build speaks.
pub const PROTOCOL_VERSION: u32 = 1;

/// Wire-level failures, each locating the offending byte where possible.
#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed message at byte {offset}: {detail}")]
    Malformed { offset: usize, detail: String },
    #[error("unsupported protocol version {got} (this build speaks {PROTOCOL_VERSION})")]
    Version { got: u32 },
    #[error("frame of {got} bytes exceeds the {limit}-byte limit")]
    FrameTooLarge { got: u64, limit: u64 },
    #[error("truncated frame: {0}")]
    Truncated(String),
}

/// One protocol message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub version: u32,
    pub round_index: u64,
    #[serde(flatten)]
    pub body: Body,
}

impl Envelope {
    pub fn new(round_index: u64, body: Body) -> Envelope {
        Envelope { version: PROTOCOL_VERSION, round_index, body }
    }
}

/// The four message kinds, tagged on the wire by `msg_type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "msg_type", content = "payload", rename_all = "kebab-case")]
pub enum Body {
    /// Client → coordinator, once at startup.
    Register { client_id: SourceId, n_samples: u64, stats: ClientStats },
    /// Coordinator → clients at the top of each round; `None` when the
    /// round has no shared parameters (ensemble training).
    Broadcast { params: Option<ModelParams> },
    /// Client → coordinator after local training.
    Update(ClientUpdate),
    /// Coordinator → clients after the final round.
    Complete { global: GlobalModel },
}

/// Serialize an envelope to canonical bytes.
pub fn encode_message(envelope: &Envelope) -> Vec<u8> {
    canonical_json_bytes(envelope)
}

/// Parse and validate one message.
pub fn decode_message(bytes: &[u8]) -> Result<Envelope, ProtocolError> {
    let envelope: Envelope = serde_json::from_slice(bytes).map_err(|e| {
        ProtocolError::Malformed { offset: byte_offset(bytes, &e), detail: e.to_string() }
    })?;
    if envelope.version != PROTOCOL_VERSION {
        return Err(ProtocolError::Version { got: envelope.version });
    }
    Ok(envelope)
}

/// Translate serde_json's 1-based line/column into a byte offset.
fn byte_offset(bytes: &[u8], err: &serde_json::Error) -> usize {
    let (line, column) = (err.line(), err.column());
    if line == 0 {
        return 0;
    }
    let mut offset = 0usize;
    let mut current_line = 1usize;
    for (i, &b) in bytes.iter().enumerate() {
        if current_line == line {
            offset = i;
            break;
        }
        if b == b'\n' {
            current_line += 1;
            offset = i + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(bytes.len())
}
