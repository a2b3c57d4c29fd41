//! Length-prefixed TCP transport for the federation protocol.
//!
//! Frames are a 4-byte big-endian payload length followed by the encoded
//! envelope. The coordinator here is [`drive_coordinator`] behind a
//! socket-backed link, so a TCP run and an in-process run execute the
//! same logic and produce identical frames.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use crate::classifiers::LinearSvcModel;

use super::codec::{decode_message, encode_message, Body, Envelope, ProtocolError};
use super::run::{drive_coordinator, ClientDataset, ClientLink, ClientState, FederationRun};
use super::types::{GlobalModel, RoundConfig};
use super::FederationError;

/// Upper bound on one frame's payload; a forest of hundreds of trees
/// encodes to a few megabytes, so this leaves an order of magnitude of
/// headroom while still rejecting nonsense lengths quickly.
pub const MAX_FRAME_LEN: usize = 64 * 1024 * 1024;

/// Write one length-prefixed frame.
pub fn write_frame(writer: &mut impl Write, bytes: &[u8]) -> Result<(), FederationError> {
    if bytes.len() > MAX_FRAME_LEN {
        return Err(ProtocolError::FrameTooLarge {
            got: bytes.len() as u64,
            limit: MAX_FRAME_LEN as u64,
        }
        .into());
    }
    writer.write_all(&(bytes.len() as u32).to_be_bytes())?;
    writer.write_all(bytes)?;
    writer.flush()?;
    Ok(())
}

/// Read one length-prefixed frame.
pub fn read_frame(reader: &mut impl Read) -> Result<Vec<u8>, FederationError> {
    let mut header = [0u8; 4];
    fill(reader, &mut header, "frame header")?;
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME_LEN {
        return Err(
            ProtocolError::FrameTooLarge { got: len as u64, limit: MAX_FRAME_LEN as u64 }.into()
        );
    }
    let mut payload = vec![0u8; len];
    fill(reader, &mut payload, "frame payload")?;
    Ok(payload)
}

fn fill(reader: &mut impl Read, buf: &mut [u8], what: &str) -> Result<(), FederationError> {
    reader.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            ProtocolError::Truncated(format!("stream ended inside a {what}")).into()
        } else {
            FederationError::Transport(e)
        }
    })
}

/// Coordinator-side link to one remote client.
struct TcpLink {
    stream: TcpStream,
}

impl ClientLink for TcpLink {
    fn recv_register(&mut self) -> Result<Vec<u8>, FederationError> {
        read_frame(&mut self.stream)
    }

    fn round_trip(&mut self, broadcast: &[u8]) -> Result<Vec<u8>, FederationError> {
        write_frame(&mut self.stream, broadcast)?;
        read_frame(&mut self.stream)
    }

    fn finish(&mut self, complete: &[u8]) -> Result<(), FederationError> {
        write_frame(&mut self.stream, complete)
    }

    fn data_loss(&self, _model: &LinearSvcModel) -> Option<f64> {
        // The data stays on the client; no objective over the wire.
        None
    }
}

/// Accept `n_clients` connections and run the protocol over them.
///
/// Round logs carry no pooled objective — evaluating it would need the
/// clients' rows, which never leave them.
pub fn serve_coordinator(
    listener: &TcpListener,
    n_clients: usize,
    cfg: &RoundConfig,
) -> Result<FederationRun, FederationError> {
    if n_clients == 0 {
        return Err(FederationError::EmptyRound("no clients to federate".into()));
    }
    let mut links: Vec<Box<dyn ClientLink>> = Vec::with_capacity(n_clients);
    for _ in 0..n_clients {
        let (stream, _) = listener.accept()?;
        links.push(Box::new(TcpLink { stream }));
    }
    drive_coordinator(links, cfg)
}

/// Connect to a coordinator and participate until completion; returns
/// the final global model announced by the coordinator.
///
/// `client_rank` is this silo's zero-based rank in the client-id-sorted
/// roster; it offsets the silo's private seed exactly as the in-process
/// runtime does, so both transports train identical models.
pub fn run_tcp_client(
    addr: impl ToSocketAddrs,
    data: ClientDataset,
    cfg: &RoundConfig,
    client_rank: usize,
) -> Result<GlobalModel, FederationError> {
    let state = ClientState::new(data, cfg, client_rank)?;
    let mut stream = TcpStream::connect(addr)?;
    write_frame(&mut stream, &encode_message(&state.register_envelope()))?;
    loop {
        let frame = read_frame(&mut stream)?;
        let envelope = decode_message(&frame)?;
        match envelope.body {
            Body::Broadcast { params } => {
                let update =
                    state.handle_broadcast(envelope.round_index, params.as_ref(), cfg)?;
                let reply = Envelope::new(envelope.round_index, Body::Update(update));
                write_frame(&mut stream, &encode_message(&reply))?;
            }
            Body::Complete { global } => return Ok(global),
            _ => {
                return Err(FederationError::SchemaMismatch(
                    "coordinator sent a frame only clients send".into(),
                ))
            }
        }
    }
}
