//! Guidance wire protocol.
//!
//! Messages are JSON objects framed by a 4-byte big-endian length. The client
//! opens with `{"type":"hello","manifest_hash":...}`; the server answers with
//! its own hello carrying `"ok"` (false on a manifest mismatch, after which it
//! closes the connection). Then each request
//! `{"id":n,"state_tokens":[...],"prefix":[...]}` gets either
//! `{"id":n,"probs":{"<token>":p,...}}` or `{"id":n,"error":"..."}`.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Distribution, GuidanceModel, StateContext};
use crate::token_codec::{decode_state, fingerprint, TokenId};

pub const DEFAULT_TIMEOUT_MS: u64 = 2000;
pub const MAX_FRAME_BYTES: usize = 64 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    #[serde(rename = "type")]
    pub kind: String,
    pub manifest_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Hello {
    pub fn client(manifest_hash: &str) -> Self {
        Hello { kind: "hello".into(), manifest_hash: manifest_hash.into(), ok: None, deterministic: None, error: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub state_tokens: Vec<TokenId>,
    pub prefix: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

/// Reads one frame; `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "frame too large"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn write_json<W: Write, T: Serialize>(w: &mut W, msg: &T) -> io::Result<()> {
    write_frame(w, &serde_json::to_vec(msg).map_err(io::Error::other)?)
}

pub fn distribution_to_wire(dist: &Distribution) -> BTreeMap<String, f64> {
    dist.iter().map(|(t, p)| (t.to_string(), p)).collect()
}

fn answer<M: GuidanceModel + ?Sized>(model: &M, frame: &[u8]) -> Response {
    let raw: serde_json::Value = match serde_json::from_slice(frame) {
        Ok(v) => v,
        Err(e) => return Response { id: serde_json::Value::Null, probs: None, error: Some(format!("bad json: {e}")) },
    };
    let id = raw.get("id").cloned().unwrap_or(serde_json::Value::Null);
    let fail = |msg: String| Response { id: id.clone(), probs: None, error: Some(msg) };
    let req: Request = match serde_json::from_value(raw.clone()) {
        Ok(r) => r,
        Err(e) => return fail(format!("bad request: {e}")),
    };
    let decoded = match decode_state(&req.state_tokens) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    let state = StateContext {
        fingerprint: fingerprint(&req.state_tokens),
        state_tokens: Arc::new(req.state_tokens),
        n_slots: decoded.n_slots,
        depth: 0,
    };
    match model.next_token_dist(&state.with_prefix(&req.prefix)) {
        Ok(dist) => Response { id, probs: Some(distribution_to_wire(&dist)), error: None },
        Err(e) => fail(e.to_string()),
    }
}

/// Serves one client connection until it closes.
pub fn serve_connection<M, S>(model: &M, stream: &mut S) -> io::Result<()>
where
    M: GuidanceModel + ?Sized,
    S: Read + Write,
{
    let Some(frame) = read_frame(stream)? else { return Ok(()) };
    let local = model.vocab().manifest_hash();
    let hello: Hello = serde_json::from_slice(&frame).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let ok = hello.kind == "hello" && hello.manifest_hash == local;
    let reply = Hello {
        kind: "hello".into(),
        manifest_hash: local,
        ok: Some(ok),
        deterministic: Some(model.is_deterministic()),
        error: (!ok).then(|| "manifest hash mismatch".to_string()),
    };
    write_json(stream, &reply)?;
    if !ok {
        return Ok(());
    }
    while let Some(frame) = read_frame(stream)? {
        write_json(stream, &answer(model, &frame))?;
    }
    Ok(())
}

/// Accepts TCP connections forever, one thread per connection.
pub fn serve_tcp<M, A>(model: Arc<M>, addr: A) -> io::Result<()>
where
    M: GuidanceModel + 'static,
    A: ToSocketAddrs,
{
    serve_listener(model, TcpListener::bind(addr)?)
}

pub fn serve_listener<M: GuidanceModel + 'static>(model: Arc<M>, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let mut stream = stream?;
        let model = model.clone();
        std::thread::spawn(move || {
            let _ = serve_connection(model.as_ref(), &mut stream);
        });
    }
    Ok(())
}
