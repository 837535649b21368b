//! Client side of the guidance wire protocol, over TCP or a child process's stdio.

use std::io::{self, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use super::protocol::{read_frame, write_json, Hello, Request, Response};
use super::{Distribution, GuidanceContext, GuidanceError, GuidanceModel};
use crate::token_codec::Vocabulary;

enum Conn {
    Tcp(TcpStream),
    Stdio { child: Child, stdin: ChildStdin, frames: Receiver<io::Result<Option<Vec<u8>>>> },
}

impl Conn {
    fn send(&mut self, msg: &impl serde::Serialize) -> io::Result<()> {
        match self {
            Conn::Tcp(s) => write_json(s, msg),
            Conn::Stdio { stdin, .. } => {
                write_json(stdin, msg)?;
                stdin.flush()
            }
        }
    }

    fn recv(&mut self, timeout: Duration) -> Result<Vec<u8>, GuidanceError> {
        let unavailable = |e: String| GuidanceError::RemoteUnavailable(e);
        let frame = match self {
            Conn::Tcp(s) => read_frame(s).map_err(|e| unavailable(e.to_string()))?,
            Conn::Stdio { frames, .. } => match frames.recv_timeout(timeout) {
                Ok(r) => r.map_err(|e| unavailable(e.to_string()))?,
                Err(RecvTimeoutError::Timeout) => return Err(unavailable("request timed out".into())),
                Err(RecvTimeoutError::Disconnected) => None,
            },
        };
        frame.ok_or_else(|| unavailable("connection closed".into()))
    }
}

impl Drop for Conn {
    fn drop(&mut self) {
        if let Conn::Stdio { child, .. } = self {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

pub struct RemoteModel {
    vocab: Vocabulary,
    conn: Mutex<Conn>,
    next_id: AtomicU64,
    timeout: Duration,
    deterministic: bool,
}

impl RemoteModel {
    pub fn connect_tcp<A: ToSocketAddrs>(addr: A, vocab: Vocabulary, timeout: Duration) -> Result<Self, GuidanceError> {
        let unavailable = |e: io::Error| GuidanceError::RemoteUnavailable(e.to_string());
        let addr = addr
            .to_socket_addrs()
            .map_err(unavailable)?
            .next()
            .ok_or_else(|| GuidanceError::RemoteUnavailable("address did not resolve".into()))?;
        let stream = TcpStream::connect_timeout(&addr, timeout).map_err(unavailable)?;
        stream.set_read_timeout(Some(timeout)).map_err(unavailable)?;
        stream.set_write_timeout(Some(timeout)).map_err(unavailable)?;
        stream.set_nodelay(true).map_err(unavailable)?;
        Self::handshake(Conn::Tcp(stream), vocab, timeout)
    }

    /// Launches `program` and speaks the protocol over its stdin/stdout.
    pub fn spawn(program: &str, args: &[String], vocab: Vocabulary, timeout: Duration) -> Result<Self, GuidanceError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| GuidanceError::RemoteUnavailable(e.to_string()))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");
        let (tx, frames) = mpsc::channel();
        std::thread::spawn(move || loop {
            let frame = read_frame(&mut stdout);
            let done = !matches!(frame, Ok(Some(_)));
            if tx.send(frame).is_err() || done {
                break;
            }
        });
        Self::handshake(Conn::Stdio { child, stdin, frames }, vocab, timeout)
    }

    fn handshake(mut conn: Conn, vocab: Vocabulary, timeout: Duration) -> Result<Self, GuidanceError> {
        let local = vocab.manifest_hash();
        conn.send(&Hello::client(&local)).map_err(|e| GuidanceError::RemoteUnavailable(e.to_string()))?;
        let reply: Hello = serde_json::from_slice(&conn.recv(timeout)?)
            .map_err(|e| GuidanceError::Protocol(format!("bad hello: {e}")))?;
        if reply.ok != Some(true) || reply.manifest_hash != local {
            return Err(GuidanceError::ManifestMismatch { local, remote: reply.manifest_hash });
        }
        Ok(RemoteModel {
            vocab,
            conn: Mutex::new(conn),
            next_id: AtomicU64::new(1),
            timeout,
            deterministic: reply.deterministic.unwrap_or(false),
        })
    }
}

impl GuidanceModel for RemoteModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let request = Request { id, state_tokens: ctx.state.state_tokens.to_vec(), prefix: ctx.prefix.to_vec() };
        let mut conn = self.conn.lock().unwrap();
        conn.send(&request).map_err(|e| GuidanceError::RemoteUnavailable(e.to_string()))?;
        let frame = conn.recv(self.timeout)?;
        let response: Response =
            serde_json::from_slice(&frame).map_err(|e| GuidanceError::Protocol(format!("bad response: {e}")))?;
        if response.id != serde_json::Value::from(id) {
            return Err(GuidanceError::Protocol(format!("response id {} for request {id}", response.id)));
        }
        if let Some(err) = response.error {
            return Err(GuidanceError::Protocol(err));
        }
        let mut dist = Distribution::new();
        for (key, p) in response.probs.unwrap_or_default() {
            let token: u32 = key.parse().map_err(|_| GuidanceError::Protocol(format!("bad token key `{key}`")))?;
            if token as usize >= self.vocab.size() || !(p >= 0.0 && p.is_finite()) {
                return Err(GuidanceError::Protocol(format!("bad entry {key}: {p}")));
            }
            dist.add(token, p);
        }
        Ok(dist)
    }
}
