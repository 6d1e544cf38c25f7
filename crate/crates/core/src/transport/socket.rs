use std::io::{BufWriter, Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::mpsc;
use std::thread::JoinHandle;
use std::time::Duration;

use crate::error::TransportError;

const TIMEOUT: Duration = Duration::from_secs(120);

struct Peer {
    reader: TcpStream,
    writer: Option<mpsc::Sender<Vec<u8>>>,
    thread: Option<JoinHandle<()>>,
}

/// TCP link with `u32` little-endian length-prefixed frames, one stream per
/// peer. Writes go through a per-peer thread so that every rank can send
/// before anyone receives.
pub struct SocketLink {
    peers: Vec<Option<Peer>>,
}

impl SocketLink {
    fn peer(&mut self, peer: usize) -> Result<&mut Peer, TransportError> {
        self.peers
            .get_mut(peer)
            .and_then(Option::as_mut)
            .ok_or(TransportError::InvalidRank(peer))
    }

    pub(super) fn send(&mut self, peer: usize, bytes: Vec<u8>) -> Result<(), TransportError> {
        if u32::try_from(bytes.len()).is_err() {
            return Err(TransportError::Protocol(format!("frame of {} bytes", bytes.len())));
        }
        let p = self.peer(peer)?;
        p.writer
            .as_ref()
            .expect("writer lives until drop")
            .send(bytes)
            .map_err(|_| TransportError::Disconnected { peer })
    }

    pub(super) fn recv(&mut self, peer: usize) -> Result<Vec<u8>, TransportError> {
        let s = &mut self.peer(peer)?.reader;
        let mut len = [0u8; 4];
        s.read_exact(&mut len).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => TransportError::Disconnected { peer },
            _ => e.into(),
        })?;
        let mut buf = vec![0u8; u32::from_le_bytes(len) as usize];
        s.read_exact(&mut buf)?;
        Ok(buf)
    }
}

impl Drop for SocketLink {
    fn drop(&mut self) {
        for p in self.peers.iter_mut().flatten() {
            // flush queued frames before closing
            p.writer.take();
            if let Some(t) = p.thread.take() {
                let _ = t.join();
            }
            let _ = p.reader.shutdown(Shutdown::Both);
        }
    }
}

fn spawn_writer(stream: TcpStream) -> (mpsc::Sender<Vec<u8>>, JoinHandle<()>) {
    let (tx, rx) = mpsc::channel::<Vec<u8>>();
    let handle = std::thread::spawn(move || {
        let mut w = BufWriter::new(stream);
        for frame in rx {
            let ok = w
                .write_all(&(frame.len() as u32).to_le_bytes())
                .and_then(|_| w.write_all(&frame))
                .and_then(|_| w.flush());
            if ok.is_err() {
                return;
            }
        }
    });
    (tx, handle)
}

fn peer(stream: TcpStream) -> Result<Peer, TransportError> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(TIMEOUT))?;
    stream.set_write_timeout(Some(TIMEOUT))?;
    let (writer, thread) = spawn_writer(stream.try_clone()?);
    Ok(Peer {
        reader: stream,
        writer: Some(writer),
        thread: Some(thread),
    })
}

/// Connects every rank pair over 127.0.0.1.
pub fn socket_mesh(ranks: usize) -> Result<Vec<SocketLink>, TransportError> {
    let mut links: Vec<SocketLink> = (0..ranks)
        .map(|_| SocketLink {
            peers: (0..ranks).map(|_| None).collect(),
        })
        .collect();
    for b in 1..ranks {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        for a in 0..b {
            let out = TcpStream::connect(addr)?;
            let (inc, _) = listener.accept()?;
            links[a].peers[b] = Some(peer(out)?);
            links[b].peers[a] = Some(peer(inc)?);
        }
    }
    Ok(links)
}
