//! Rank-to-rank messaging: point-to-point links (in-process channels or
//! localhost TCP), the ring and broadcast collectives built on them, and
//! per-rank communication counters.

mod socket;
pub mod wire;

use futures::channel::mpsc::{unbounded, UnboundedReceiver, UnboundedSender};
use futures::StreamExt;
use serde::{Deserialize, Serialize};

use crate::error::TransportError;
pub use socket::socket_mesh;
use socket::SocketLink;

/// Per-rank counters, monotone over a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommMetrics {
    pub messages_sent: u64,
    pub bytes_sent: u64,
    /// Collective rounds this rank took part in.
    pub rounds: u64,
    /// Largest number of messages this rank sent within one round.
    pub max_sends_in_round: u64,
    pub global_applications: u64,
    pub local_applications: u64,
    pub swaps_inserted: u64,
    pub peak_nodes: u64,
}

impl CommMetrics {
    fn record_round(&mut self, sends: u64, bytes: u64) {
        self.rounds += 1;
        self.messages_sent += sends;
        self.bytes_sent += bytes;
        self.max_sends_in_round = self.max_sends_in_round.max(sends);
    }
}

/// In-process link: one unbounded FIFO channel per ordered rank pair.
pub struct ChannelLink {
    to: Vec<Option<UnboundedSender<Vec<u8>>>>,
    from: Vec<Option<UnboundedReceiver<Vec<u8>>>>,
}

/// Fully connected in-process links for `ranks` ranks.
pub fn channel_mesh(ranks: usize) -> Vec<ChannelLink> {
    let mut links: Vec<ChannelLink> = (0..ranks)
        .map(|_| ChannelLink {
            to: (0..ranks).map(|_| None).collect(),
            from: (0..ranks).map(|_| None).collect(),
        })
        .collect();
    for a in 0..ranks {
        for b in 0..ranks {
            if a != b {
                let (tx, rx) = unbounded();
                links[a].to[b] = Some(tx);
                links[b].from[a] = Some(rx);
            }
        }
    }
    links
}

pub enum Link {
    Channel(ChannelLink),
    Socket(SocketLink),
}

impl Link {
    async fn send(&mut self, peer: usize, bytes: Vec<u8>) -> Result<(), TransportError> {
        match self {
            Link::Channel(c) => {
                c.to.get(peer)
                    .and_then(Option::as_ref)
                    .ok_or(TransportError::InvalidRank(peer))?
                    .unbounded_send(bytes)
                    .map_err(|_| TransportError::Disconnected { peer })
            }
            Link::Socket(s) => s.send(peer, bytes),
        }
    }

    async fn recv(&mut self, peer: usize) -> Result<Vec<u8>, TransportError> {
        match self {
            Link::Channel(c) => c
                .from
                .get_mut(peer)
                .and_then(Option::as_mut)
                .ok_or(TransportError::InvalidRank(peer))?
                .next()
                .await
                .ok_or(TransportError::Disconnected { peer }),
            Link::Socket(s) => s.recv(peer),
        }
    }
}

/// One rank's view of the cluster.
pub struct Endpoint {
    rank: usize,
    ranks: usize,
    link: Link,
    pub metrics: CommMetrics,
}

impl Endpoint {
    pub fn new(rank: usize, ranks: usize, link: Link) -> Self {
        Self {
            rank,
            ranks,
            link,
            metrics: CommMetrics::default(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ranks(&self) -> usize {
        self.ranks
    }

    /// Sends `payload` to rank `r+1` and returns the one from rank `r-1`
    /// (mod P). Every rank must call this in the same round.
    pub async fn ring_shift(&mut self, payload: Vec<u8>) -> Result<Vec<u8>, TransportError> {
        if self.ranks == 1 {
            self.metrics.record_round(0, 0);
            return Ok(payload);
        }
        let next = (self.rank + 1) % self.ranks;
        let prev = (self.rank + self.ranks - 1) % self.ranks;
        let len = payload.len() as u64;
        self.link.send(next, payload).await?;
        self.metrics.record_round(1, len);
        self.link.recv(prev).await
    }

    /// Flat fan-out from `root`: the root passes `Some(payload)`, every
    /// other rank `None`, and all ranks return the root's payload.
    pub async fn broadcast_from(&mut self, root: usize, payload: Option<Vec<u8>>) -> Result<Vec<u8>, TransportError> {
        if root >= self.ranks {
            return Err(TransportError::InvalidRank(root));
        }
        match (self.rank == root, payload) {
            (true, Some(p)) => {
                let len = p.len() as u64;
                for peer in (0..self.ranks).filter(|&q| q != root) {
                    self.link.send(peer, p.clone()).await?;
                }
                let sends = self.ranks as u64 - 1;
                self.metrics.record_round(sends, sends * len);
                Ok(p)
            }
            (false, None) => {
                self.metrics.record_round(0, 0);
                self.link.recv(root).await
            }
            (true, None) => Err(TransportError::Protocol(format!("root {root} supplied no payload"))),
            (false, Some(_)) => Err(TransportError::Protocol(format!(
                "rank {} supplied a payload to a broadcast rooted at {root}",
                self.rank
            ))),
        }
    }
}

/// Endpoints for an in-process cluster.
pub fn channel_endpoints(ranks: usize) -> Vec<Endpoint> {
    channel_mesh(ranks)
        .into_iter()
        .enumerate()
        .map(|(r, l)| Endpoint::new(r, ranks, Link::Channel(l)))
        .collect()
}

/// Endpoints connected over localhost TCP.
pub fn socket_endpoints(ranks: usize) -> Result<Vec<Endpoint>, TransportError> {
    Ok(socket_mesh(ranks)?
        .into_iter()
        .enumerate()
        .map(|(r, l)| Endpoint::new(r, ranks, Link::Socket(l)))
        .collect())
}
