//! Channels between the simulated processes.
//!
//! Every message crosses a bus as an encoded frame, so the in-memory bus exercises the same
//! codec path as the UDP one.

use std::collections::VecDeque;
use std::net::SocketAddr;

use tracklink_core::wire::{self, MsgType};

use crate::udp::{Drain, Endpoint, PortMap, TransportError};

pub trait Bus {
    fn send(&mut self, kind: MsgType, frame: &[u8]) -> Result<(), TransportError>;

    /// Drains the channel and returns its newest valid message.
    fn recv_latest(&mut self, kind: MsgType) -> Result<Drain, TransportError>;
}

fn slot(kind: MsgType) -> usize {
    kind.to_u8() as usize - 1
}

/// Loss-free, order-preserving queues. Deterministic.
#[derive(Debug, Default)]
pub struct MemoryBus {
    queues: [VecDeque<Vec<u8>>; 5],
}

impl MemoryBus {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Bus for MemoryBus {
    fn send(&mut self, kind: MsgType, frame: &[u8]) -> Result<(), TransportError> {
        self.queues[slot(kind)].push_back(frame.to_vec());
        Ok(())
    }

    fn recv_latest(&mut self, kind: MsgType) -> Result<Drain, TransportError> {
        let frames: Vec<Vec<u8>> = self.queues[slot(kind)].drain(..).collect();
        let (latest, rejected) = wire::latest_of(frames.iter().map(Vec::as_slice), kind);
        Ok(Drain {
            latest,
            datagrams: frames.len(),
            rejected,
        })
    }
}

/// One loopback socket per channel plus a shared sender.
#[derive(Debug)]
pub struct UdpBus {
    tx: Endpoint,
    rx: Vec<Endpoint>,
    addrs: Vec<SocketAddr>,
}

impl UdpBus {
    pub fn bind(ports: PortMap) -> Result<Self, TransportError> {
        let mut rx = Vec::new();
        let mut addrs = Vec::new();
        for kind in MsgType::ALL {
            let ep = Endpoint::bind(ports.addr(kind))?;
            addrs.push(ep.local_addr()?);
            rx.push(ep);
        }
        Ok(Self {
            tx: Endpoint::sender()?,
            rx,
            addrs,
        })
    }

    pub fn addr(&self, kind: MsgType) -> SocketAddr {
        self.addrs[slot(kind)]
    }
}

impl Bus for UdpBus {
    fn send(&mut self, kind: MsgType, frame: &[u8]) -> Result<(), TransportError> {
        self.tx.send_frame(frame, self.addrs[slot(kind)])
    }

    fn recv_latest(&mut self, kind: MsgType) -> Result<Drain, TransportError> {
        self.rx[slot(kind)].recv_latest(kind)
    }
}
