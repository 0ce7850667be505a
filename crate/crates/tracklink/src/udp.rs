//! UDP endpoints with latest-wins receive semantics.

use std::io;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use tracklink_core::wire::{self, LatestWins, Message, MsgType};

/// Largest datagram the receive buffer accepts.
const RECV_BUF: usize = wire::HEADER_LEN + wire::MAX_PAYLOAD + wire::CRC_LEN + 1;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("socket error on {what}: {source}")]
    Io {
        what: &'static str,
        #[source]
        source: io::Error,
    },
    #[error("encode failed: {0}")]
    Encode(#[from] wire::EncodeError),
}

impl TransportError {
    fn io(what: &'static str) -> impl FnOnce(io::Error) -> Self {
        move |source| TransportError::Io { what, source }
    }
}

/// One UDP port per message type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortMap {
    pub host: Ipv4Addr,
    pub trajectory: u16,
    pub localization: u16,
    pub control_command: u16,
    pub hmi: u16,
    pub status: u16,
}

impl Default for PortMap {
    fn default() -> Self {
        Self::with_base(41001)
    }
}

impl PortMap {
    /// Consecutive ports starting at `base`, in message type order. Base 0 asks the OS
    /// for ephemeral ports.
    pub fn with_base(base: u16) -> Self {
        let at = |k: u16| if base == 0 { 0 } else { base + k };
        Self {
            host: Ipv4Addr::LOCALHOST,
            trajectory: at(0),
            localization: at(1),
            control_command: at(2),
            hmi: at(3),
            status: at(4),
        }
    }

    pub fn port(&self, kind: MsgType) -> u16 {
        match kind {
            MsgType::Trajectory => self.trajectory,
            MsgType::Localization => self.localization,
            MsgType::ControlCommand => self.control_command,
            MsgType::HmiCommand => self.hmi,
            MsgType::ControllerStatus => self.status,
        }
    }

    pub fn addr(&self, kind: MsgType) -> SocketAddr {
        SocketAddr::V4(SocketAddrV4::new(self.host, self.port(kind)))
    }
}

/// Result of draining a socket.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Drain {
    pub latest: Option<Message>,
    pub datagrams: usize,
    pub rejected: usize,
}

/// A bound, non-blocking UDP socket.
#[derive(Debug)]
pub struct Endpoint {
    socket: UdpSocket,
    buf: Vec<u8>,
}

impl Endpoint {
    pub fn bind(addr: SocketAddr) -> Result<Self, TransportError> {
        let socket = UdpSocket::bind(addr).map_err(TransportError::io("bind"))?;
        socket
            .set_nonblocking(true)
            .map_err(TransportError::io("set_nonblocking"))?;
        Ok(Self {
            socket,
            buf: vec![0; RECV_BUF],
        })
    }

    /// Unbound sender on an ephemeral loopback port.
    pub fn sender() -> Result<Self, TransportError> {
        Self::bind(SocketAddr::V4(SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0)))
    }

    pub fn local_addr(&self) -> Result<SocketAddr, TransportError> {
        self.socket
            .local_addr()
            .map_err(TransportError::io("local_addr"))
    }

    pub fn send_frame(&self, frame: &[u8], to: SocketAddr) -> Result<(), TransportError> {
        self.socket
            .send_to(frame, to)
            .map_err(TransportError::io("send_to"))?;
        Ok(())
    }

    pub fn send(&self, msg: &Message, to: SocketAddr) -> Result<(), TransportError> {
        self.send_frame(&wire::encode(msg)?, to)
    }

    /// Drains every pending datagram and returns the newest valid message of `kind`.
    pub fn recv_latest(&mut self, kind: MsgType) -> Result<Drain, TransportError> {
        let mut frames = Vec::new();
        loop {
            match self.socket.recv_from(&mut self.buf) {
                Ok((n, _)) => frames.push(self.buf[..n].to_vec()),
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => break,
                Err(e) => {
                    return Err(TransportError::Io {
                        what: "recv_from",
                        source: e,
                    })
                }
            }
        }
        let (latest, rejected) = wire::latest_of(frames.iter().map(Vec::as_slice), kind);
        Ok(Drain {
            latest,
            datagrams: frames.len(),
            rejected,
        })
    }
}

/// A thread that services one socket and keeps only the newest message in a shared mailbox.
pub struct BackgroundReceiver {
    mailbox: Arc<Mutex<LatestWins>>,
    stop: Arc<std::sync::atomic::AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl BackgroundReceiver {
    pub fn spawn(mut endpoint: Endpoint, kind: MsgType) -> Self {
        let mailbox = Arc::new(Mutex::new(LatestWins::new()));
        let stop = Arc::new(std::sync::atomic::AtomicBool::new(false));
        let (mb, st) = (mailbox.clone(), stop.clone());
        let handle = thread::spawn(move || {
            while !st.load(std::sync::atomic::Ordering::Relaxed) {
                match endpoint.recv_latest(kind) {
                    Ok(Drain {
                        latest: Some(msg), ..
                    }) => {
                        mb.lock().expect("mailbox poisoned").offer(msg);
                    }
                    Ok(_) => thread::sleep(Duration::from_micros(200)),
                    Err(_) => thread::sleep(Duration::from_millis(1)),
                }
            }
        });
        Self {
            mailbox,
            stop,
            handle: Some(handle),
        }
    }

    /// Takes the newest message received since the last call.
    pub fn take(&self) -> Option<Message> {
        self.mailbox.lock().expect("mailbox poisoned").take()
    }
}

impl Drop for BackgroundReceiver {
    fn drop(&mut self) {
        self.stop.store(true, std::sync::atomic::Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
