//! Host-side tooling around `tracklink-core`: UDP transport, the closed-loop scenario harness,
//! cycle logs, run reports, frame captures, open-loop replay and plots.

pub mod capture;
pub mod harness;
pub mod log;
pub mod plot;
pub mod replay;
pub mod report;
pub mod scenario;
pub mod transport;
pub mod udp;
