//! System-level simulator for a two-tier air/ground LTE-Advanced HetNet.
//!
//! Macro base stations (MBSs) and user equipment are dropped by Poisson
//! point processes over a rectangular region; unmanned aerial base
//! stations (UABSs) are placed on a hexagonal grid or by a genetic
//! algorithm. Downlink SIR is evaluated under time-domain inter-cell
//! interference coordination (almost-blank or reduced-power subframes)
//! combined with cell range expansion, and every configuration is scored
//! by the network's 5th-percentile spectral efficiency.

pub mod association;
pub mod campaign;
pub mod config;
pub mod deployment;
pub mod optimizer;
pub mod radio;
pub mod seed;
pub mod units;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
