//! Discrete-event simulator for LR-FHSS uplink networks.
//!
//! - [`engine`]: integer-tick clock, FIFO-stable event queue, seeded streams
//! - [`protocol`]: packet construction, node transmission routine, baseline
//!   gateway with time-frequency collision detection
//! - [`traffic`]: exponential, uniform, constant-with-drift and two-state
//!   Markov inter-arrival generators
//! - [`acrda`]: buffered sliding-window receiver with successive
//!   interference cancellation
//! - [`metrics`]: success rate, throughput, per-node success CDF, aggregation
//! - [`config`], [`campaign`], [`output`]: batch front-end

pub mod acrda;
pub mod campaign;
pub mod config;
pub mod engine;
mod error;
pub mod metrics;
pub mod output;
pub mod protocol;
pub mod traffic;

pub use error::{Error, Result};
