//! Deterministic discrete-event core.
//!
//! Time is kept in integer microsecond ticks ([`SimTime`]). Events are
//! dispatched in `(fire_time, sequence)` order, where `sequence` is the
//! insertion counter, so events scheduled for the same tick fire FIFO.
//! Random streams are derived from a master seed and a stream id (see
//! [`derive_stream`]).

mod queue;
mod stream;
mod time;

pub use queue::{Engine, EventHandle, EventQueue, ScheduledEvent};
pub use stream::{derive_stream, splitmix64, stream_key, RandomStream};
pub use time::SimTime;
