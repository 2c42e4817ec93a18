use std::path::PathBuf;

use crate::engine::SimTime;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("causality violation: cannot schedule at {at} when the clock is at {now}")]
    Causality { at: SimTime, now: SimTime },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("config line {line}: key `{key}`: {message}")]
    ConfigLine { line: usize, key: String, message: String },

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
