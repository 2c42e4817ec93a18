//! Inter-arrival interval generators.
//!
//! Every model has long-run mean interval `T` (`mean_interval`, seconds):
//!
//! | name             | interval                                        |
//! |------------------|-------------------------------------------------|
//! | `exponential`    | `-T ln U`, `U ~ U(0, 1]`                         |
//! | `uniform`        | `2T U`, `U ~ U[0, 1)`                            |
//! | `constant_drift` | `max(0, T + sigma Z)`, `Z ~ N(0, 1)`             |
//! | `markov2`        | `S_M` times the step gap between State-1 visits |
//!
//! The two-state Markov chain moves in steps of `S_M = T * pi1` seconds.
//! State 0 stays with probability `p`, State 1 falls back to 0 with
//! probability `q`, and a packet is sent on every State-1 step. Gaps are
//! sampled in closed form: from State 1 the gap is 1 with probability
//! `1 - q`, otherwise `1 + K` with `K ~ Geometric(1 - p)` on `{1, 2, ...}`.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::engine::RandomStream;
use crate::Error;

pub const DEFAULT_MARKOV_P: f64 = 0.99998;
pub const DEFAULT_MARKOV_Q: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrafficKind {
    Exponential,
    Uniform,
    /// `sigma` in seconds; `None` means `T / 100`.
    ConstantDrift {
        sigma: Option<f64>,
    },
    Markov2 {
        p: f64,
        q: f64,
    },
}

impl TrafficKind {
    pub fn name(&self) -> &'static str {
        match self {
            TrafficKind::Exponential => "exponential",
            TrafficKind::Uniform => "uniform",
            TrafficKind::ConstantDrift { .. } => "constant_drift",
            TrafficKind::Markov2 { .. } => "markov2",
        }
    }

    pub fn markov_default() -> Self {
        TrafficKind::Markov2 {
            p: DEFAULT_MARKOV_P,
            q: DEFAULT_MARKOV_Q,
        }
    }
}

impl fmt::Display for TrafficKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrafficKind {
    type Err = Error;

    /// Parses a model name with default parameters.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "exponential" => Ok(TrafficKind::Exponential),
            "uniform" => Ok(TrafficKind::Uniform),
            "constant_drift" => Ok(TrafficKind::ConstantDrift { sigma: None }),
            "markov2" => Ok(TrafficKind::markov_default()),
            other => Err(Error::Config(format!(
                "unknown traffic model `{other}` (expected exponential, uniform, constant_drift or markov2)"
            ))),
        }
    }
}

/// Stationary probability of State 1: `(p - 1) / (p - q - 1)`.
pub fn markov_steady_state(p: f64, q: f64) -> f64 {
    let denominator = p - q - 1.0;
    assert!(denominator != 0.0, "degenerate chain: p - q - 1 = 0");
    (p - 1.0) / denominator
}

/// Quantities derived from the chain parameters and the target mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovDerived {
    pub pi1: f64,
    /// Step duration `S_M` in seconds.
    pub step: f64,
}

impl MarkovDerived {
    pub fn new(p: f64, q: f64, mean_interval: f64) -> Self {
        let pi1 = markov_steady_state(p, q);
        MarkovDerived {
            pi1,
            step: mean_interval * pi1,
        }
    }

    /// Analytic mean interval: mean gap of `1 / pi1` steps times `S_M`.
    pub fn expected_interval(&self) -> f64 {
        self.step / self.pi1
    }
}

/// Inverse-CDF geometric sample on `{1, 2, ...}` with `P(K > k) = stay^k`,
/// from `u` in `(0, 1]`.
pub fn geometric_from_uniform(stay: f64, u: f64) -> u64 {
    if stay <= 0.0 {
        return 1;
    }
    let ln_stay = (stay - 1.0).ln_1p();
    (u.ln() / ln_stay).floor() as u64 + 1
}

pub fn exponential_from_uniform(mean: f64, u: f64) -> f64 {
    -mean * u.ln()
}

pub fn uniform_from_unit(mean: f64, u: f64) -> f64 {
    2.0 * mean * u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ChainState {
    Unstarted,
    Transmitting,
}

/// A node's traffic generator. Owns the Markov chain position for `markov2`.
#[derive(Debug, Clone)]
pub struct TrafficModel {
    kind: TrafficKind,
    mean_interval: f64,
    markov: Option<MarkovDerived>,
    state: ChainState,
}

impl TrafficModel {
    pub fn new(kind: TrafficKind, mean_interval: f64) -> Result<Self, Error> {
        if !(mean_interval.is_finite() && mean_interval > 0.0) {
            return Err(Error::Config(format!(
                "mean_interval must be positive, got {mean_interval}"
            )));
        }
        let markov = match kind {
            TrafficKind::Markov2 { p, q } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Config(format!("markov p must be in (0, 1), got {p}")));
                }
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::Config(format!("markov q must be in (0, 1], got {q}")));
                }
                Some(MarkovDerived::new(p, q, mean_interval))
            }
            TrafficKind::ConstantDrift { sigma: Some(s) } if !(s.is_finite() && s >= 0.0) => {
                return Err(Error::Config(format!("drift sigma must be >= 0, got {s}")));
            }
            _ => None,
        };
        Ok(TrafficModel {
            kind,
            mean_interval,
            markov,
            state: ChainState::Unstarted,
        })
    }

    pub fn kind(&self) -> TrafficKind {
        self.kind
    }

    pub fn mean_interval(&self) -> f64 {
        self.mean_interval
    }

    pub fn markov(&self) -> Option<MarkovDerived> {
        self.markov
    }

    /// Seconds until the next packet.
    pub fn next_interval(&mut self, rng: &mut RandomStream) -> f64 {
        let t = self.mean_interval;
        match self.kind {
            TrafficKind::Exponential => exponential_from_uniform(t, rng.unit_open_low()),
            TrafficKind::Uniform => uniform_from_unit(t, rng.unit()),
            TrafficKind::ConstantDrift { sigma } => {
                let sigma = sigma.unwrap_or(t / 100.0);
                let z: f64 = StandardNormal.sample(rng);
                (t + sigma * z).max(0.0)
            }
            TrafficKind::Markov2 { .. } => {
                let step = self.markov.expect("markov params").step;
                step * self.next_gap_steps(rng) as f64
            }
        }
    }

    /// Seconds from t = 0 to the first packet, drawn from the residual-life
    /// distribution so a node is in steady state from the start:
    /// exponential is memoryless; uniform uses the inverse CDF
    /// `2T (1 - sqrt(1 - u))`; constant_drift takes a uniform fraction of one
    /// interval (length bias of the narrow Gaussian is ignored); markov2
    /// starts from the stationary chain state.
    pub fn first_interval(&mut self, rng: &mut RandomStream) -> f64 {
        let t = self.mean_interval;
        match self.kind {
            TrafficKind::Uniform => 2.0 * t * (1.0 - (1.0 - rng.unit()).sqrt()),
            TrafficKind::ConstantDrift { .. } => {
                let u = rng.unit();
                u * self.next_interval(rng)
            }
            TrafficKind::Exponential | TrafficKind::Markov2 { .. } => self.next_interval(rng),
        }
    }

    /// Number of chain steps until the next State-1 step. The first call
    /// places the chain in its stationary distribution.
    pub fn next_gap_steps(&mut self, rng: &mut RandomStream) -> u64 {
        let TrafficKind::Markov2 { p, q } = self.kind else {
            panic!("next_gap_steps on a non-Markov model");
        };
        let pi1 = self.markov.expect("markov params").pi1;
        let from_state1 = match self.state {
            ChainState::Transmitting => true,
            ChainState::Unstarted => rng.unit() < pi1,
        };
        self.state = ChainState::Transmitting;
        if from_state1 && rng.unit() >= q {
            1
        } else {
            let k = geometric_from_uniform(p, rng.unit_open_low());
            k + u64::from(from_state1)
        }
    }
}
