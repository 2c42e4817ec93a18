//! Flat `key = value` scenario configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! `nodes_sim` takes a comma-separated list, one scenario per entry. Keys not
//! listed in [`KEYS`] are rejected, as are repeated keys.

use std::path::PathBuf;

use crate::acrda::AcrdaParams;
use crate::engine::SimTime;
use crate::protocol::{CodingRate, HopPolicy, Receiver, RegionalParams, SimParams, TransmissionParams};
use crate::traffic::{TrafficKind, TrafficModel, DEFAULT_MARKOV_P, DEFAULT_MARKOV_Q};
use crate::Error;

pub const KEYS: &[&str] = &[
    "nodes_sim",
    "grid_channels",
    "grid_multiplier",
    "header_copies",
    "coding_rate",
    "payload_bytes",
    "sim_time",
    "iterations",
    "mean_interval",
    "traffic",
    "drift_sigma",
    "markov_p",
    "markov_q",
    "receiver",
    "acrda_window",
    "acrda_step",
    "hop_min_separation",
    "master_seed",
    "output",
    "format",
    "per_node",
    "trace",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverKind {
    Baseline,
    Acrda,
}

impl std::str::FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "baseline" => Ok(ReceiverKind::Baseline),
            "acrda" => Ok(ReceiverKind::Acrda),
            other => Err(Error::Config(format!(
                "unknown receiver `{other}` (expected baseline or acrda)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub nodes_sim: Vec<u32>,
    pub grid_channels: u16,
    pub grid_multiplier: u32,
    pub header_copies: u8,
    pub coding_rate: CodingRate,
    pub payload_bytes: u32,
    /// Seconds.
    pub sim_time: f64,
    pub iterations: u32,
    /// Seconds.
    pub mean_interval: f64,
    pub traffic: TrafficKind,
    pub receiver: ReceiverKind,
    pub acrda: AcrdaParams,
    pub hop_min_separation: Option<u16>,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub per_node: bool,
    pub trace: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            nodes_sim: vec![125],
            grid_channels: 35,
            grid_multiplier: 8,
            header_copies: 3,
            coding_rate: CodingRate::OneThird,
            payload_bytes: 20,
            sim_time: 86_400.0,
            iterations: 100,
            mean_interval: 900.0,
            traffic: TrafficKind::Exponential,
            receiver: ReceiverKind::Baseline,
            acrda: AcrdaParams::default(),
            hop_min_separation: None,
            master_seed: 1,
            output: None,
            format: OutputFormat::Csv,
            per_node: false,
            trace: false,
        }
    }
}

impl ScenarioConfig {
    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<(), Error> {
        if self.nodes_sim.is_empty() || self.nodes_sim.contains(&0) {
            return Err(Error::Config("nodes_sim entries must be at least 1".into()));
        }
        let mut sorted = self.nodes_sim.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("nodes_sim entries must be distinct".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.sim_time.is_finite() && self.sim_time > 0.0) {
            return Err(Error::Config(format!(
                "sim_time must be positive, got {}",
                self.sim_time
            )));
        }
        self.region()?;
        self.transmission()?;
        self.traffic_model()?;
        AcrdaParams::new(self.acrda.window_norm, self.acrda.step_norm)?;
        self.hop_policy().validate(self.grid_channels)?;
        Ok(())
    }

    pub fn region(&self) -> Result<RegionalParams, Error> {
        RegionalParams::new(self.grid_channels, self.grid_multiplier)
    }

    pub fn transmission(&self) -> Result<TransmissionParams, Error> {
        TransmissionParams::new(self.header_copies, self.coding_rate, self.payload_bytes)
    }

    pub fn traffic_model(&self) -> Result<TrafficModel, Error> {
        TrafficModel::new(self.traffic, self.mean_interval)
    }

    pub fn hop_policy(&self) -> HopPolicy {
        HopPolicy {
            min_separation: self.hop_min_separation,
        }
    }

    pub fn receiver(&self) -> Receiver {
        match self.receiver {
            ReceiverKind::Baseline => Receiver::Baseline,
            ReceiverKind::Acrda => Receiver::Acrda(self.acrda),
        }
    }

    pub fn horizon(&self) -> SimTime {
        SimTime::from_secs_f64(self.sim_time)
    }

    pub fn sim_params(&self) -> Result<SimParams, Error> {
        Ok(SimParams {
            region: self.region()?,
            tx: self.transmission()?,
            hop_policy: self.hop_policy(),
            receiver: self.receiver(),
            horizon: self.horizon(),
            record_trace: self.trace,
        })
    }
}

/// Parses a comma-separated list of node counts.
pub fn parse_node_list(value: &str) -> Result<Vec<u32>, String> {
    value
        .split(',')
        .map(|v| {
            let v = v.trim();
            match v.parse::<u32>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(format!("expected a positive integer, got `{v}`")),
            }
        })
        .collect()
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse `{value}` as {}", std::any::type_name::<T>()))
}

fn parse_positive_f64(value: &str) -> Result<f64, String> {
    let x: f64 = parse_num(value)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got `{value}`"))
    }
}

fn parse_count<T: std::str::FromStr + PartialEq + Default>(value: &str) -> Result<T, String> {
    let n: T = parse_num(value)?;
    if n == T::default() {
        return Err("must be at least 1".into());
    }
    Ok(n)
}

/// Parses configuration text, filling unspecified keys with defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Error> {
    let mut cfg = ScenarioConfig::default();
    let mut drift_sigma: Option<f64> = None;
    let mut markov_p = DEFAULT_MARKOV_P;
    let mut markov_q = DEFAULT_MARKOV_Q;
    let mut traffic_name = "exponential".to_string();
    let mut seen: Vec<&str> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::ConfigLine {
                line: line_no,
                key: line.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let err = |message: String| Error::ConfigLine {
            line: line_no,
            key: key.to_string(),
            message,
        };
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(err("unknown key".into()));
        };
        if seen.contains(&known) {
            return Err(err("key given more than once".into()));
        }
        seen.push(known);
        if value.is_empty() {
            return Err(err("missing value".into()));
        }

        match known {
            "nodes_sim" => cfg.nodes_sim = parse_node_list(value).map_err(err)?,
            "grid_channels" => cfg.grid_channels = parse_num(value).map_err(err)?,
            "grid_multiplier" => cfg.grid_multiplier = parse_count(value).map_err(err)?,
            "header_copies" => cfg.header_copies = parse_num(value).map_err(err)?,
            "coding_rate" => cfg.coding_rate = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "payload_bytes" => cfg.payload_bytes = parse_count(value).map_err(err)?,
            "sim_time" => cfg.sim_time = parse_positive_f64(value).map_err(err)?,
            "iterations" => cfg.iterations = parse_count(value).map_err(err)?,
            "mean_interval" => cfg.mean_interval = parse_positive_f64(value).map_err(err)?,
            "traffic" => {
                value.parse::<TrafficKind>().map_err(|e| err(e.to_string()))?;
                traffic_name = value.to_string();
            }
            "drift_sigma" => {
                let s: f64 = parse_num(value).map_err(err)?;
                if !(s.is_finite() && s >= 0.0) {
                    return Err(err(format!("expected a non-negative number, got `{value}`")));
                }
                drift_sigma = Some(s);
            }
            "markov_p" => markov_p = parse_num(value).map_err(err)?,
            "markov_q" => markov_q = parse_num(value).map_err(err)?,
            "receiver" => cfg.receiver = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "acrda_window" => cfg.acrda.window_norm = parse_positive_f64(value).map_err(err)?,
            "acrda_step" => cfg.acrda.step_norm = parse_positive_f64(value).map_err(err)?,
            "hop_min_separation" => {
                cfg.hop_min_separation = match value {
                    "none" | "off" => None,
                    v => Some(parse_count(v).map_err(err)?),
                }
            }
            "master_seed" => cfg.master_seed = parse_num(value).map_err(err)?,
            "output" => cfg.output = Some(PathBuf::from(value)),
            "format" => cfg.format = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "per_node" => cfg.per_node = parse_bool(value).map_err(err)?,
            "trace" => cfg.trace = parse_bool(value).map_err(err)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }

    cfg.traffic = traffic_with_params(&traffic_name, drift_sigma, markov_p, markov_q)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Builds a traffic kind from its name and the optional model parameters.
pub fn traffic_with_params(name: &str, drift_sigma: Option<f64>, p: f64, q: f64) -> Result<TrafficKind, Error> {
    Ok(match name.parse::<TrafficKind>()? {
        TrafficKind::ConstantDrift { .. } => TrafficKind::ConstantDrift { sigma: drift_sigma },
        TrafficKind::Markov2 { .. } => TrafficKind::Markov2 { p, q },
        other => other,
    })
}
