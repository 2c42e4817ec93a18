use std::fmt;
use std::str::FromStr;

use crate::engine::SimTime;
use crate::Error;

/// Header replica airtime.
pub const HEADER_DURATION: SimTime = SimTime::from_micros(233_472);
/// Payload fragment airtime.
pub const FRAGMENT_DURATION: SimTime = SimTime::from_micros(102_400);
/// Occupied bandwidth of one physical channel.
pub const CHANNEL_BANDWIDTH_HZ: f64 = 488.0;

/// Convolutional code rate of the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodingRate {
    OneThird,
    TwoThirds,
}

impl CodingRate {
    pub fn from_ratio(numerator: u32, denominator: u32) -> Result<Self, Error> {
        // Compare reduced fractions so that 2/6 and 4/6 are accepted too.
        match (u64::from(numerator) * 3, u64::from(denominator)) {
            (n, d) if d != 0 && n == d => Ok(CodingRate::OneThird),
            (n, d) if d != 0 && n == 2 * d => Ok(CodingRate::TwoThirds),
            _ => Err(Error::Config(format!(
                "unsupported coding rate {numerator}/{denominator} (expected 1/3 or 2/3)"
            ))),
        }
    }

    pub fn numerator(self) -> u32 {
        match self {
            CodingRate::OneThird => 1,
            CodingRate::TwoThirds => 2,
        }
    }

    pub fn denominator(self) -> u32 {
        3
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.numerator()) / f64::from(self.denominator())
    }
}

impl fmt::Display for CodingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

impl FromStr for CodingRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("cannot parse coding rate `{s}`"));
        let (n, d) = s.trim().split_once('/').ok_or_else(bad)?;
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        let d: u32 = d.trim().parse().map_err(|_| bad())?;
        CodingRate::from_ratio(n, d)
    }
}

/// Number of payload fragments for `payload_bytes` at `rate`:
/// `ceil((b + 3) / (6 * CR))`.
pub fn fragment_count(payload_bytes: u32, rate: CodingRate) -> u32 {
    // (b + 3) / (6 * n / 3) = (b + 3) / (2 * n)
    let numerator = payload_bytes + 3;
    let denominator = 2 * rate.numerator();
    numerator.div_ceil(denominator)
}

/// Minimum number of clean payload fragments needed to decode: `ceil(f * CR)`.
pub fn decode_threshold(fragments: u32, rate: CodingRate) -> u32 {
    (fragments * rate.numerator()).div_ceil(rate.denominator())
}

/// Regional channel plan. Only one grid is simulated; `grid_multiplier`
/// scales the reported device count.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionalParams {
    pub grid_channels: u16,
    pub header_duration: SimTime,
    pub fragment_duration: SimTime,
    pub channel_bandwidth_hz: f64,
    pub grid_multiplier: u32,
}

impl RegionalParams {
    pub fn new(grid_channels: u16, grid_multiplier: u32) -> Result<Self, Error> {
        if grid_channels != 35 && grid_channels != 86 {
            return Err(Error::Config(format!(
                "grid_channels must be 35 or 86, got {grid_channels}"
            )));
        }
        if grid_multiplier == 0 {
            return Err(Error::Config("grid_multiplier must be at least 1".into()));
        }
        Ok(RegionalParams {
            grid_channels,
            header_duration: HEADER_DURATION,
            fragment_duration: FRAGMENT_DURATION,
            channel_bandwidth_hz: CHANNEL_BANDWIDTH_HZ,
            grid_multiplier,
        })
    }
}

impl Default for RegionalParams {
    fn default() -> Self {
        RegionalParams::new(35, 8).expect("default grid is valid")
    }
}

/// Per-packet transmission settings (data rate and payload size).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransmissionParams {
    pub header_copies: u8,
    pub coding_rate: CodingRate,
    pub payload_bytes: u32,
}

impl Default for TransmissionParams {
    /// DR8 with a 20-byte payload.
    fn default() -> Self {
        TransmissionParams {
            header_copies: 3,
            coding_rate: CodingRate::OneThird,
            payload_bytes: 20,
        }
    }
}

impl TransmissionParams {
    pub fn new(header_copies: u8, coding_rate: CodingRate, payload_bytes: u32) -> Result<Self, Error> {
        if !(2..=3).contains(&header_copies) {
            return Err(Error::Config(format!(
                "header_copies must be 2 or 3, got {header_copies}"
            )));
        }
        if payload_bytes == 0 {
            return Err(Error::Config("payload_bytes must be at least 1".into()));
        }
        Ok(TransmissionParams {
            header_copies,
            coding_rate,
            payload_bytes,
        })
    }

    pub fn fragments(&self) -> u32 {
        fragment_count(self.payload_bytes, self.coding_rate)
    }

    pub fn threshold(&self) -> u32 {
        decode_threshold(self.fragments(), self.coding_rate)
    }

    pub fn element_count(&self) -> usize {
        usize::from(self.header_copies) + self.fragments() as usize
    }

    /// Total time on air of one packet.
    pub fn airtime(&self, region: &RegionalParams) -> SimTime {
        SimTime(
            u64::from(self.header_copies) * region.header_duration.ticks()
                + u64::from(self.fragments()) * region.fragment_duration.ticks(),
        )
    }
}
