use std::fmt;

use super::params::{RegionalParams, TransmissionParams};
use crate::engine::{RandomStream, SimTime};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketId(pub u64);

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A fragment is identified by its packet and its position in the packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FragmentId {
    pub packet: PacketId,
    pub index: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FragmentKind {
    Header,
    Payload,
}

impl FragmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FragmentKind::Header => "header",
            FragmentKind::Payload => "payload",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FragmentStatus {
    Pending,
    OnAir,
    Clean,
    Collided,
}

impl FragmentStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FragmentStatus::Pending => "pending",
            FragmentStatus::OnAir => "on_air",
            FragmentStatus::Clean => "clean",
            FragmentStatus::Collided => "collided",
        }
    }
}

/// One transmitted element: a header replica or a payload fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub kind: FragmentKind,
    pub index: u16,
    pub channel: u16,
    pub start: SimTime,
    pub duration: SimTime,
    pub packet: PacketId,
    pub status: FragmentStatus,
    pub colliders: Vec<FragmentId>,
}

impl Fragment {
    pub fn id(&self) -> FragmentId {
        FragmentId {
            packet: self.packet,
            index: self.index,
        }
    }

    pub fn end(&self) -> SimTime {
        self.start + self.duration
    }

    /// Half-open interval overlap on the same channel.
    pub fn overlaps(&self, other: &Fragment) -> bool {
        self.channel == other.channel && self.start < other.end() && other.start < self.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Undecided,
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: PacketId,
    pub node_id: u32,
    /// Header replicas first, then payload fragments, in transmission order.
    pub elements: Vec<Fragment>,
    /// Index of the next element to go on air.
    pub cursor: usize,
    pub header_copies: u8,
    /// Clean payload fragments required to decode.
    pub threshold: u32,
    pub outcome: Outcome,
}

impl Packet {
    /// Lays out a packet starting at `start` on the given hop sequence.
    pub fn with_hops(
        id: PacketId,
        node_id: u32,
        tx: &TransmissionParams,
        region: &RegionalParams,
        hops: &[u16],
        start: SimTime,
    ) -> Result<Packet, Error> {
        if hops.len() != tx.element_count() {
            return Err(Error::Config(format!(
                "hop sequence has {} entries, packet has {} elements",
                hops.len(),
                tx.element_count()
            )));
        }
        if let Some(&bad) = hops.iter().find(|&&c| c >= region.grid_channels) {
            return Err(Error::Config(format!(
                "hop channel {bad} outside grid of {}",
                region.grid_channels
            )));
        }
        let mut at = start;
        let elements = hops
            .iter()
            .enumerate()
            .map(|(i, &channel)| {
                let (kind, duration) = if i < usize::from(tx.header_copies) {
                    (FragmentKind::Header, region.header_duration)
                } else {
                    (FragmentKind::Payload, region.fragment_duration)
                };
                let frag = Fragment {
                    kind,
                    index: i as u16,
                    channel,
                    start: at,
                    duration,
                    packet: id,
                    status: FragmentStatus::Pending,
                    colliders: Vec::new(),
                };
                at += duration;
                frag
            })
            .collect();
        Ok(Packet {
            id,
            node_id,
            elements,
            cursor: 0,
            header_copies: tx.header_copies,
            threshold: tx.threshold(),
            outcome: Outcome::Undecided,
        })
    }

    pub fn hop_sequence(&self) -> impl Iterator<Item = u16> + '_ {
        self.elements.iter().map(|f| f.channel)
    }

    pub fn start(&self) -> SimTime {
        self.elements[0].start
    }

    pub fn end(&self) -> SimTime {
        self.elements.last().expect("packet has elements").end()
    }

    pub fn headers(&self) -> &[Fragment] {
        &self.elements[..usize::from(self.header_copies)]
    }

    pub fn payload(&self) -> &[Fragment] {
        &self.elements[usize::from(self.header_copies)..]
    }

    pub fn is_last(&self, index: u16) -> bool {
        usize::from(index) + 1 == self.elements.len()
    }
}

/// Hop sequence generator: i.i.d. uniform channels, each element on a
/// different channel from its predecessor. With `min_separation = Some(d)`
/// consecutive channels must also be at least `d` indices apart.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HopPolicy {
    pub min_separation: Option<u16>,
}

impl HopPolicy {
    pub fn validate(&self, grid_channels: u16) -> Result<(), Error> {
        if let Some(d) = self.min_separation {
            // Every channel needs a partner at least `d` away.
            let max_feasible = (grid_channels - 1) / 2;
            if d == 0 || d > max_feasible {
                return Err(Error::Config(format!(
                    "hop_min_separation must be in 1..={max_feasible} for a {grid_channels}-channel grid, got {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn draw(&self, len: usize, grid_channels: u16, rng: &mut RandomStream) -> Vec<u16> {
        let min_gap = self.min_separation.unwrap_or(1);
        let mut hops = Vec::with_capacity(len);
        let mut prev: Option<u16> = None;
        for _ in 0..len {
            let channel = loop {
                let c = rng.below(u32::from(grid_channels)) as u16;
                match prev {
                    Some(p) if c.abs_diff(p) < min_gap => continue,
                    _ => break c,
                }
            };
            hops.push(channel);
            prev = Some(channel);
        }
        hops
    }
}

/// Builds a packet for `node_id` starting at `start`, drawing its hop
/// sequence from the node's stream.
pub fn build_packet(
    id: PacketId,
    node_id: u32,
    tx: &TransmissionParams,
    region: &RegionalParams,
    hop_policy: &HopPolicy,
    rng: &mut RandomStream,
    start: SimTime,
) -> Packet {
    let hops = hop_policy.draw(tx.element_count(), region.grid_channels, rng);
    Packet::with_hops(id, node_id, tx, region, &hops, start).expect("drawn hops are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::derive_stream;
    use proptest::prelude::*;

    fn default_packet(seed: u64, node: u32) -> Packet {
        let mut rng = derive_stream(seed, u64::from(node));
        build_packet(
            PacketId(0),
            node,
            &TransmissionParams::default(),
            &RegionalParams::default(),
            &HopPolicy::default(),
            &mut rng,
            SimTime(1000),
        )
    }

    #[test]
    fn default_packet_layout() {
        let p = default_packet(1, 0);
        assert_eq!(p.elements.len(), 15);
        assert_eq!(p.headers().len(), 3);
        assert_eq!(p.payload().len(), 12);
        assert_eq!(p.threshold, 4);
        assert_eq!(p.end() - p.start(), SimTime(1_929_216));
        for w in p.elements.windows(2) {
            assert_eq!(w[1].start, w[0].end());
        }
    }

    #[test]
    fn hops_are_deterministic() {
        let a: Vec<u16> = default_packet(9, 4).hop_sequence().collect();
        let b: Vec<u16> = default_packet(9, 4).hop_sequence().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn with_hops_rejects_bad_sequences() {
        let tx = TransmissionParams::default();
        let region = RegionalParams::default();
        assert!(Packet::with_hops(PacketId(0), 0, &tx, &region, &[0; 3], SimTime(0)).is_err());
        assert!(Packet::with_hops(PacketId(0), 0, &tx, &region, &[35; 15], SimTime(0)).is_err());
    }

    #[test]
    fn separation_bounds() {
        assert!(HopPolicy {
            min_separation: Some(17)
        }
        .validate(35)
        .is_ok());
        assert!(HopPolicy {
            min_separation: Some(18)
        }
        .validate(35)
        .is_err());
        assert!(HopPolicy {
            min_separation: Some(0)
        }
        .validate(35)
        .is_err());
    }

    proptest! {
        #[test]
        fn hops_in_range_and_separated(seed in any::<u64>(), sep in proptest::option::of(1u16..=17), wide in any::<bool>()) {
            let grid = if wide { 86 } else { 35 };
            let policy = HopPolicy { min_separation: sep };
            let mut rng = derive_stream(seed, 0);
            let hops = policy.draw(40, grid, &mut rng);
            prop_assert_eq!(hops.len(), 40);
            prop_assert!(hops.iter().all(|&c| c < grid));
            for w in hops.windows(2) {
                prop_assert!(w[0].abs_diff(w[1]) >= sep.unwrap_or(1));
            }
        }
    }
}
