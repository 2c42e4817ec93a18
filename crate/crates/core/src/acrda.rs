//! Buffered sliding-window receiver with successive interference
//! cancellation.
//!
//! Completed packets are kept in an [`AcrdaBuffer`]. A window process fires
//! every `step_norm * T_pkt` and looks at `[w_end - W * T_pkt, w_end]`: every
//! undecoded packet fully inside the window is decoded if enough of its
//! elements are recoverable, where an element is recoverable when all of its
//! interferers belong to already-decoded packets (cancellation is perfect).
//! Decoding repeats until a fixed point. Packets that can no longer fit in a
//! future window are finalized and purged.

use std::collections::{BTreeMap, HashSet};

use crate::engine::SimTime;
use crate::protocol::{FragmentKind, Packet, PacketId};
use crate::Error;

pub const DEFAULT_WINDOW_NORM: f64 = 2.0;
pub const DEFAULT_STEP_NORM: f64 = 0.5;

/// Window size and step, both in units of one packet airtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcrdaParams {
    pub window_norm: f64,
    pub step_norm: f64,
}

impl Default for AcrdaParams {
    fn default() -> Self {
        AcrdaParams {
            window_norm: DEFAULT_WINDOW_NORM,
            step_norm: DEFAULT_STEP_NORM,
        }
    }
}

impl AcrdaParams {
    pub fn new(window_norm: f64, step_norm: f64) -> Result<Self, Error> {
        if !(window_norm.is_finite() && window_norm >= 1.0) {
            return Err(Error::Config(format!(
                "acrda window must be >= 1 packet airtime, got {window_norm}"
            )));
        }
        if !(step_norm > 0.0 && step_norm <= window_norm) {
            return Err(Error::Config(format!(
                "acrda step must be in (0, window], got {step_norm}"
            )));
        }
        Ok(AcrdaParams { window_norm, step_norm })
    }

    /// Converts to absolute ticks for a given packet airtime.
    pub fn schedule(&self, airtime: SimTime) -> WindowSchedule {
        let scale = |x: f64| SimTime::from_secs_f64(x * airtime.as_secs_f64()).max(SimTime(1));
        WindowSchedule {
            window: scale(self.window_norm),
            step: scale(self.step_norm),
        }
    }
}

/// Closed time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: SimTime,
    pub end: SimTime,
}

impl Window {
    pub fn contains(&self, start: SimTime, end: SimTime) -> bool {
        self.start <= start && end <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSchedule {
    pub window: SimTime,
    pub step: SimTime,
}

impl WindowSchedule {
    /// The window evaluated at time `w_end`.
    pub fn ending_at(&self, w_end: SimTime) -> Window {
        Window {
            start: w_end.saturating_sub(self.window),
            end: w_end,
        }
    }

    /// Packets ending before this time cannot be decoded by any later window.
    pub fn purge_before(&self, w_end: SimTime) -> SimTime {
        (w_end + self.step).saturating_sub(self.window)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BufferedFragment {
    pub kind: FragmentKind,
    pub channel: u16,
    pub start: SimTime,
    pub end: SimTime,
    /// Distinct packets whose elements overlapped this one, sorted.
    pub interferers: Vec<PacketId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BufferedPacket {
    pub id: PacketId,
    pub node_id: u32,
    pub start: SimTime,
    pub end: SimTime,
    pub threshold: u32,
    pub fragments: Vec<BufferedFragment>,
}

impl BufferedPacket {
    pub fn from_packet(packet: &Packet) -> Self {
        let fragments = packet
            .elements
            .iter()
            .map(|f| {
                let mut interferers: Vec<PacketId> = f.colliders.iter().map(|c| c.packet).collect();
                interferers.sort_unstable();
                interferers.dedup();
                BufferedFragment {
                    kind: f.kind,
                    channel: f.channel,
                    start: f.start,
                    end: f.end(),
                    interferers,
                }
            })
            .collect();
        BufferedPacket {
            id: packet.id,
            node_id: packet.node_id,
            start: packet.start(),
            end: packet.end(),
            threshold: packet.threshold,
            fragments,
        }
    }

    /// Decodable given the set of already-decoded packets.
    pub fn decodable(&self, decoded: &HashSet<PacketId>) -> bool {
        let mut headers = 0;
        let mut payload = 0;
        for f in &self.fragments {
            if f.interferers.iter().all(|p| decoded.contains(p)) {
                match f.kind {
                    FragmentKind::Header => headers += 1,
                    FragmentKind::Payload => payload += 1,
                }
            }
        }
        headers >= 1 && payload >= self.threshold
    }
}

/// Final outcome of one buffered packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Finalized {
    pub id: PacketId,
    pub node_id: u32,
    pub success: bool,
}

#[derive(Debug, Default)]
pub struct AcrdaBuffer {
    packets: BTreeMap<PacketId, BufferedPacket>,
    decoded: HashSet<PacketId>,
}

impl AcrdaBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, packet: BufferedPacket) {
        self.packets.insert(packet.id, packet);
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn is_decoded(&self, id: PacketId) -> bool {
        self.decoded.contains(&id)
    }

    pub fn packets(&self) -> impl Iterator<Item = &BufferedPacket> {
        self.packets.values()
    }

    /// Runs cancellation to a fixed point over the packets contained in
    /// `window`. Returns newly decoded ids in decode order.
    pub fn sic_decode_window(&mut self, window: Window) -> Vec<PacketId> {
        let mut pending: Vec<&BufferedPacket> = self
            .packets
            .values()
            .filter(|p| window.contains(p.start, p.end) && !self.decoded.contains(&p.id))
            .collect();
        let mut newly = Vec::new();
        loop {
            let before = newly.len();
            pending.retain(|p| {
                if p.decodable(&self.decoded) {
                    self.decoded.insert(p.id);
                    newly.push(p.id);
                    false
                } else {
                    true
                }
            });
            if newly.len() == before {
                break;
            }
        }
        newly
    }

    /// Finalizes and removes every packet ending strictly before `before`.
    pub fn finalize_and_purge(&mut self, before: SimTime) -> Vec<Finalized> {
        let expired: Vec<PacketId> = self.packets.values().filter(|p| p.end < before).map(|p| p.id).collect();
        self.finalize(&expired)
    }

    /// Finalizes everything left in the buffer.
    pub fn flush(&mut self) -> Vec<Finalized> {
        let all: Vec<PacketId> = self.packets.keys().copied().collect();
        self.finalize(&all)
    }

    fn finalize(&mut self, ids: &[PacketId]) -> Vec<Finalized> {
        ids.iter()
            .filter_map(|id| self.packets.remove(id))
            .map(|p| Finalized {
                id: p.id,
                node_id: p.node_id,
                success: self.decoded.contains(&p.id),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frag(kind: FragmentKind, interferers: &[u64]) -> BufferedFragment {
        BufferedFragment {
            kind,
            channel: 0,
            start: SimTime(0),
            end: SimTime(1),
            interferers: interferers.iter().map(|&i| PacketId(i)).collect(),
        }
    }

    fn pkt(id: u64, start: u64, end: u64, threshold: u32, frags: Vec<BufferedFragment>) -> BufferedPacket {
        BufferedPacket {
            id: PacketId(id),
            node_id: id as u32,
            start: SimTime(start),
            end: SimTime(end),
            threshold,
            fragments: frags,
        }
    }

    fn all() -> Window {
        Window {
            start: SimTime(0),
            end: SimTime(100),
        }
    }

    #[test]
    fn empty_buffer_decodes_nothing() {
        assert!(AcrdaBuffer::new().sic_decode_window(all()).is_empty());
    }

    #[test]
    fn cancellation_chain() {
        use FragmentKind::*;
        let mut buf = AcrdaBuffer::new();
        // A: clean header, one payload collided with B, one clean payload.
        buf.insert(pkt(
            0,
            0,
            10,
            1,
            vec![frag(Header, &[]), frag(Payload, &[1]), frag(Payload, &[])],
        ));
        // B: clean header, both payloads collided (one with A).
        buf.insert(pkt(
            1,
            0,
            10,
            1,
            vec![frag(Header, &[]), frag(Payload, &[0]), frag(Payload, &[9])],
        ));
        let got = buf.sic_decode_window(all());
        assert_eq!(got, vec![PacketId(0), PacketId(1)]);
    }

    #[test]
    fn cancellation_order_does_not_matter() {
        use FragmentKind::*;
        let mut buf = AcrdaBuffer::new();
        // Only the higher id is decodable first.
        buf.insert(pkt(
            0,
            0,
            10,
            1,
            vec![frag(Header, &[]), frag(Payload, &[1]), frag(Payload, &[9])],
        ));
        buf.insert(pkt(
            1,
            0,
            10,
            1,
            vec![frag(Header, &[]), frag(Payload, &[0]), frag(Payload, &[])],
        ));
        let mut got = buf.sic_decode_window(all());
        got.sort();
        assert_eq!(got, vec![PacketId(0), PacketId(1)]);
    }

    #[test]
    fn full_overlap_deadlocks() {
        use FragmentKind::*;
        let mut buf = AcrdaBuffer::new();
        buf.insert(pkt(
            0,
            0,
            10,
            1,
            vec![frag(Header, &[1]), frag(Payload, &[1]), frag(Payload, &[1])],
        ));
        buf.insert(pkt(
            1,
            0,
            10,
            1,
            vec![frag(Header, &[0]), frag(Payload, &[0]), frag(Payload, &[0])],
        ));
        assert!(buf.sic_decode_window(all()).is_empty());
    }

    #[test]
    fn containment_is_required() {
        use FragmentKind::*;
        let mut buf = AcrdaBuffer::new();
        buf.insert(pkt(0, 5, 15, 1, vec![frag(Header, &[]), frag(Payload, &[])]));
        let w = Window {
            start: SimTime(0),
            end: SimTime(10),
        };
        assert!(buf.sic_decode_window(w).is_empty());
        let w = Window {
            start: SimTime(5),
            end: SimTime(15),
        };
        assert_eq!(buf.sic_decode_window(w), vec![PacketId(0)]);
    }

    #[test]
    fn purge_semantics() {
        use FragmentKind::*;
        let mut buf = AcrdaBuffer::new();
        buf.insert(pkt(0, 0, 10, 1, vec![frag(Header, &[]), frag(Payload, &[])]));
        buf.insert(pkt(1, 0, 10, 1, vec![frag(Header, &[7]), frag(Payload, &[])]));
        buf.insert(pkt(2, 15, 25, 1, vec![frag(Header, &[]), frag(Payload, &[])]));
        buf.sic_decode_window(Window {
            start: SimTime(0),
            end: SimTime(12),
        });
        let mut out = buf.finalize_and_purge(SimTime(20));
        out.sort_by_key(|f| f.id);
        assert_eq!(out.len(), 2);
        assert!(out[0].success);
        assert!(!out[1].success);
        // Packet 2 straddles the cut and stays.
        assert_eq!(buf.len(), 1);
        // Packet 1's failure is final even if its interferer decodes later.
        assert!(!buf.is_decoded(PacketId(1)));
        assert_eq!(buf.flush().len(), 1);
        assert!(buf.is_empty());
    }

    #[test]
    fn default_schedule_ticks() {
        let s = AcrdaParams::default().schedule(SimTime(1_929_216));
        assert_eq!(s.step, SimTime(964_608));
        assert_eq!(s.window, SimTime(3_858_432));
        assert_eq!(s.ending_at(SimTime(964_608)).start, SimTime::ZERO);
        assert_eq!(s.purge_before(SimTime(3_858_432)), SimTime(964_608));
    }

    #[test]
    fn params_validation() {
        assert!(AcrdaParams::new(0.5, 0.25).is_err());
        assert!(AcrdaParams::new(2.0, 0.0).is_err());
        assert!(AcrdaParams::new(2.0, 2.5).is_err());
        assert!(AcrdaParams::new(1.0, 1.0).is_ok());
    }
}
