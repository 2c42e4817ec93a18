//! Baseline receiver: tracks on-air fragments per channel, marks every
//! same-channel time overlap as a mutual collision, and decodes a packet when
//! its last element ends.

use std::collections::BTreeMap;

use super::packet::{FragmentId, FragmentKind, FragmentStatus, Packet, PacketId};
use crate::engine::SimTime;
use crate::Error;

/// Per-node packet counts. Only packets that finished before the horizon
/// are counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeTally {
    pub transmitted: u64,
    pub succeeded: u64,
}

#[derive(Debug)]
pub struct GatewayState {
    active: Vec<Vec<FragmentId>>,
    in_flight: BTreeMap<PacketId, Packet>,
    per_node: Vec<NodeTally>,
}

impl GatewayState {
    pub fn new(grid_channels: u16, nodes: usize) -> Self {
        GatewayState {
            active: vec![Vec::new(); usize::from(grid_channels)],
            in_flight: BTreeMap::new(),
            per_node: vec![NodeTally::default(); nodes],
        }
    }

    pub fn register(&mut self, packet: Packet) {
        self.in_flight.insert(packet.id, packet);
    }

    pub fn packet(&self, id: PacketId) -> Option<&Packet> {
        self.in_flight.get(&id)
    }

    pub fn in_flight(&self) -> impl Iterator<Item = &Packet> {
        self.in_flight.values()
    }

    pub fn active_on(&self, channel: u16) -> &[FragmentId] {
        &self.active[usize::from(channel)]
    }

    pub fn tallies(&self) -> &[NodeTally] {
        &self.per_node
    }

    pub fn record_outcome(&mut self, node_id: u32, success: bool) {
        let t = &mut self.per_node[node_id as usize];
        t.transmitted += 1;
        t.succeeded += u64::from(success);
    }

    /// Puts a fragment on air and marks it collided with every active
    /// fragment on the same channel.
    pub fn on_fragment_start(&mut self, id: FragmentId, now: SimTime) -> Result<(), Error> {
        let (channel, start, end) = {
            let frag = self.fragment_mut(id)?;
            if frag.status != FragmentStatus::Pending {
                return Err(Error::Consistency(format!(
                    "fragment {}:{} started twice",
                    id.packet, id.index
                )));
            }
            frag.status = FragmentStatus::OnAir;
            frag.start = now;
            (frag.channel, frag.start, frag.end())
        };

        let mut hits = Vec::new();
        for &other in &self.active[usize::from(channel)] {
            let g = self.fragment(other)?;
            if g.start < end && start < g.end() {
                hits.push(other);
            }
        }
        for &other in &hits {
            self.fragment_mut(other)?.colliders.push(id);
        }
        self.fragment_mut(id)?.colliders.extend(hits);
        self.active[usize::from(channel)].push(id);

        if let Some(p) = self.in_flight.get_mut(&id.packet) {
            p.cursor = usize::from(id.index) + 1;
        }
        Ok(())
    }

    /// Takes a fragment off air and finalizes its status. Returns the packet,
    /// removed from the in-flight set, when this was its last element.
    pub fn on_fragment_end(&mut self, id: FragmentId, _now: SimTime) -> Result<Option<Packet>, Error> {
        let channel = {
            let frag = self.fragment_mut(id)?;
            if frag.status != FragmentStatus::OnAir {
                return Err(Error::Consistency(format!(
                    "fragment {}:{} ended while not on air",
                    id.packet, id.index
                )));
            }
            frag.status = if frag.colliders.is_empty() {
                FragmentStatus::Clean
            } else {
                FragmentStatus::Collided
            };
            frag.channel
        };
        let slot = &mut self.active[usize::from(channel)];
        let pos = slot
            .iter()
            .position(|&f| f == id)
            .ok_or_else(|| Error::Consistency(format!("fragment {}:{} not in active set", id.packet, id.index)))?;
        slot.swap_remove(pos);

        let last = self.in_flight[&id.packet].is_last(id.index);
        Ok(if last { self.in_flight.remove(&id.packet) } else { None })
    }

    fn fragment(&self, id: FragmentId) -> Result<&super::Fragment, Error> {
        self.in_flight
            .get(&id.packet)
            .and_then(|p| p.elements.get(usize::from(id.index)))
            .ok_or_else(|| Error::Consistency(format!("unknown fragment {}:{}", id.packet, id.index)))
    }

    fn fragment_mut(&mut self, id: FragmentId) -> Result<&mut super::Fragment, Error> {
        self.in_flight
            .get_mut(&id.packet)
            .and_then(|p| p.elements.get_mut(usize::from(id.index)))
            .ok_or_else(|| Error::Consistency(format!("unknown fragment {}:{}", id.packet, id.index)))
    }
}

/// Baseline decode rule: at least one clean header and at least `threshold`
/// clean payload fragments.
pub fn try_decode(packet: &Packet) -> bool {
    let clean = |kind: FragmentKind| {
        packet
            .elements
            .iter()
            .filter(|f| f.kind == kind && f.status == FragmentStatus::Clean)
            .count()
    };
    clean(FragmentKind::Header) >= 1 && clean(FragmentKind::Payload) >= packet.threshold as usize
}
