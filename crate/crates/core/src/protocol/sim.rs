use super::gateway::{try_decode, GatewayState, NodeTally};
use super::packet::{build_packet, FragmentId, FragmentKind, FragmentStatus, HopPolicy, Outcome, Packet, PacketId};
use super::params::{RegionalParams, TransmissionParams};
use crate::acrda::{AcrdaBuffer, AcrdaParams, BufferedPacket, Finalized, WindowSchedule};
use crate::engine::{Engine, RandomStream, SimTime};
use crate::traffic::TrafficModel;
use crate::Error;

/// Which receiver the gateway runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Receiver {
    Baseline,
    Acrda(AcrdaParams),
}

impl Receiver {
    pub fn name(&self) -> &'static str {
        match self {
            Receiver::Baseline => "baseline",
            Receiver::Acrda(_) => "acrda",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub region: RegionalParams,
    pub tx: TransmissionParams,
    pub hop_policy: HopPolicy,
    pub receiver: Receiver,
    pub horizon: SimTime,
    pub record_trace: bool,
}

/// An end device. `traffic = None` makes a scripted node that only sends
/// packets injected with [`Simulation::inject_packet`].
#[derive(Debug, Clone)]
pub struct Node {
    pub id: u32,
    pub traffic: Option<TrafficModel>,
    pub rng: RandomStream,
}

/// One fragment as seen by the gateway, with its final collision state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub packet_id: PacketId,
    pub node_id: u32,
    pub kind: FragmentKind,
    pub index: u16,
    pub channel: u16,
    pub start: SimTime,
    pub end: SimTime,
    pub status: FragmentStatus,
    pub colliders: Vec<FragmentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub per_node: Vec<NodeTally>,
    /// Successfully decoded packets, sorted.
    pub decoded: Vec<PacketId>,
    /// Completed packets that failed, sorted.
    pub failed: Vec<PacketId>,
    pub trace: Option<Vec<TraceRecord>>,
    pub events: u64,
    pub horizon: SimTime,
}

impl RunOutcome {
    pub fn transmitted(&self) -> u64 {
        self.per_node.iter().map(|t| t.transmitted).sum()
    }

    pub fn succeeded(&self) -> u64 {
        self.per_node.iter().map(|t| t.succeeded).sum()
    }
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Wake(u32),
    ElementStart(FragmentId),
    ElementEnd(FragmentId),
    Window,
}

enum ReceiverState {
    Baseline,
    Acrda {
        buffer: AcrdaBuffer,
        schedule: WindowSchedule,
    },
}

/// One simulation run: nodes, gateway and receiver driven by one engine.
pub struct Simulation {
    engine: Engine<Action>,
    gateway: GatewayState,
    nodes: Vec<Node>,
    receiver: ReceiverState,
    params: SimParams,
    next_packet: u64,
    decoded: Vec<PacketId>,
    failed: Vec<PacketId>,
    trace: Option<Vec<TraceRecord>>,
}

impl Simulation {
    pub fn new(params: SimParams, mut nodes: Vec<Node>) -> Result<Self, Error> {
        params.hop_policy.validate(params.region.grid_channels)?;
        for (i, n) in nodes.iter().enumerate() {
            if n.id as usize != i {
                return Err(Error::Config(format!("node at position {i} has id {}", n.id)));
            }
        }
        let receiver = match params.receiver {
            Receiver::Baseline => ReceiverState::Baseline,
            Receiver::Acrda(acrda) => ReceiverState::Acrda {
                buffer: AcrdaBuffer::new(),
                schedule: acrda.schedule(params.tx.airtime(&params.region)),
            },
        };
        let mut engine = Engine::new();
        for node in &mut nodes {
            if let Some(traffic) = node.traffic.as_mut() {
                let wait = SimTime::from_secs_f64(traffic.first_interval(&mut node.rng));
                engine.schedule(wait, Action::Wake(node.id))?;
            }
        }
        if let ReceiverState::Acrda { schedule, .. } = &receiver {
            engine.schedule(schedule.step, Action::Window)?;
        }
        Ok(Simulation {
            engine,
            gateway: GatewayState::new(params.region.grid_channels, nodes.len()),
            nodes,
            receiver,
            trace: params.record_trace.then(Vec::new),
            params,
            next_packet: 0,
            decoded: Vec::new(),
            failed: Vec::new(),
        })
    }

    /// Schedules a packet with a fixed hop sequence at `start`.
    pub fn inject_packet(&mut self, node_id: u32, start: SimTime, hops: &[u16]) -> Result<PacketId, Error> {
        if node_id as usize >= self.nodes.len() {
            return Err(Error::Config(format!("unknown node {node_id}")));
        }
        let id = self.allocate_id();
        let packet = Packet::with_hops(id, node_id, &self.params.tx, &self.params.region, hops, start)?;
        self.gateway.register(packet);
        self.engine
            .schedule(start, Action::ElementStart(FragmentId { packet: id, index: 0 }))?;
        Ok(id)
    }

    pub fn run(mut self) -> Result<RunOutcome, Error> {
        let horizon = self.params.horizon;
        let mut engine = std::mem::take(&mut self.engine);
        let events = engine.run_until(horizon, |eng, action| self.dispatch(eng, action))?;
        self.finish(horizon);
        self.decoded.sort_unstable();
        self.failed.sort_unstable();
        Ok(RunOutcome {
            per_node: self.gateway.tallies().to_vec(),
            decoded: self.decoded,
            failed: self.failed,
            trace: self.trace,
            events,
            horizon,
        })
    }

    fn allocate_id(&mut self) -> PacketId {
        let id = PacketId(self.next_packet);
        self.next_packet += 1;
        id
    }

    fn dispatch(&mut self, eng: &mut Engine<Action>, action: Action) -> Result<(), Error> {
        let now = eng.now();
        match action {
            Action::Wake(node_id) => {
                self.start_packet(eng, node_id)?;
            }
            Action::ElementStart(fid) => {
                self.gateway.on_fragment_start(fid, now)?;
                let duration =
                    self.gateway.packet(fid.packet).expect("in flight").elements[usize::from(fid.index)].duration;
                eng.schedule_in(duration, Action::ElementEnd(fid));
            }
            Action::ElementEnd(fid) => match self.gateway.on_fragment_end(fid, now)? {
                None => {
                    let next = FragmentId {
                        packet: fid.packet,
                        index: fid.index + 1,
                    };
                    eng.schedule_in(SimTime::ZERO, Action::ElementStart(next));
                }
                Some(packet) => {
                    let node_id = packet.node_id;
                    self.complete(packet);
                    self.schedule_wake(eng, node_id);
                }
            },
            Action::Window => {
                if let ReceiverState::Acrda { buffer, schedule } = &mut self.receiver {
                    buffer.sic_decode_window(schedule.ending_at(now));
                    let done = buffer.finalize_and_purge(schedule.purge_before(now));
                    let step = schedule.step;
                    self.apply(done);
                    eng.schedule_in(step, Action::Window);
                }
            }
        }
        Ok(())
    }

    fn start_packet(&mut self, eng: &mut Engine<Action>, node_id: u32) -> Result<(), Error> {
        // Starting through a separate zero-delay event orders this start
        // after any fragment end already queued for the same tick.
        let id = self.allocate_id();
        let node = &mut self.nodes[node_id as usize];
        let packet = build_packet(
            id,
            node_id,
            &self.params.tx,
            &self.params.region,
            &self.params.hop_policy,
            &mut node.rng,
            eng.now(),
        );
        self.gateway.register(packet);
        eng.schedule_in(SimTime::ZERO, Action::ElementStart(FragmentId { packet: id, index: 0 }));
        Ok(())
    }

    fn schedule_wake(&mut self, eng: &mut Engine<Action>, node_id: u32) {
        let node = &mut self.nodes[node_id as usize];
        if let Some(traffic) = node.traffic.as_mut() {
            let wait = SimTime::from_secs_f64(traffic.next_interval(&mut node.rng));
            eng.schedule_in(wait, Action::Wake(node_id));
        }
    }

    fn complete(&mut self, mut packet: Packet) {
        self.record_trace(&packet);
        match &mut self.receiver {
            ReceiverState::Baseline => {
                let success = try_decode(&packet);
                packet.outcome = if success { Outcome::Success } else { Outcome::Failure };
                self.apply(std::iter::once(Finalized {
                    id: packet.id,
                    node_id: packet.node_id,
                    success,
                }));
            }
            ReceiverState::Acrda { buffer, .. } => buffer.insert(BufferedPacket::from_packet(&packet)),
        }
    }

    fn apply(&mut self, finalized: impl IntoIterator<Item = Finalized>) {
        for f in finalized {
            self.gateway.record_outcome(f.node_id, f.success);
            if f.success {
                self.decoded.push(f.id);
            } else {
                self.failed.push(f.id);
            }
        }
    }

    fn finish(&mut self, horizon: SimTime) {
        if let ReceiverState::Acrda { buffer, schedule } = &mut self.receiver {
            buffer.sic_decode_window(schedule.ending_at(horizon));
            let done = buffer.flush();
            self.apply(done);
        }
        if self.trace.is_some() {
            let truncated: Vec<Packet> = self.gateway.in_flight().cloned().collect();
            for p in &truncated {
                self.record_trace(p);
            }
        }
    }

    fn record_trace(&mut self, packet: &Packet) {
        let Some(trace) = self.trace.as_mut() else { return };
        trace.extend(
            packet
                .elements
                .iter()
                .filter(|f| f.status != FragmentStatus::Pending)
                .map(|f| TraceRecord {
                    packet_id: packet.id,
                    node_id: packet.node_id,
                    kind: f.kind,
                    index: f.index,
                    channel: f.channel,
                    start: f.start,
                    end: f.end(),
                    status: f.status,
                    colliders: f.colliders.clone(),
                }),
        );
    }
}
