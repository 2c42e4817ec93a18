//! LR-FHSS protocol model: packet layout, node transmission routine and the
//! baseline gateway.

mod gateway;
mod packet;
mod params;
mod sim;

pub use gateway::{try_decode, GatewayState, NodeTally};
pub use packet::{
    build_packet, Fragment, FragmentId, FragmentKind, FragmentStatus, HopPolicy, Outcome, Packet, PacketId,
};
pub use params::{
    decode_threshold, fragment_count, CodingRate, RegionalParams, TransmissionParams, CHANNEL_BANDWIDTH_HZ,
    FRAGMENT_DURATION, HEADER_DURATION,
};
pub use sim::{Node, Receiver, RunOutcome, SimParams, Simulation, TraceRecord};
