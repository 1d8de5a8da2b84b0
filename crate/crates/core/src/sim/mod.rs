//! Channel model, scheduling, accounting and correctness predicates.

pub mod channel;
pub mod config;
pub mod disputes;
pub mod engine;
pub mod meter;
pub mod outcome;

pub use channel::{
    channel_deliver, Accounting, ChannelError, Delivery, Payload, Phase, SlotId, SlotKind,
    SlotRecord, SlotTransmission,
};
pub use config::{ConfigError, NodeId, SystemConfig};
pub use disputes::DisputeGraph;
pub use engine::{Coalescing, EigPurpose, Outgoing, SimError, SimRecord, Simulation, SlotContext, Step};
pub use meter::{Counters, PhaseCounters, TrafficMeter};
pub use outcome::{check_bb_properties, BbOutcome, BbVerdict, Property};
