//! Round scheduler tying protocol code, the channel and the adversary
//! together.
//!
//! Protocol code hands the engine what every scheduled sender would
//! transmit if it followed the protocol. The engine swaps in the
//! adversary's choice for corrupted senders, delivers everything through
//! the channel and returns the deliveries. Which nodes are corrupted is
//! held here and never exposed to protocol code.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::adversary::Adversary;
use crate::bits::Bits;
use crate::sim::channel::{
    channel_deliver, Accounting, ChannelError, Delivery, Payload, Phase, SlotId, SlotRecord,
    SlotTransmission,
};
use crate::sim::config::{NodeId, SystemConfig};
use crate::sim::meter::TrafficMeter;

/// What a baseline-broadcast instance is carrying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EigPurpose {
    /// One node's detection flag.
    Detection,
    /// The source's block during dispute control.
    SourceValue,
    /// A peer's dispute-control claim.
    Claim,
    /// An active node's value in the committee algorithm.
    Consensus,
    Standalone,
}

/// Protocol step a slot belongs to, visible to the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    DbSource {
        generation: usize,
    },
    DbRelay {
        generation: usize,
    },
    /// `level` 0 is the origin's own transmission; higher levels relay.
    Eig {
        purpose: EigPurpose,
        generation: usize,
        origin: NodeId,
        level: usize,
    },
    CommitteeSource,
    Announce,
}

impl Step {
    /// True when `sender` is originating a value rather than relaying one.
    pub fn is_origination(&self, sender: NodeId) -> bool {
        match *self {
            Step::DbSource { .. } | Step::CommitteeSource => sender.is_source(),
            Step::Eig { origin, level, .. } => level == 0 && origin == sender,
            Step::DbRelay { .. } | Step::Announce => false,
        }
    }
}

/// A transmission as the protocol prescribes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub sender: NodeId,
    pub step: Step,
    pub payload: Bits,
    /// Intended receivers; also the copy count under point-to-point accounting.
    pub audience: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coalescing {
    /// One channel broadcast per fault-free transmission.
    Broadcast,
    /// Each fault-free transmission costs one message per intended receiver.
    Unicast,
}

/// Everything the adversary may look at before choosing a corrupted
/// sender's transmission. Fault-free traffic of the current round is
/// included: the adversary is rushing.
#[derive(Debug)]
pub struct SlotContext<'a> {
    pub config: &'a SystemConfig,
    pub phase: Phase,
    pub slot: SlotId,
    pub step: Step,
    pub sender: NodeId,
    pub honest_payload: &'a Bits,
    pub audience: &'a [NodeId],
    pub round_traffic: &'a [(NodeId, Step, Bits)],
    pub source_input: &'a Bits,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("fault-free nodes diverged on a common decision")]
    Divergence,
    #[error("no fault-free node holds the decision")]
    NoFaultFreeNode,
    #[error("corrupt set names {0}, which is not a node")]
    UnknownCorruptNode(NodeId),
    #[error("corrupt set of size {size} exceeds t = {t}")]
    TooManyCorrupt { size: usize, t: usize },
}

/// Traffic and ground truth left after a run.
#[derive(Debug, Clone)]
pub struct SimRecord {
    pub meter: TrafficMeter,
    pub trace: Vec<SlotRecord>,
    pub corrupt: BTreeSet<NodeId>,
}

pub struct Simulation<'a> {
    config: SystemConfig,
    faulty: BTreeSet<NodeId>,
    adversary: &'a mut dyn Adversary,
    rng: ChaCha8Rng,
    input: Bits,
    meter: TrafficMeter,
    trace: Vec<SlotRecord>,
    round: u32,
}

impl<'a> Simulation<'a> {
    pub fn new(
        config: &SystemConfig,
        source_input: Bits,
        adversary: &'a mut dyn Adversary,
    ) -> Result<Self, SimError> {
        let faulty = adversary.corrupt_set().clone();
        if faulty.len() > config.t() {
            return Err(SimError::TooManyCorrupt {
                size: faulty.len(),
                t: config.t(),
            });
        }
        if let Some(&bad) = faulty.iter().find(|v| !config.contains(**v)) {
            return Err(SimError::UnknownCorruptNode(bad));
        }
        Ok(Simulation {
            config: config.clone(),
            faulty,
            adversary,
            rng: ChaCha8Rng::seed_from_u64(config.seed()),
            input: source_input,
            meter: TrafficMeter::default(),
            trace: Vec::new(),
            round: 0,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn meter(&self) -> &TrafficMeter {
        &self.meter
    }

    /// Runs one synchronous round. All transmissions are chosen before any
    /// is delivered; the result is aligned with `outgoing`.
    pub fn round(
        &mut self,
        phase: Phase,
        coalescing: Coalescing,
        outgoing: Vec<Outgoing>,
    ) -> Result<Vec<Delivery>, SimError> {
        self.round += 1;
        let round = self.round;
        let honest_traffic: Vec<(NodeId, Step, Bits)> = outgoing
            .iter()
            .filter(|o| !self.faulty.contains(&o.sender))
            .map(|o| (o.sender, o.step, o.payload.clone()))
            .collect();

        let mut txs = Vec::with_capacity(outgoing.len());
        for (index, o) in outgoing.iter().enumerate() {
            let slot = SlotId {
                round,
                index: index as u32,
            };
            let payload = if self.faulty.contains(&o.sender) {
                let ctx = SlotContext {
                    config: &self.config,
                    phase,
                    slot,
                    step: o.step,
                    sender: o.sender,
                    honest_payload: &o.payload,
                    audience: &o.audience,
                    round_traffic: &honest_traffic,
                    source_input: &self.input,
                };
                self.adversary.transmit(&ctx, &mut self.rng)
            } else {
                Payload::Broadcast(o.payload.clone())
            };
            txs.push(SlotTransmission {
                sender: o.sender,
                payload,
                slot,
            });
        }

        let n = self.config.n();
        let mut deliveries = Vec::with_capacity(txs.len());
        for (tx, o) in txs.iter().zip(&outgoing) {
            let accounting = match coalescing {
                Coalescing::Broadcast => Accounting::Coalesced,
                Coalescing::Unicast => Accounting::PointToPoint(&o.audience),
            };
            let d = channel_deliver(tx, n, &self.faulty, phase, accounting, &mut self.meter)?;
            self.trace.push(SlotRecord::of(tx, phase));
            deliveries.push(d);
        }
        Ok(deliveries)
    }

    /// The value fault-free nodes hold for a decision that steers the
    /// shared schedule. Fault-free nodes must agree.
    pub fn common<T: Clone + PartialEq>(&self, per_node: &BTreeMap<NodeId, T>) -> Result<T, SimError> {
        let mut held = per_node
            .iter()
            .filter(|(v, _)| !self.faulty.contains(v))
            .map(|(_, x)| x);
        let first = held.next().ok_or(SimError::NoFaultFreeNode)?;
        if held.all(|x| x == first) {
            Ok(first.clone())
        } else {
            Err(SimError::Divergence)
        }
    }

    /// Drops entries of corrupted nodes.
    pub fn fault_free_only<T>(&self, per_node: BTreeMap<NodeId, T>) -> BTreeMap<NodeId, T> {
        per_node
            .into_iter()
            .filter(|(v, _)| !self.faulty.contains(v))
            .collect()
    }

    pub fn finish(self) -> SimRecord {
        SimRecord {
            meter: self.meter,
            trace: self.trace,
            corrupt: self.faulty,
        }
    }
}
