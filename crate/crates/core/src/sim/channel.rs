//! The synchronous selective-broadcast channel.
//!
//! A fault-free sender can only broadcast: every other node receives the
//! same string. A faulty sender may instead hand each receiver its own
//! string in the same slot. Deliveries are reliable, collision-free and
//! always attributed to the true sender.

use alloc::collections::{BTreeMap, BTreeSet};
use core::fmt;

use thiserror::Error;

use crate::bits::Bits;
use crate::sim::config::NodeId;
use crate::sim::meter::TrafficMeter;

/// Protocol phase a slot belongs to. Used for metering and traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// Detectable Broadcast.
    Db,
    /// Detection Dissemination.
    Dd,
    /// Dispute Control.
    Dc,
    /// Committee algorithm: source broadcast.
    Src,
    /// Committee algorithm: consensus among the active nodes.
    Core,
    /// Committee algorithm: announcements to passive nodes.
    Ann,
    /// Stand-alone baseline broadcast.
    Eig,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::Db,
        Phase::Dd,
        Phase::Dc,
        Phase::Src,
        Phase::Core,
        Phase::Ann,
        Phase::Eig,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Phase::Db => "DB",
            Phase::Dd => "DD",
            Phase::Dc => "DC",
            Phase::Src => "SRC",
            Phase::Core => "CORE",
            Phase::Ann => "ANN",
            Phase::Eig => "EIG",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.tag() == tag)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// One string to everybody. The empty string is silence.
    Broadcast(Bits),
    /// Per-receiver strings; receivers left out hear nothing.
    Selective(BTreeMap<NodeId, Bits>),
}

impl Payload {
    pub fn silence() -> Self {
        Payload::Broadcast(Bits::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId {
    pub round: u32,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTransmission {
    pub sender: NodeId,
    pub payload: Payload,
    pub slot: SlotId,
}

/// How a fault-free sender's transmission is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accounting<'a> {
    /// One message per broadcast.
    Coalesced,
    /// Point-to-point emulation: one copy per listed receiver.
    PointToPoint(&'a [NodeId]),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("fault-free {0} attempted a selective transmission")]
    SelectiveFromFaultFree(NodeId),
    #[error("{sender} addressed invalid receiver {receiver}")]
    BadReceiver { sender: NodeId, receiver: NodeId },
    #[error("sender {0} is not a node of this system")]
    UnknownSender(NodeId),
}

/// What each receiver got in one slot: `(sender, payload)`.
pub type Delivery = BTreeMap<NodeId, (NodeId, Bits)>;

/// Delivers one slot transmission and updates the meter.
///
/// Every node other than the sender receives exactly one attributed
/// string; for a selective payload, receivers not addressed get the empty
/// string.
pub fn channel_deliver(
    tx: &SlotTransmission,
    n: usize,
    faulty: &BTreeSet<NodeId>,
    phase: Phase,
    accounting: Accounting<'_>,
    meter: &mut TrafficMeter,
) -> Result<Delivery, ChannelError> {
    let sender = tx.sender;
    if sender.get() == 0 || usize::from(sender.get()) > n {
        return Err(ChannelError::UnknownSender(sender));
    }
    let honest = !faulty.contains(&sender);
    let receivers = (1..=n as u16).map(NodeId::new).filter(|&r| r != sender);
    match &tx.payload {
        Payload::Broadcast(bits) => {
            if !bits.is_empty() {
                let copies = match accounting {
                    Accounting::PointToPoint(to) if honest => {
                        to.iter().filter(|&&r| r != sender).count() as u64
                    }
                    _ => 1,
                };
                meter.record(phase, honest, copies, copies * bits.len() as u64);
            }
            Ok(receivers.map(|r| (r, (sender, bits.clone()))).collect())
        }
        Payload::Selective(map) => {
            if honest {
                return Err(ChannelError::SelectiveFromFaultFree(sender));
            }
            if let Some(&bad) = map
                .keys()
                .find(|&&r| r == sender || r.get() == 0 || usize::from(r.get()) > n)
            {
                return Err(ChannelError::BadReceiver {
                    sender,
                    receiver: bad,
                });
            }
            let (msgs, bits) = map
                .values()
                .filter(|b| !b.is_empty())
                .fold((0u64, 0u64), |(m, b), p| (m + 1, b + p.len() as u64));
            if msgs > 0 {
                meter.record(phase, false, msgs, bits);
            }
            Ok(receivers
                .map(|r| (r, (sender, map.get(&r).cloned().unwrap_or_default())))
                .collect())
        }
    }
}

/// Kind column of a trace line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Broadcast,
    Selective,
    Silent,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::Broadcast => "broadcast",
            SlotKind::Selective => "selective",
            SlotKind::Silent => "silent",
        }
    }
}

/// One line of the phase trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRecord {
    pub round: u32,
    pub slot: u32,
    pub sender: NodeId,
    pub kind: SlotKind,
    /// Bytes put on the channel; per-receiver strings are summed.
    pub bytes: usize,
    pub bits: usize,
    pub phase: Phase,
}

impl SlotRecord {
    pub fn of(tx: &SlotTransmission, phase: Phase) -> Self {
        let (kind, bytes, bits) = match &tx.payload {
            Payload::Broadcast(b) if b.is_empty() => (SlotKind::Silent, 0, 0),
            Payload::Broadcast(b) => (SlotKind::Broadcast, b.byte_len(), b.len()),
            Payload::Selective(m) => {
                let bytes = m.values().map(Bits::byte_len).sum();
                let bits = m.values().map(Bits::len).sum();
                (SlotKind::Selective, bytes, bits)
            }
        };
        SlotRecord {
            round: tx.slot.round,
            slot: tx.slot.index,
            sender: tx.sender,
            kind,
            bytes,
            bits,
            phase,
        }
    }
}
