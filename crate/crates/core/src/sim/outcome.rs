use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::protocol::dispute::GenerationRecord;
use crate::sim::channel::SlotRecord;
use crate::sim::config::NodeId;
use crate::sim::disputes::DisputeGraph;
use crate::sim::meter::TrafficMeter;

/// Result of one Byzantine Broadcast execution.
#[derive(Debug, Clone)]
pub struct BbOutcome {
    pub n: usize,
    /// `y_i` of every fault-free node.
    pub outputs: BTreeMap<NodeId, Bits>,
    pub meter: TrafficMeter,
    pub dispute_graph: DisputeGraph,
    pub trace: Vec<SlotRecord>,
    /// Per-generation state; empty for the committee algorithm.
    pub generations: Vec<GenerationRecord>,
    pub dispute_control_invocations: usize,
    /// The adversary's corrupt set, for post-run checks.
    pub corrupt: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Termination,
    Consistency,
    Validity,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Termination => "termination",
            Property::Consistency => "consistency",
            Property::Validity => "validity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BbVerdict {
    Pass,
    Fail {
        property: Property,
        witnesses: Vec<NodeId>,
    },
}

impl BbVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, BbVerdict::Pass)
    }
}

/// Termination, consistency and validity of a finished run.
pub fn check_bb_properties(outcome: &BbOutcome, x: &Bits, faulty: &BTreeSet<NodeId>) -> BbVerdict {
    let fault_free: Vec<NodeId> = (1..=outcome.n as u16)
        .map(NodeId::new)
        .filter(|v| !faulty.contains(v))
        .collect();

    let missing: Vec<NodeId> = fault_free
        .iter()
        .copied()
        .filter(|v| !outcome.outputs.contains_key(v))
        .collect();
    if !missing.is_empty() {
        return BbVerdict::Fail {
            property: Property::Termination,
            witnesses: missing,
        };
    }

    let first = fault_free[0];
    let y = &outcome.outputs[&first];
    if let Some(&other) = fault_free[1..].iter().find(|v| &outcome.outputs[*v] != y) {
        return BbVerdict::Fail {
            property: Property::Consistency,
            witnesses: alloc::vec![first, other],
        };
    }

    if !faulty.contains(&NodeId::SOURCE) && y != x {
        return BbVerdict::Fail {
            property: Property::Validity,
            witnesses: alloc::vec![first],
        };
    }
    BbVerdict::Pass
}
