//! Post-run checks that need the ground truth of who is corrupted.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::protocol::dispute::GenerationRecord;
use crate::sim::{BbOutcome, NodeId};

/// Findings for one run of the dispute-control protocol. Empty lists mean
/// the run behaved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    /// Generations where no fault-free peer detected yet fault-free peers
    /// disagree, or differ from the input of a fault-free source.
    pub dichotomy_violations: Vec<usize>,
    /// Dispute pairs with two fault-free members.
    pub fault_free_pairs: Vec<(NodeId, NodeId)>,
    /// Generations whose dispute control followed a fault-free detection
    /// yet found no new pair.
    pub stalled_invocations: Vec<usize>,
    /// Fault-free peers left with fewer than `n - 2t` symbols.
    pub underfull: Vec<(usize, NodeId)>,
    pub invocations: usize,
    pub invocation_cap: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.dichotomy_violations.is_empty()
            && self.fault_free_pairs.is_empty()
            && self.stalled_invocations.is_empty()
            && self.underfull.is_empty()
            && self.invocations <= self.invocation_cap
    }
}

/// Either a fault-free peer detected, or all fault-free peers hold the same
/// block, which is the source's block when the source is fault-free.
pub fn dichotomy_holds(record: &GenerationRecord, faulty: &BTreeSet<NodeId>) -> bool {
    if record.source_excluded {
        return true;
    }
    let mut fault_free = record.resolutions.iter().filter(|(v, _)| !faulty.contains(v));
    if record.resolutions.iter().any(|(v, r)| !faulty.contains(v) && r.detected) {
        return true;
    }
    let Some((_, first)) = fault_free.next() else {
        return true;
    };
    if !fault_free.all(|(_, r)| r.z == first.z) {
        return false;
    }
    faulty.contains(&NodeId::SOURCE) || first.z == record.input_block
}

pub fn audit_dispute_run(outcome: &BbOutcome, t: usize) -> AuditReport {
    let faulty = &outcome.corrupt;
    let mut report = AuditReport {
        invocations: outcome.dispute_control_invocations,
        invocation_cap: t * (t + 1),
        ..AuditReport::default()
    };
    for rec in &outcome.generations {
        if !dichotomy_holds(rec, faulty) {
            report.dichotomy_violations.push(rec.generation);
        }
        for (&v, r) in &rec.resolutions {
            if r.underfull && !faulty.contains(&v) {
                report.underfull.push((rec.generation, v));
            }
        }
        let ff_detected = rec
            .resolutions
            .iter()
            .any(|(v, r)| r.detected && !faulty.contains(v));
        if let Some(dc) = &rec.dispute_control {
            if ff_detected && dc.new_pairs.is_empty() {
                report.stalled_invocations.push(rec.generation);
            }
        }
    }
    report.fault_free_pairs = outcome
        .dispute_graph
        .pairs()
        .filter(|(a, b)| !faulty.contains(a) && !faulty.contains(b))
        .collect();
    report
}
