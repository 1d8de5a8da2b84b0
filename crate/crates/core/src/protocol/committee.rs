//! Committee broadcast for message complexity independent of `n`.
//!
//! The source broadcasts its value once. The `3t + 1` lowest-numbered
//! nodes then reach consensus on what they heard: each runs a baseline
//! broadcast of its copy among the committee, and every member decides the
//! strict majority of the `3t + 1` agreed copies (all zeros if there is
//! none). Finally `2t + 1` members announce the decision and every other
//! node takes the value announced at least `t + 1` times. Nodes outside
//! the committee never transmit.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::adversary::{Adversary, StrategySpec};
use crate::bits::Bits;
use crate::protocol::eig::{run_eig_batch, strict_majority, EigInstance, EigParams};
use crate::protocol::ProtocolError;
use crate::sim::{BbOutcome, Coalescing, DisputeGraph, EigPurpose, NodeId, Outgoing, Phase, Simulation, Step, SystemConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitteeError {
    #[error("expected {expected} announcements, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("no announced value reaches {needed} copies")]
    NoMajority { needed: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitteeLayout {
    pub active: Vec<NodeId>,
    pub announcers: Vec<NodeId>,
    pub passive: Vec<NodeId>,
}

impl CommitteeLayout {
    /// Requires `n >= 3t + 1`.
    pub fn new(n: usize, t: usize) -> Self {
        assert!(n > 3 * t, "committee needs n >= 3t + 1");
        let all: Vec<NodeId> = (1..=n as u16).map(NodeId::new).collect();
        let (active, passive) = all.split_at(3 * t + 1);
        CommitteeLayout {
            active: active.to_vec(),
            announcers: active[..2 * t + 1].to_vec(),
            passive: passive.to_vec(),
        }
    }
}

/// The value appearing at least `t + 1` times among `2t + 1` announcements.
pub fn majority_vote(values: &[Bits], t: usize) -> Result<Bits, CommitteeError> {
    if values.len() != 2 * t + 1 {
        return Err(CommitteeError::WrongCount {
            expected: 2 * t + 1,
            got: values.len(),
        });
    }
    let mut counts: BTreeMap<&Bits, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .find(|&(_, c)| c > t)
        .map(|(v, _)| v.clone())
        .ok_or(CommitteeError::NoMajority { needed: t + 1 })
}

pub fn run_algorithm2(
    x: &Bits,
    config: &SystemConfig,
    strategy: &StrategySpec,
) -> Result<BbOutcome, ProtocolError> {
    let mut adversary = strategy.build(config)?;
    run_algorithm2_with(x, config, &mut adversary, Coalescing::Broadcast)
}

/// `coalescing` applies to the consensus core only; `Unicast` charges
/// fault-free core traffic as point-to-point messages.
pub fn run_algorithm2_with(
    x: &Bits,
    config: &SystemConfig,
    adversary: &mut dyn Adversary,
    coalescing: Coalescing,
) -> Result<BbOutcome, ProtocolError> {
    if x.len() != config.input_bits() {
        return Err(ProtocolError::InputLength {
            expected: config.input_bits(),
            got: x.len(),
        });
    }
    let t = config.t();
    let len = x.len();
    let layout = CommitteeLayout::new(config.n(), t);
    let source = NodeId::SOURCE;
    let mut sim = Simulation::new(config, x.clone(), adversary)?;

    let src = sim.round(
        Phase::Src,
        Coalescing::Broadcast,
        alloc::vec![Outgoing {
            sender: source,
            step: Step::CommitteeSource,
            payload: x.clone(),
            audience: config.peers().collect(),
        }],
    )?;
    let heard = |v: NodeId| -> Bits {
        if v.is_source() {
            return x.clone();
        }
        let got = &src[0][&v].1;
        if got.len() == len {
            got.clone()
        } else {
            Bits::zeros(len)
        }
    };

    let instances: Vec<EigInstance> = layout
        .active
        .iter()
        .map(|&v| EigInstance {
            purpose: EigPurpose::Consensus,
            generation: 0,
            origin: v,
            value: heard(v),
        })
        .collect();
    let agreed = run_eig_batch(
        &mut sim,
        EigParams {
            participants: &layout.active,
            faults: t,
            width: len,
            phase: Phase::Core,
            coalescing,
        },
        &instances,
    )?;
    let decisions: BTreeMap<NodeId, Bits> = layout
        .active
        .iter()
        .map(|&v| {
            let copies: Vec<&Bits> = agreed.iter().map(|per| &per[&v]).collect();
            (v, strict_majority(&copies).unwrap_or_else(|| Bits::zeros(len)))
        })
        .collect();

    let mut outputs = decisions.clone();
    if !layout.passive.is_empty() {
        let announcements = layout
            .announcers
            .iter()
            .map(|&a| Outgoing {
                sender: a,
                step: Step::Announce,
                payload: decisions[&a].clone(),
                audience: layout.passive.clone(),
            })
            .collect();
        let heard = sim.round(Phase::Ann, Coalescing::Broadcast, announcements)?;
        let mut votes = BTreeMap::new();
        for &v in &layout.passive {
            let values: Vec<Bits> = heard.iter().map(|d| d[&v].1.clone()).collect();
            votes.insert(v, majority_vote(&values, t));
        }
        for (v, vote) in sim.fault_free_only(votes) {
            outputs.insert(v, vote?);
        }
    }

    let outputs = sim.fault_free_only(outputs);
    let rec = sim.finish();
    Ok(BbOutcome {
        n: config.n(),
        outputs,
        meter: rec.meter,
        dispute_graph: DisputeGraph::new(t),
        trace: rec.trace,
        generations: Vec::new(),
        dispute_control_invocations: 0,
        corrupt: rec.corrupt,
    })
}
