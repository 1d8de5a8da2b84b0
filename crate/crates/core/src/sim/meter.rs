use alloc::collections::BTreeMap;

use crate::sim::channel::Phase;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub messages: u64,
    pub bits: u64,
}

impl Counters {
    fn add(&mut self, messages: u64, bits: u64) {
        self.messages += messages;
        self.bits += bits;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCounters {
    pub honest: Counters,
    pub adversary: Counters,
}

/// Exact message and bit counts, split between nodes that follow the
/// protocol and nodes the adversary controls.
///
/// Only the honest side is algorithm complexity. Broadcasts count once;
/// selective transmissions count once per addressed receiver.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrafficMeter {
    honest: Counters,
    adversary: Counters,
    phases: BTreeMap<Phase, PhaseCounters>,
}

impl TrafficMeter {
    pub fn record(&mut self, phase: Phase, honest: bool, messages: u64, bits: u64) {
        let entry = self.phases.entry(phase).or_default();
        if honest {
            self.honest.add(messages, bits);
            entry.honest.add(messages, bits);
        } else {
            self.adversary.add(messages, bits);
            entry.adversary.add(messages, bits);
        }
    }

    pub fn honest(&self) -> Counters {
        self.honest
    }

    pub fn adversary(&self) -> Counters {
        self.adversary
    }

    pub fn phase(&self, phase: Phase) -> PhaseCounters {
        self.phases.get(&phase).copied().unwrap_or_default()
    }

    pub fn phases(&self) -> &BTreeMap<Phase, PhaseCounters> {
        &self.phases
    }
}
