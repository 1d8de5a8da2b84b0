use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::sim::config::NodeId;

/// Publicly known pairs of nodes of which at least one is faulty.
///
/// A node in dispute with more than `t` others is identified as faulty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisputeGraph {
    t: usize,
    pairs: BTreeSet<(NodeId, NodeId)>,
    identified: BTreeSet<NodeId>,
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl DisputeGraph {
    pub fn new(t: usize) -> Self {
        DisputeGraph {
            t,
            pairs: BTreeSet::new(),
            identified: BTreeSet::new(),
        }
    }

    pub fn in_dispute(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.pairs.contains(&ordered(a, b))
    }

    /// Adds a pair; returns whether it was new. Self-pairs are ignored.
    pub fn insert(&mut self, a: NodeId, b: NodeId) -> bool {
        if a == b || !self.pairs.insert(ordered(a, b)) {
            return false;
        }
        for v in [a, b] {
            if self.degree(v) > self.t {
                self.identified.insert(v);
            }
        }
        true
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.pairs.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn identified_faulty(&self) -> &BTreeSet<NodeId> {
        &self.identified
    }

    pub fn is_identified(&self, v: NodeId) -> bool {
        self.identified.contains(&v)
    }

    /// Whether `a` disregards what `b` sends: they are in dispute or `b`
    /// has been identified as faulty.
    pub fn ignores(&self, a: NodeId, b: NodeId) -> bool {
        self.in_dispute(a, b) || self.is_identified(b)
    }

    /// Nodes among `all` not yet identified as faulty.
    pub fn active(&self, all: impl Iterator<Item = NodeId>) -> Vec<NodeId> {
        all.filter(|v| !self.is_identified(*v)).collect()
    }
}
