//! Exponential information gathering: the `f + 1`-round oral-messages
//! Byzantine Broadcast for `|participants| > 3f`, run on the selective
//! channel.
//!
//! Every relay round of a fault-free node carries the same content to all
//! receivers, so it goes out as one broadcast: the concatenation of the
//! node's current tree level. Decisions resolve bottom-up by strict
//! majority, falling back to the all-zeros string.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::bits::Bits;
use crate::sim::{Coalescing, EigPurpose, NodeId, Outgoing, Phase, SimError, Simulation, Step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EigError {
    #[error("{participants} participants cannot tolerate {faults} faults")]
    TooFewParticipants { participants: usize, faults: usize },
    #[error("origin {0} is not a participant")]
    OriginNotParticipant(NodeId),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One broadcast to run: `origin` disseminates `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigInstance {
    pub purpose: EigPurpose,
    pub generation: usize,
    pub origin: NodeId,
    pub value: Bits,
}

/// Parameters shared by a batch of instances run in lockstep.
#[derive(Debug, Clone, Copy)]
pub struct EigParams<'p> {
    pub participants: &'p [NodeId],
    pub faults: usize,
    pub width: usize,
    pub phase: Phase,
    pub coalescing: Coalescing,
}

type Label = Vec<NodeId>;

/// Labels of the tree, level by level. Level `r` holds the sequences of
/// `r + 1` distinct participants starting at the origin.
#[derive(Debug, Clone)]
pub struct LabelTree {
    levels: Vec<Vec<Label>>,
    /// `children[r][i]`: indices in level `r + 1` of `levels[r][i]` extended
    /// by each participant not already in it.
    children: Vec<Vec<Vec<usize>>>,
    /// `relays[r][j]`: (entry, child) pairs of level `r` relayed by the
    /// `j`-th participant.
    relays: Vec<Vec<Vec<(usize, usize)>>>,
}

impl LabelTree {
    pub fn new(origin: NodeId, participants: &[NodeId], faults: usize) -> Self {
        let mut levels: Vec<Vec<Label>> = alloc::vec![alloc::vec![alloc::vec![origin]]];
        let mut children = Vec::new();
        let mut relays = Vec::new();
        for _ in 0..faults {
            let prev = levels.last().expect("root level");
            let mut next = Vec::new();
            let mut kids = Vec::with_capacity(prev.len());
            let mut relay = alloc::vec![Vec::new(); participants.len()];
            for (i, sigma) in prev.iter().enumerate() {
                let mut mine = Vec::new();
                for (pos, &j) in participants.iter().enumerate() {
                    if sigma.contains(&j) {
                        continue;
                    }
                    let mut l = sigma.clone();
                    l.push(j);
                    relay[pos].push((i, next.len()));
                    mine.push(next.len());
                    next.push(l);
                }
                kids.push(mine);
            }
            children.push(kids);
            relays.push(relay);
            levels.push(next);
        }
        LabelTree {
            levels,
            children,
            relays,
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, r: usize) -> &[Label] {
        &self.levels[r]
    }

    /// Recursive majority over one node's gathered values.
    pub fn resolve(&self, mut values: Vec<Vec<Bits>>, width: usize) -> Bits {
        values.truncate(self.depth());
        let mut below = values.pop().expect("root level");
        for r in (0..self.depth() - 1).rev() {
            below = self.children[r]
                .iter()
                .map(|kids| {
                    majority(kids.iter().map(|&c| &below[c]), kids.len())
                        .unwrap_or_else(|| Bits::zeros(width))
                })
                .collect();
        }
        below.swap_remove(0)
    }
}

/// The value held by more than half of `values`, if any.
pub fn strict_majority(values: &[&Bits]) -> Option<Bits> {
    majority(values.iter().copied(), values.len())
}

// Boyer-Moore vote, then confirm the candidate.
fn majority<'a, I>(values: I, len: usize) -> Option<Bits>
where
    I: Iterator<Item = &'a Bits> + Clone,
{
    let mut candidate: Option<&Bits> = None;
    let mut lead = 0usize;
    for v in values.clone() {
        if lead == 0 {
            candidate = Some(v);
            lead = 1;
        } else if candidate == Some(v) {
            lead += 1;
        } else {
            lead -= 1;
        }
    }
    let c = candidate?;
    let count = values.filter(|&v| v == c).count();
    (2 * count > len).then(|| c.clone())
}

fn fit(value: &Bits, width: usize) -> Bits {
    if value.len() == width {
        value.clone()
    } else {
        (0..width).map(|i| value.get(i).unwrap_or(false)).collect()
    }
}

fn split(payload: &Bits, entries: usize, width: usize) -> Vec<Bits> {
    if payload.len() == entries * width {
        (0..entries)
            .map(|k| payload.slice(k * width, width).expect("length checked"))
            .collect()
    } else {
        alloc::vec![Bits::zeros(width); entries]
    }
}

/// Runs `instances` side by side. Returns, per instance, the decision of
/// every participant.
pub fn run_eig_batch(
    sim: &mut Simulation<'_>,
    params: EigParams<'_>,
    instances: &[EigInstance],
) -> Result<Vec<BTreeMap<NodeId, Bits>>, EigError> {
    let EigParams {
        participants,
        faults,
        width,
        phase,
        coalescing,
    } = params;
    if participants.len() < 3 * faults + 1 {
        return Err(EigError::TooFewParticipants {
            participants: participants.len(),
            faults,
        });
    }
    if let Some(bad) = instances.iter().find(|i| !participants.contains(&i.origin)) {
        return Err(EigError::OriginNotParticipant(bad.origin));
    }
    let audience_of = |s: NodeId| -> Vec<NodeId> {
        participants.iter().copied().filter(|&v| v != s).collect()
    };

    let trees: Vec<LabelTree> = instances
        .iter()
        .map(|inst| LabelTree::new(inst.origin, participants, faults))
        .collect();
    // state[instance][node] = values per level; every entry below the root
    // is written exactly once by its relay round
    let mut state: Vec<BTreeMap<NodeId, Vec<Vec<Bits>>>> = trees
        .iter()
        .map(|tree| {
            participants
                .iter()
                .map(|&v| {
                    let levels = (0..tree.depth())
                        .map(|r| alloc::vec![Bits::new(); tree.level(r).len()])
                        .collect();
                    (v, levels)
                })
                .collect()
        })
        .collect();

    // Round 1: origins send their values.
    let outgoing: Vec<Outgoing> = instances
        .iter()
        .map(|inst| Outgoing {
            sender: inst.origin,
            step: Step::Eig {
                purpose: inst.purpose,
                generation: inst.generation,
                origin: inst.origin,
                level: 0,
            },
            payload: fit(&inst.value, width),
            audience: audience_of(inst.origin),
        })
        .collect();
    let deliveries = sim.round(phase, coalescing, outgoing)?;
    for (k, inst) in instances.iter().enumerate() {
        for &v in participants {
            let value = if v == inst.origin {
                fit(&inst.value, width)
            } else {
                let got = &deliveries[k][&v].1;
                if got.len() == width {
                    got.clone()
                } else {
                    Bits::zeros(width)
                }
            };
            state[k].get_mut(&v).expect("participant")[0][0] = value;
        }
    }

    // Rounds 2..=faults+1: relay level r into level r + 1.
    for r in 0..faults {
        let mut outgoing = Vec::new();
        let mut slots = Vec::new();
        for (k, inst) in instances.iter().enumerate() {
            for (pos, &j) in participants.iter().enumerate() {
                let entries = &trees[k].relays[r][pos];
                if entries.is_empty() {
                    continue;
                }
                let mine = &state[k][&j][r];
                let mut payload = Bits::new();
                for &(i, _) in entries {
                    payload.extend_from(&mine[i]);
                }
                outgoing.push(Outgoing {
                    sender: j,
                    step: Step::Eig {
                        purpose: inst.purpose,
                        generation: inst.generation,
                        origin: inst.origin,
                        level: r + 1,
                    },
                    payload,
                    audience: audience_of(j),
                });
                slots.push((k, j, pos));
            }
        }
        let deliveries = sim.round(phase, coalescing, outgoing)?;
        for ((k, j, pos), delivery) in slots.into_iter().zip(deliveries) {
            let entries = &trees[k].relays[r][pos];
            for &v in participants {
                let values: Vec<Bits> = if v == j {
                    entries.iter().map(|&(i, _)| state[k][&j][r][i].clone()).collect()
                } else {
                    split(&delivery[&v].1, entries.len(), width)
                };
                let node = state[k].get_mut(&v).expect("participant");
                for (&(_, child), value) in entries.iter().zip(values) {
                    node[r + 1][child] = value;
                }
            }
        }
    }

    Ok(trees
        .iter()
        .zip(state)
        .map(|(tree, nodes)| {
            nodes
                .into_iter()
                .map(|(v, values)| (v, tree.resolve(values, width)))
                .collect()
        })
        .collect())
}

/// A single broadcast from `source` among `participants`.
pub fn eig_broadcast(
    sim: &mut Simulation<'_>,
    source: NodeId,
    value: &Bits,
    participants: &[NodeId],
    faults: usize,
    coalescing: Coalescing,
) -> Result<BTreeMap<NodeId, Bits>, EigError> {
    let params = EigParams {
        participants,
        faults,
        width: value.len(),
        phase: Phase::Eig,
        coalescing,
    };
    let inst = EigInstance {
        purpose: EigPurpose::Standalone,
        generation: 0,
        origin: source,
        value: value.clone(),
    };
    Ok(run_eig_batch(sim, params, &[inst])?.swap_remove(0))
}
