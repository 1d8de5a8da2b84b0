//! Byzantine strategies.
//!
//! A strategy owns a fixed corrupt set and, for every slot scheduled for a
//! corrupted node, picks what actually goes on the channel. It sees the
//! payload the node would send if it were honest, the step being executed,
//! the source's input and the fault-free traffic of the round.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::Bits;
use crate::protocol::dispute::Claim;
use crate::sim::{EigPurpose, NodeId, Payload, SlotContext, Step, SystemConfig};

pub trait Adversary {
    fn corrupt_set(&self) -> &BTreeSet<NodeId>;

    /// Transmission of a corrupted sender for one slot.
    fn transmit(&mut self, ctx: &SlotContext<'_>, rng: &mut ChaCha8Rng) -> Payload;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(alloc::string::String),
    #[error("corrupt set of size {size} exceeds t = {t}")]
    TooManyCorrupt { size: usize, t: usize },
    #[error("corrupt set names {0}, which is not a node")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Honest,
    /// Corrupted nodes never transmit.
    CrashSilent,
    /// The source sends one value to the first half of each audience and a
    /// different one to the rest whenever it originates a value.
    EquivocatingSource,
    /// Peers flip a bit of their coded symbol, for the lowest-numbered
    /// receiver only or for everyone.
    SymbolCorruptor { all_receivers: bool },
    /// Detection flags are announced as 1 to half the audience and truthfully
    /// to the rest.
    DetectionLiar,
    /// Claims to have detected, then lies about the block it received.
    ClaimLiar,
    /// Every slot is silent, honest, random or split per receiver.
    RandomizedByzantine { seed: u64 },
}

/// A strategy and, optionally, an explicit corrupt set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub corrupt: Option<Vec<NodeId>>,
}

pub const STRATEGY_NAMES: [&str; 7] = [
    "honest",
    "crash_silent",
    "equivocating_source",
    "symbol_corruptor",
    "detection_liar",
    "claim_liar",
    "randomized_byzantine",
];

impl StrategySpec {
    pub fn new(kind: StrategyKind) -> Self {
        StrategySpec { kind, corrupt: None }
    }

    pub fn with_corrupt(mut self, corrupt: impl IntoIterator<Item = NodeId>) -> Self {
        self.corrupt = Some(corrupt.into_iter().collect());
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            StrategyKind::Honest => "honest",
            StrategyKind::CrashSilent => "crash_silent",
            StrategyKind::EquivocatingSource => "equivocating_source",
            StrategyKind::SymbolCorruptor { .. } => "symbol_corruptor",
            StrategyKind::DetectionLiar => "detection_liar",
            StrategyKind::ClaimLiar => "claim_liar",
            StrategyKind::RandomizedByzantine { .. } => "randomized_byzantine",
        }
    }

    /// Strategy with default parameters. `seed` only matters for the
    /// randomized strategy.
    pub fn from_name(name: &str, seed: u64) -> Result<Self, AdversaryError> {
        let kind = match name {
            "honest" => StrategyKind::Honest,
            "crash_silent" => StrategyKind::CrashSilent,
            "equivocating_source" => StrategyKind::EquivocatingSource,
            "symbol_corruptor" => StrategyKind::SymbolCorruptor { all_receivers: false },
            "detection_liar" => StrategyKind::DetectionLiar,
            "claim_liar" => StrategyKind::ClaimLiar,
            "randomized_byzantine" => StrategyKind::RandomizedByzantine { seed },
            other => return Err(AdversaryError::UnknownStrategy(other.into())),
        };
        Ok(StrategySpec::new(kind))
    }

    /// The explicit corrupt set, or the strategy's default for `config`:
    /// nobody for `honest`, the source for `equivocating_source`, `t`
    /// seeded random nodes for `randomized_byzantine` and the `t`
    /// highest-numbered nodes otherwise.
    pub fn corrupt_set(&self, config: &SystemConfig) -> Result<BTreeSet<NodeId>, AdversaryError> {
        let t = config.t();
        let n = config.n() as u16;
        let set: BTreeSet<NodeId> = match (&self.corrupt, self.kind) {
            (Some(explicit), _) => explicit.iter().copied().collect(),
            (None, StrategyKind::Honest) => BTreeSet::new(),
            (None, StrategyKind::EquivocatingSource) => {
                if t == 0 {
                    BTreeSet::new()
                } else {
                    [NodeId::SOURCE].into()
                }
            }
            (None, StrategyKind::RandomizedByzantine { seed }) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                sample(&mut rng, config.n(), t)
                    .into_iter()
                    .map(|i| NodeId::new(i as u16 + 1))
                    .collect()
            }
            (None, _) => (n - t as u16 + 1..=n).map(NodeId::new).collect(),
        };
        if set.len() > t {
            return Err(AdversaryError::TooManyCorrupt { size: set.len(), t });
        }
        if let Some(&bad) = set.iter().find(|v| !config.contains(**v)) {
            return Err(AdversaryError::UnknownNode(bad));
        }
        Ok(set)
    }

    pub fn build(&self, config: &SystemConfig) -> Result<Strategy, AdversaryError> {
        Ok(Strategy {
            kind: self.kind,
            corrupt: self.corrupt_set(config)?,
        })
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One spec per catalog strategy with default parameters.
pub fn strategy_catalog(seed: u64) -> Vec<StrategySpec> {
    STRATEGY_NAMES
        .iter()
        .map(|name| StrategySpec::from_name(name, seed).expect("catalog name"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Strategy {
    kind: StrategyKind,
    corrupt: BTreeSet<NodeId>,
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        self.kind
    }
}

/// `u` rotated left by `shift` bits, with the last bit flipped if that
/// leaves it unchanged. Differs from `u` whenever `u` is non-empty.
pub fn alternative(u: &Bits, shift: usize) -> Bits {
    let len = u.len();
    if len == 0 {
        return u.clone();
    }
    let mut v: Bits = (0..len).map(|i| u.get((i + shift) % len).unwrap_or(false)).collect();
    if &v == u {
        v.flip(len - 1);
    }
    v
}

fn split_audience(audience: &[NodeId], first: &Bits, rest: &Bits) -> Payload {
    let half = audience.len().div_ceil(2);
    Payload::Selective(
        audience
            .iter()
            .enumerate()
            .map(|(k, &r)| (r, if k < half { first.clone() } else { rest.clone() }))
            .collect(),
    )
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Bits {
    (0..len).map(|_| rng.random::<bool>()).collect()
}

fn flip_last(b: &Bits) -> Bits {
    let mut out = b.clone();
    if !out.is_empty() {
        out.flip(out.len() - 1);
    }
    out
}

impl Strategy {
    fn equivocate(ctx: &SlotContext<'_>) -> Payload {
        let originates = ctx.step.is_origination(ctx.sender)
            && match ctx.step {
                Step::DbSource { .. } | Step::CommitteeSource => true,
                Step::Eig { purpose, .. } => matches!(
                    purpose,
                    EigPurpose::SourceValue | EigPurpose::Consensus | EigPurpose::Standalone
                ),
                _ => false,
            };
        if !originates || !ctx.sender.is_source() {
            return Payload::Broadcast(ctx.honest_payload.clone());
        }
        let u = ctx.honest_payload;
        let v = alternative(u, usize::from(ctx.config.symbol_bits()));
        split_audience(ctx.audience, u, &v)
    }

    fn corrupt_symbol(ctx: &SlotContext<'_>, all_receivers: bool) -> Payload {
        let u = ctx.honest_payload;
        if !matches!(ctx.step, Step::DbRelay { .. }) || u.is_empty() {
            return Payload::Broadcast(u.clone());
        }
        let bad = flip_last(u);
        if all_receivers {
            return Payload::Broadcast(bad);
        }
        let victim = ctx.audience.iter().copied().find(|r| !r.is_source());
        Payload::Selective(
            ctx.audience
                .iter()
                .map(|&r| (r, if Some(r) == victim { bad.clone() } else { u.clone() }))
                .collect(),
        )
    }

    fn lie_about_detection(ctx: &SlotContext<'_>) -> Payload {
        match ctx.step {
            Step::Eig {
                purpose: EigPurpose::Detection,
                ..
            } if ctx.step.is_origination(ctx.sender) => {
                let one: Bits = core::iter::once(true).collect();
                split_audience(ctx.audience, &one, ctx.honest_payload)
            }
            _ => Payload::Broadcast(ctx.honest_payload.clone()),
        }
    }

    fn lie_in_claim(ctx: &SlotContext<'_>) -> Payload {
        let honest = ctx.honest_payload;
        if !ctx.step.is_origination(ctx.sender) {
            return Payload::Broadcast(honest.clone());
        }
        match ctx.step {
            Step::Eig {
                purpose: EigPurpose::Detection,
                ..
            } => Payload::Broadcast(core::iter::once(true).collect()),
            Step::Eig {
                purpose: EigPurpose::Claim,
                ..
            } => {
                let code = ctx.config.code();
                let Some(mut claim) = Claim::decode(honest, &code) else {
                    return Payload::Broadcast(honest.clone());
                };
                let mask = (1u32 << ctx.config.symbol_bits()) - 1;
                match &mut claim.block {
                    Some(block) => {
                        let mut symbols = block.symbols().to_vec();
                        symbols[0] = ((u32::from(symbols[0]) + 1) & mask) as u16;
                        *block = code.data_block(symbols).expect("symbols in range");
                    }
                    None => {
                        let pos = (1..=claim.view.len()).find(|&j| claim.view.get(j).is_some());
                        if let Some(j) = pos {
                            let s = claim.view.get(j).expect("present");
                            claim.view.set(j, Some(s ^ 1));
                        }
                    }
                }
                Payload::Broadcast(claim.encode(&code))
            }
            _ => Payload::Broadcast(honest.clone()),
        }
    }

    fn randomize(ctx: &SlotContext<'_>, rng: &mut ChaCha8Rng) -> Payload {
        let honest = ctx.honest_payload;
        let len = if rng.random_ratio(1, 8) {
            rng.random_range(0..=honest.len() + 2)
        } else {
            honest.len()
        };
        match rng.random_range(0..4u8) {
            0 => Payload::silence(),
            1 => Payload::Broadcast(honest.clone()),
            2 => Payload::Broadcast(random_bits(rng, len)),
            _ => {
                let per: BTreeMap<NodeId, Bits> = ctx
                    .audience
                    .iter()
                    .map(|&r| {
                        let b = match rng.random_range(0..4u8) {
                            0 => honest.clone(),
                            1 => random_bits(rng, len),
                            2 => flip_last(honest),
                            _ => Bits::new(),
                        };
                        (r, b)
                    })
                    .collect();
                Payload::Selective(per)
            }
        }
    }
}

impl Adversary for Strategy {
    fn corrupt_set(&self) -> &BTreeSet<NodeId> {
        &self.corrupt
    }

    fn transmit(&mut self, ctx: &SlotContext<'_>, rng: &mut ChaCha8Rng) -> Payload {
        match self.kind {
            StrategyKind::Honest => Payload::Broadcast(ctx.honest_payload.clone()),
            StrategyKind::CrashSilent => Payload::silence(),
            StrategyKind::EquivocatingSource => Self::equivocate(ctx),
            StrategyKind::SymbolCorruptor { all_receivers } => Self::corrupt_symbol(ctx, all_receivers),
            StrategyKind::DetectionLiar => Self::lie_about_detection(ctx),
            StrategyKind::ClaimLiar => Self::lie_in_claim(ctx),
            StrategyKind::RandomizedByzantine { .. } => Self::randomize(ctx, rng),
        }
    }
}
