//! Byzantine Broadcast of an `L`-bit value in `L / D` generations.
//!
//! Each generation runs three phases:
//!
//! 1. **Detectable Broadcast.** The source broadcasts its `D`-bit block.
//!    Every peer not in dispute with the source encodes the block with the
//!    `(n, n - 2t)` Reed-Solomon code and broadcasts its own coded symbol.
//!    Each peer collects one symbol per position, nulling positions it is in
//!    dispute with, and checks that a single codeword explains them all.
//!    A peer whose view is inconsistent has *detected* misbehavior and
//!    falls back to the all-zeros block.
//! 2. **Detection Dissemination.** Every active node runs a 1-bit baseline
//!    broadcast of its detection flag. If all agreed flags are zero, each
//!    peer outputs the block it decoded.
//! 3. **Dispute Control.** Otherwise the source broadcasts its block with
//!    the baseline protocol, which every node outputs, and each peer
//!    broadcasts a claim: the block it got from the source and its view.
//!    From the agreed claims every node derives the same set of new
//!    dispute pairs, each containing at least one faulty node.
//!
//! A node in dispute with more than `t` others is identified as faulty and
//! excluded from all later generations; if that node is the source, the
//! remaining generations output the all-zeros block.
//!
//! Pair derivation, given the agreed source block `X`:
//! * a peer claiming a source block other than `X` is paired with the source;
//! * a peer `j` whose claimed symbol for position `i` differs from the
//!   encoding of `i`'s claimed block is paired with `i`;
//! * a node whose claim is malformed, self-inconsistent, or disagrees with
//!   the detection flag it announced is paired with the lowest active node
//!   it is not yet in dispute with.
//!
//! The last rule guarantees that every invocation yields at least one new
//! pair, so dispute control runs at most `t(t + 1)` times.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::adversary::{Adversary, StrategySpec};
use crate::bits::Bits;
use crate::protocol::eig::{run_eig_batch, EigInstance, EigParams};
use crate::protocol::ProtocolError;
use crate::rs::{CodeError, Codeword, Consistency, DataBlock, PartialView, RsCode};
use crate::sim::{
    BbOutcome, Coalescing, DisputeGraph, EigPurpose, NodeId, Outgoing, Phase,
    Simulation, Step, SystemConfig,
};

/// What one peer ended Detectable Broadcast with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeResolution {
    pub z: DataBlock,
    pub detected: bool,
    /// The view had fewer than `n - 2t` symbols. Never happens to a
    /// fault-free node.
    pub underfull: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisputeControlRecord {
    pub agreed_value: DataBlock,
    pub new_pairs: Vec<(NodeId, NodeId)>,
}

/// Per-generation state kept for inspection. Entries of corrupted nodes
/// are what they would hold had they followed the protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecord {
    /// 1-based generation index.
    pub generation: usize,
    pub input_block: DataBlock,
    /// The source was already identified as faulty; defaults were output.
    pub source_excluded: bool,
    /// Block each active peer took from the source; `None` when in
    /// dispute with it.
    pub received: BTreeMap<NodeId, Option<DataBlock>>,
    pub views: BTreeMap<NodeId, PartialView>,
    pub resolutions: BTreeMap<NodeId, NodeResolution>,
    /// Agreed detection flags of all active nodes.
    pub detection_flags: BTreeMap<NodeId, bool>,
    pub dispute_control: Option<DisputeControlRecord>,
}

/// A peer's dispute-control statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub block: Option<DataBlock>,
    pub view: PartialView,
}

impl Claim {
    /// Fixed claim length: a presence bit and `D` bits for the block, then
    /// a presence bit and `c` bits per view position.
    pub fn width(code: &RsCode) -> usize {
        1 + code.block_bits() + code.len() * (1 + usize::from(code.field().width()))
    }

    pub fn encode(&self, code: &RsCode) -> Bits {
        let c = code.field().width();
        let mut out = Bits::new();
        match &self.block {
            Some(b) => {
                out.push(true);
                out.extend_from(&b.to_bits(c));
            }
            None => {
                out.push(false);
                out.extend_from(&Bits::zeros(code.block_bits()));
            }
        }
        for e in self.view.entries() {
            out.push(e.is_some());
            out.push_uint(u32::from(e.unwrap_or(0)), c);
        }
        out
    }

    pub fn decode(bits: &Bits, code: &RsCode) -> Option<Claim> {
        if bits.len() != Self::width(code) {
            return None;
        }
        let c = code.field().width();
        let d = code.block_bits();
        let block = if bits.get(0)? {
            Some(code.block_from_bits(&bits.slice(1, d)?)?)
        } else {
            None
        };
        let step = 1 + usize::from(c);
        let entries = (0..code.len())
            .map(|j| {
                let at = 1 + d + j * step;
                let present = bits.get(at)?;
                let v = bits.read_uint(at + 1, c)? as u16;
                Some(present.then_some(v))
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Claim {
            block,
            view: PartialView::new(entries),
        })
    }
}

/// The source's step-1 transmission: its block as `D` bits.
pub fn db_source_step(code: &RsCode, x_g: &DataBlock) -> Bits {
    x_g.to_bits(code.field().width())
}

/// A peer's step-2 transmission: its own coded symbol, or silence when it
/// is in dispute with the source.
pub fn db_peer_relay(code: &RsCode, i: NodeId, received: Option<&DataBlock>, disputes: &DisputeGraph) -> Bits {
    match received {
        Some(block) if !disputes.in_dispute(i, NodeId::SOURCE) => {
            let mut b = Bits::new();
            b.push_uint(u32::from(code.encode_at(block, usize::from(i.get()))), code.field().width());
            b
        }
        _ => Bits::new(),
    }
}

/// Whether position `j` of `k`'s view must be null given the disputes.
fn must_be_null(disputes: &DisputeGraph, k: NodeId, j: NodeId) -> bool {
    if j == k || j.is_source() {
        disputes.in_dispute(k, NodeId::SOURCE)
    } else {
        disputes.ignores(k, j) || disputes.in_dispute(j, NodeId::SOURCE)
    }
}

fn view_entries(
    code: &RsCode,
    i: NodeId,
    received_symbols: &BTreeMap<NodeId, Bits>,
    own: Option<&Codeword>,
    disputes: &DisputeGraph,
) -> PartialView {
    let c = code.field().width();
    let entries = (1..=code.len() as u16)
        .map(NodeId::new)
        .map(|j| {
            if must_be_null(disputes, i, j) {
                return None;
            }
            if j == i || j.is_source() {
                return own.map(|cw| cw.at(usize::from(j.get())));
            }
            received_symbols
                .get(&j)
                .filter(|b| b.len() == usize::from(c))
                .and_then(|b| b.read_uint(0, c))
                .map(|v| v as u16)
        })
        .collect();
    PartialView::new(entries)
}

/// Builds peer `i`'s view after step 2.
///
/// Symbols from peers `i` is in dispute with, from peers in dispute with
/// the source (which must be silent) and from identified nodes are
/// nulled, as are silent or malformed transmissions. Positions 1 and `i`
/// come from `i`'s own codeword. Fails when fewer than `n - 2t` symbols
/// remain.
pub fn db_assemble_view(
    code: &RsCode,
    i: NodeId,
    received_symbols: &BTreeMap<NodeId, Bits>,
    own: Option<&Codeword>,
    disputes: &DisputeGraph,
) -> Result<PartialView, CodeError> {
    let view = view_entries(code, i, received_symbols, own, disputes);
    let present = view.present().len();
    if present < code.data_len() {
        return Err(CodeError::Underfull {
            present,
            needed: code.data_len(),
        });
    }
    Ok(view)
}

/// Step 3: the unique consistent block, or the default and a detection.
pub fn db_resolve(code: &RsCode, view: &PartialView) -> (DataBlock, bool) {
    match code.consistency_check(view) {
        Ok(Consistency::Consistent(d)) => (d, false),
        Ok(Consistency::Inconsistent) | Err(_) => (code.zero_block(), true),
    }
}

/// Derives the new dispute pairs from agreed claims and detection flags.
/// All inputs are common to fault-free nodes, so are the pairs.
pub fn derive_disputes(
    code: &RsCode,
    disputes: &DisputeGraph,
    active: &[NodeId],
    agreed_value: &DataBlock,
    claims: &BTreeMap<NodeId, Option<Claim>>,
    detection_flags: &BTreeMap<NodeId, bool>,
) -> BTreeSet<(NodeId, NodeId)> {
    let n = code.len() as u16;
    let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut misbehaving: BTreeSet<NodeId> = BTreeSet::new();
    let add = |pairs: &mut BTreeSet<_>, a: NodeId, b: NodeId| {
        if a != b && !disputes.in_dispute(a, b) {
            pairs.insert(if a < b { (a, b) } else { (b, a) });
        }
    };

    let mut valid: BTreeMap<NodeId, (Option<DataBlock>, PartialView)> = BTreeMap::new();
    for &k in active.iter().filter(|k| !k.is_source()) {
        let Some(Some(claim)) = claims.get(&k) else {
            misbehaving.insert(k);
            continue;
        };
        let silent = disputes.in_dispute(k, NodeId::SOURCE);
        if claim.block.is_some() == silent || claim.view.len() != code.len() {
            misbehaving.insert(k);
            continue;
        }
        let mut view = claim.view.clone();
        for j in (1..=n).map(NodeId::new) {
            if must_be_null(disputes, k, j) {
                view.set(usize::from(j.get()), None);
            }
        }
        if let Some(b) = &claim.block {
            let own = [1, usize::from(k.get())];
            if own.iter().any(|&pos| view.get(pos) != Some(code.encode_at(b, pos))) {
                misbehaving.insert(k);
                continue;
            }
        }
        if view.present().len() < code.data_len() {
            misbehaving.insert(k);
            continue;
        }
        valid.insert(k, (claim.block.clone(), view));
    }

    for (&k, (block, _)) in &valid {
        if block.as_ref().is_some_and(|b| b != agreed_value) {
            add(&mut pairs, NodeId::SOURCE, k);
        }
    }
    for (&j, (_, view_j)) in &valid {
        for (&i, (block_i, _)) in &valid {
            if i == j {
                continue;
            }
            if let (Some(sym), Some(b)) = (view_j.get(usize::from(i.get())), block_i) {
                if sym != code.encode_at(b, usize::from(i.get())) {
                    add(&mut pairs, i, j);
                }
            }
        }
    }
    for (&k, (_, view)) in &valid {
        let claimed = matches!(code.consistency_check(view), Ok(Consistency::Inconsistent));
        if detection_flags.get(&k).copied().unwrap_or(false) != claimed {
            misbehaving.insert(k);
        }
    }
    if detection_flags.get(&NodeId::SOURCE).copied().unwrap_or(false) {
        misbehaving.insert(NodeId::SOURCE);
    }

    for v in misbehaving {
        if let Some(&m) = active
            .iter()
            .find(|&&m| m != v && !disputes.in_dispute(v, m))
        {
            add(&mut pairs, v, m);
        }
    }
    pairs
}

/// Runs the protocol with one of the catalog strategies.
pub fn run_byzantine_broadcast(
    x: &Bits,
    config: &SystemConfig,
    strategy: &StrategySpec,
) -> Result<BbOutcome, ProtocolError> {
    let mut adversary = strategy.build(config)?;
    run_byzantine_broadcast_with(x, config, &mut adversary)
}

/// Runs the protocol against an arbitrary adversary.
pub fn run_byzantine_broadcast_with(
    x: &Bits,
    config: &SystemConfig,
    adversary: &mut dyn Adversary,
) -> Result<BbOutcome, ProtocolError> {
    let generations = config.generations()?;
    if x.len() != config.input_bits() {
        return Err(ProtocolError::InputLength {
            expected: config.input_bits(),
            got: x.len(),
        });
    }
    let code = config.code();
    let width = code.field().width();
    let d = config.block_bits();
    let t = config.t();
    let source = NodeId::SOURCE;

    let mut sim = Simulation::new(config, x.clone(), adversary)?;
    let mut graph = DisputeGraph::new(t);
    let mut outputs: BTreeMap<NodeId, Bits> = config.nodes().map(|v| (v, Bits::new())).collect();
    let mut records = Vec::with_capacity(generations);
    let mut invocations = 0;

    for g in 1..=generations {
        let x_g = code
            .block_from_bits(&x.slice((g - 1) * d, d).expect("length checked"))
            .expect("exact block length");

        if graph.is_identified(source) {
            for out in outputs.values_mut() {
                out.extend_from(&Bits::zeros(d));
            }
            records.push(GenerationRecord {
                generation: g,
                input_block: x_g,
                source_excluded: true,
                received: BTreeMap::new(),
                views: BTreeMap::new(),
                resolutions: BTreeMap::new(),
                detection_flags: BTreeMap::new(),
                dispute_control: None,
            });
            continue;
        }

        let active = graph.active(config.nodes());
        let peers: Vec<NodeId> = active.iter().copied().filter(|v| !v.is_source()).collect();
        let faults = t - graph.identified_faulty().len();
        let others = |s: NodeId| -> Vec<NodeId> { active.iter().copied().filter(|&v| v != s).collect() };

        // Detectable Broadcast, step 1.
        let step1 = sim.round(
            Phase::Db,
            Coalescing::Broadcast,
            alloc::vec![Outgoing {
                sender: source,
                step: Step::DbSource { generation: g },
                payload: db_source_step(&code, &x_g),
                audience: peers.clone(),
            }],
        )?;
        let received: BTreeMap<NodeId, Option<DataBlock>> = peers
            .iter()
            .map(|&i| {
                let block = (!graph.in_dispute(i, source)).then(|| {
                    code.block_from_bits(&step1[0][&i].1)
                        .unwrap_or_else(|| code.zero_block())
                });
                (i, block)
            })
            .collect();

        // Step 2a: coded symbols.
        let relays: Vec<Outgoing> = peers
            .iter()
            .filter_map(|&i| {
                let payload = db_peer_relay(&code, i, received[&i].as_ref(), &graph);
                (!payload.is_empty()).then(|| Outgoing {
                    sender: i,
                    step: Step::DbRelay { generation: g },
                    payload,
                    audience: others(i),
                })
            })
            .collect();
        let senders: Vec<NodeId> = relays.iter().map(|o| o.sender).collect();
        let step2 = sim.round(Phase::Db, Coalescing::Broadcast, relays)?;

        // Steps 2b and 3.
        let mut views = BTreeMap::new();
        let mut resolutions = BTreeMap::new();
        for &i in &peers {
            let symbols: BTreeMap<NodeId, Bits> = senders
                .iter()
                .zip(&step2)
                .filter(|(&s, _)| s != i)
                .map(|(&s, delivery)| (s, delivery[&i].1.clone()))
                .collect();
            let own = received[&i].as_ref().map(|b| code.encode(b));
            let resolution = match db_assemble_view(&code, i, &symbols, own.as_ref(), &graph) {
                Ok(view) => {
                    let (z, detected) = db_resolve(&code, &view);
                    views.insert(i, view);
                    NodeResolution {
                        z,
                        detected,
                        underfull: false,
                    }
                }
                Err(_) => {
                    views.insert(i, view_entries(&code, i, &symbols, own.as_ref(), &graph));
                    NodeResolution {
                        z: code.zero_block(),
                        detected: true,
                        underfull: true,
                    }
                }
            };
            resolutions.insert(i, resolution);
        }

        // Detection Dissemination.
        let flag_instances: Vec<EigInstance> = active
            .iter()
            .map(|&v| {
                let detected = resolutions.get(&v).is_some_and(|r| r.detected);
                EigInstance {
                    purpose: EigPurpose::Detection,
                    generation: g,
                    origin: v,
                    value: core::iter::once(detected).collect(),
                }
            })
            .collect();
        let flag_out = run_eig_batch(
            &mut sim,
            EigParams {
                participants: &active,
                faults,
                width: 1,
                phase: Phase::Dd,
                coalescing: Coalescing::Broadcast,
            },
            &flag_instances,
        )?;
        let flags_per_node: BTreeMap<NodeId, BTreeMap<NodeId, bool>> = active
            .iter()
            .map(|&v| {
                let flags = flag_instances
                    .iter()
                    .zip(&flag_out)
                    .map(|(inst, out)| (inst.origin, out[&v].get(0) == Some(true)))
                    .collect();
                (v, flags)
            })
            .collect();
        let detection_flags = sim.common(&flags_per_node)?;

        let mut record = GenerationRecord {
            generation: g,
            input_block: x_g.clone(),
            source_excluded: false,
            received: received.clone(),
            views: views.clone(),
            resolutions: resolutions.clone(),
            detection_flags: detection_flags.clone(),
            dispute_control: None,
        };

        if !detection_flags.values().any(|&f| f) {
            for &v in &active {
                let y = if v.is_source() { &x_g } else { &resolutions[&v].z };
                outputs.get_mut(&v).expect("node").extend_from(&y.to_bits(width));
            }
            records.push(record);
            continue;
        }

        // Dispute Control.
        invocations += 1;
        let params = |w| EigParams {
            participants: &active,
            faults,
            width: w,
            phase: Phase::Dc,
            coalescing: Coalescing::Broadcast,
        };
        let value_out = run_eig_batch(
            &mut sim,
            params(d),
            &[EigInstance {
                purpose: EigPurpose::SourceValue,
                generation: g,
                origin: source,
                value: db_source_step(&code, &x_g),
            }],
        )?
        .swap_remove(0);
        let claim_instances: Vec<EigInstance> = peers
            .iter()
            .map(|&k| EigInstance {
                purpose: EigPurpose::Claim,
                generation: g,
                origin: k,
                value: Claim {
                    block: received[&k].clone(),
                    view: views[&k].clone(),
                }
                .encode(&code),
            })
            .collect();
        let claim_out = run_eig_batch(&mut sim, params(Claim::width(&code)), &claim_instances)?;

        let mut agreed_per_node = BTreeMap::new();
        let mut pairs_per_node = BTreeMap::new();
        for &v in &active {
            let agreed = code.block_from_bits(&value_out[&v]).expect("fixed width");
            let claims: BTreeMap<NodeId, Option<Claim>> = claim_instances
                .iter()
                .zip(&claim_out)
                .map(|(inst, out)| (inst.origin, Claim::decode(&out[&v], &code)))
                .collect();
            let flags = &flags_per_node[&v];
            pairs_per_node.insert(
                v,
                derive_disputes(&code, &graph, &active, &agreed, &claims, flags),
            );
            outputs.get_mut(&v).expect("node").extend_from(&agreed.to_bits(width));
            agreed_per_node.insert(v, agreed);
        }
        let agreed_value = sim.common(&agreed_per_node)?;
        let new_pairs = sim.common(&pairs_per_node)?;
        for &(a, b) in &new_pairs {
            graph.insert(a, b);
        }
        record.dispute_control = Some(DisputeControlRecord {
            agreed_value,
            new_pairs: new_pairs.into_iter().collect(),
        });
        records.push(record);
    }

    // Identified nodes stop producing output; pad so every node's output
    // has full length (only fault-free outputs are reported anyway).
    for out in outputs.values_mut() {
        while out.len() < x.len() {
            out.push(false);
        }
    }
    let outputs = sim.fault_free_only(outputs);
    let rec = sim.finish();
    Ok(BbOutcome {
        n: config.n(),
        outputs,
        meter: rec.meter,
        dispute_graph: graph,
        trace: rec.trace,
        generations: records,
        dispute_control_invocations: invocations,
        corrupt: rec.corrupt,
    })
}
