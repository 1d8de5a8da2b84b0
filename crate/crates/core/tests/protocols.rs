use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use selbb_core::adversary::{Adversary, StrategyKind};
use selbb_core::protocol::{
    eig_broadcast, run_algorithm2, run_algorithm2_with, run_byzantine_broadcast,
    run_byzantine_broadcast_with,
};
use selbb_core::sim::{Coalescing, Payload, Phase, SlotContext, Simulation, SlotKind};
use selbb_core::{check_bb_properties, Bits, NodeId, StrategySpec, SystemConfig};

fn p(i: u16) -> NodeId {
    NodeId::new(i)
}

fn b(s: &str) -> Bits {
    s.parse().unwrap()
}

/// Source sends fixed per-receiver strings in its first slot and follows
/// the protocol otherwise.
struct ScriptedSource {
    corrupt: BTreeSet<NodeId>,
    first: BTreeMap<NodeId, Bits>,
    used: bool,
}

impl Adversary for ScriptedSource {
    fn corrupt_set(&self) -> &BTreeSet<NodeId> {
        &self.corrupt
    }

    fn transmit(&mut self, ctx: &SlotContext<'_>, _rng: &mut ChaCha8Rng) -> Payload {
        if !self.used && ctx.sender == p(1) {
            self.used = true;
            return Payload::Selective(self.first.clone());
        }
        Payload::Broadcast(ctx.honest_payload.clone())
    }
}

fn nobody() -> ScriptedSource {
    ScriptedSource {
        corrupt: BTreeSet::new(),
        first: BTreeMap::new(),
        used: true,
    }
}

#[test]
fn eig_honest_source_is_valid() {
    let cfg = SystemConfig::new(4, 1, 3, 1, 0).unwrap();
    let mut adv = nobody();
    let mut sim = Simulation::new(&cfg, b("1"), &mut adv).unwrap();
    let nodes: Vec<NodeId> = cfg.nodes().collect();
    let out = eig_broadcast(&mut sim, p(1), &b("1"), &nodes, 1, Coalescing::Broadcast).unwrap();
    assert!(out.values().all(|v| *v == b("1")));
}

#[test]
fn eig_equivocating_source_reaches_the_majority_value() {
    let cfg = SystemConfig::new(4, 1, 3, 1, 0).unwrap();
    let mut adv = ScriptedSource {
        corrupt: [p(1)].into(),
        first: [(p(2), b("0")), (p(3), b("1")), (p(4), b("1"))].into(),
        used: false,
    };
    let mut sim = Simulation::new(&cfg, b("1"), &mut adv).unwrap();
    let nodes: Vec<NodeId> = cfg.nodes().collect();
    let out = eig_broadcast(&mut sim, p(1), &b("0"), &nodes, 1, Coalescing::Broadcast).unwrap();
    // Every honest peer relays what it got, so each sees {0, 1, 1}.
    for v in 2..=4 {
        assert_eq!(out[&p(v)], b("1"));
    }
    let meter = sim.meter();
    assert_eq!(meter.adversary().messages, 3);
    // three honest relays; the source has nothing to relay
    assert_eq!(meter.honest().messages, 3);
}

#[test]
fn eig_tolerates_colluding_source_and_relay() {
    let cfg = SystemConfig::new(7, 2, 3, 4, 0).unwrap();
    let nodes: Vec<NodeId> = cfg.nodes().collect();
    for seed in 0..100 {
        let spec = StrategySpec::new(StrategyKind::RandomizedByzantine { seed }).with_corrupt([p(1), p(5)]);
        let mut adv = spec.build(&cfg.with_seed(seed)).unwrap();
        let cfg = cfg.with_seed(seed);
        let mut sim = Simulation::new(&cfg, b("1011"), &mut adv).unwrap();
        let out = eig_broadcast(&mut sim, p(1), &b("1011"), &nodes, 2, Coalescing::Broadcast).unwrap();
        let ff: Vec<&Bits> = out.iter().filter(|(v, _)| ![p(1), p(5)].contains(v)).map(|(_, b)| b).collect();
        assert!(ff.windows(2).all(|w| w[0] == w[1]), "seed {seed}");
    }
}

#[test]
fn eig_unicast_and_broadcast_modes_agree() {
    let cfg = SystemConfig::new(7, 2, 3, 3, 9).unwrap();
    let nodes: Vec<NodeId> = cfg.nodes().collect();
    let spec = StrategySpec::new(StrategyKind::RandomizedByzantine { seed: 9 }).with_corrupt([p(1), p(3)]);
    let run = |mode| {
        let mut adv = spec.build(&cfg).unwrap();
        let mut sim = Simulation::new(&cfg, b("101"), &mut adv).unwrap();
        let out = eig_broadcast(&mut sim, p(1), &b("101"), &nodes, 2, mode).unwrap();
        (out, sim.meter().honest())
    };
    let (bcast, bm) = run(Coalescing::Broadcast);
    let (ucast, um) = run(Coalescing::Unicast);
    assert_eq!(bcast, ucast);
    assert!(bm.messages < um.messages);
}

fn honest_bb(n: usize, t: usize, c: u8, l: usize) -> selbb_core::BbOutcome {
    let cfg = SystemConfig::new(n, t, c, l, 0).unwrap();
    let x: Bits = (0..l).map(|i| i % 3 == 1).collect();
    let out = run_byzantine_broadcast(&x, &cfg, &StrategySpec::new(StrategyKind::Honest)).unwrap();
    assert!(check_bb_properties(&out, &x, &BTreeSet::new()).is_pass());
    assert!(out.outputs.values().all(|y| *y == x));
    out
}

#[test]
fn honest_run_costs_exactly_the_formula() {
    let out = honest_bb(4, 1, 3, 12);
    assert_eq!(out.meter.phase(Phase::Db).honest.bits, 30);
    assert_eq!(out.dispute_control_invocations, 0);
    assert_eq!(out.meter.adversary().messages, 0);
    assert_eq!(honest_bb(7, 2, 3, 18).meter.phase(Phase::Db).honest.bits, 54);
}

#[test]
fn input_length_must_match() {
    let cfg = SystemConfig::new(4, 1, 3, 12, 0).unwrap();
    let spec = StrategySpec::new(StrategyKind::Honest);
    assert!(run_byzantine_broadcast(&b("1"), &cfg, &spec).is_err());
    let cfg = SystemConfig::new(4, 1, 3, 7, 0).unwrap();
    assert!(run_byzantine_broadcast(&Bits::zeros(7), &cfg, &spec).is_err());
}

#[test]
fn equivocating_source_is_eventually_identified() {
    let cfg = SystemConfig::new(4, 1, 3, 60, 1).unwrap();
    let x: Bits = (0..60).map(|i| i % 5 == 0).collect();
    let spec = StrategySpec::new(StrategyKind::EquivocatingSource);
    let out = run_byzantine_broadcast(&x, &cfg, &spec).unwrap();
    assert!(check_bb_properties(&out, &x, &out.corrupt).is_pass());
    assert!(out.dispute_control_invocations >= 1);
    assert!(out.dispute_control_invocations <= 2);
    assert!(out.dispute_graph.pairs().all(|(a, b)| a == p(1) || b == p(1)));
}

#[test]
fn equivocating_source_view_has_an_odd_symbol() {
    // u = (1, 0) goes to p2 and p3, v = (0, 1) to p4; p2 sees (1, 1, 1, 3).
    let cfg = SystemConfig::new(4, 1, 3, 6, 0).unwrap();
    let x = b("001000");
    let out = run_byzantine_broadcast(&x, &cfg, &StrategySpec::new(StrategyKind::EquivocatingSource)).unwrap();
    let g = &out.generations[0];
    assert_eq!(g.views[&p(2)].entries(), &[Some(1), Some(1), Some(1), Some(3)]);
    assert!(g.resolutions[&p(2)].detected);
}

#[test]
fn consistent_symbol_lie_is_caught_by_everyone() {
    let cfg = SystemConfig::new(4, 1, 3, 6, 0).unwrap();
    let x = b("001000");
    let spec = StrategySpec::new(StrategyKind::SymbolCorruptor { all_receivers: true });
    let out = run_byzantine_broadcast(&x, &cfg, &spec).unwrap();
    let g = &out.generations[0];
    assert!((2..=3).all(|v| g.resolutions[&p(v)].detected));
    assert!(check_bb_properties(&out, &x, &out.corrupt).is_pass());
}

#[test]
fn faulty_nodes_never_beyond_the_cap() {
    for seed in 0..30 {
        let cfg = SystemConfig::new(7, 2, 3, 90, seed).unwrap();
        let x: Bits = (0..90).map(|i| (i + seed as usize).is_multiple_of(4)).collect();
        let spec = StrategySpec::new(StrategyKind::RandomizedByzantine { seed });
        let out = run_byzantine_broadcast(&x, &cfg, &spec).unwrap();
        assert!(out.dispute_control_invocations <= 6, "seed {seed}");
        assert!(check_bb_properties(&out, &x, &out.corrupt).is_pass());
    }
}

#[test]
fn identified_source_stops_all_traffic() {
    let cfg = SystemConfig::new(7, 2, 3, 90, 0).unwrap();
    let x = Bits::zeros(90);
    let out = run_byzantine_broadcast(&x, &cfg, &StrategySpec::new(StrategyKind::EquivocatingSource)).unwrap();
    assert!(out.dispute_graph.is_identified(p(1)));
    let excluded = out.generations.iter().filter(|g| g.source_excluded).count();
    assert!(excluded > 0);
    let y = out.outputs.values().next().unwrap();
    let d = cfg.block_bits();
    assert_eq!(y.slice(90 - d, d).unwrap(), Bits::zeros(d));
}

#[test]
fn custom_adversary_drives_the_top_level_protocol() {
    let cfg = SystemConfig::new(4, 1, 3, 6, 0).unwrap();
    let mut adv = ScriptedSource {
        corrupt: [p(1)].into(),
        first: [(p(2), b("001000")), (p(3), b("001000")), (p(4), b(""))].into(),
        used: false,
    };
    let x = b("001000");
    let out = run_byzantine_broadcast_with(&x, &cfg, &mut adv).unwrap();
    assert!(check_bb_properties(&out, &x, &[p(1)].into()).is_pass());
}

fn algo2(n: usize, spec: &StrategySpec, mode: Coalescing) -> selbb_core::BbOutcome {
    let cfg = SystemConfig::new(n, 1, 5, 1, 4).unwrap();
    let mut adv = spec.build(&cfg).unwrap();
    let out = run_algorithm2_with(&b("1"), &cfg, &mut adv, mode).unwrap();
    assert!(check_bb_properties(&out, &b("1"), &out.corrupt).is_pass());
    out
}

#[test]
fn algorithm2_honest_message_count() {
    let out = algo2(10, &StrategySpec::new(StrategyKind::Honest), Coalescing::Broadcast);
    assert!(out.outputs.values().all(|y| *y == b("1")));
    // source, 4 origin broadcasts plus 4 x 3 relays in the core, 3 announcers
    assert_eq!(out.meter.honest().messages, 1 + 16 + 3);
    assert_eq!(out.meter.phase(Phase::Ann).honest.messages, 3);
    let passive: BTreeSet<NodeId> = (5..=10).map(p).collect();
    assert!(out.trace.iter().all(|s| !passive.contains(&s.sender)));
}

#[test]
fn algorithm2_message_count_ignores_passive_nodes() {
    for spec in selbb_core::strategy_catalog(2) {
        let spec = match spec.kind {
            StrategyKind::Honest | StrategyKind::EquivocatingSource => spec,
            _ => spec.with_corrupt([p(3)]),
        };
        let small = algo2(10, &spec, Coalescing::Broadcast);
        let large = algo2(25, &spec, Coalescing::Broadcast);
        assert_eq!(small.meter.honest().messages, large.meter.honest().messages, "{spec}");
    }
}

#[test]
fn algorithm2_coalescing_changes_only_the_meter() {
    let spec = StrategySpec::new(StrategyKind::EquivocatingSource);
    let bcast = algo2(10, &spec, Coalescing::Broadcast);
    let ucast = algo2(10, &spec, Coalescing::Unicast);
    assert_eq!(bcast.outputs, ucast.outputs);
    assert!(bcast.meter.honest().messages < ucast.meter.honest().messages);
}

#[test]
fn algorithm2_with_equivocating_source_agrees() {
    for seed in 0..20 {
        let cfg = SystemConfig::new(7, 2, 3, 4, seed).unwrap();
        let out = run_algorithm2(&b("1100"), &cfg, &StrategySpec::new(StrategyKind::EquivocatingSource)).unwrap();
        assert!(check_bb_properties(&out, &b("1100"), &out.corrupt).is_pass());
    }
}

#[test]
fn silent_slots_are_free_and_traced() {
    let cfg = SystemConfig::new(4, 1, 3, 6, 0).unwrap();
    let out = run_byzantine_broadcast(&Bits::zeros(6), &cfg, &StrategySpec::new(StrategyKind::CrashSilent)).unwrap();
    assert!(out.trace.iter().any(|s| s.kind == SlotKind::Silent && s.sender == p(4)));
    assert_eq!(out.meter.adversary().messages, 0);
}
