use proptest::prelude::*;
use selbb_core::audit::audit_dispute_run;
use selbb_core::protocol::{run_algorithm2, run_byzantine_broadcast};
use selbb_core::sim::{Phase, SlotKind};
use selbb_core::{check_bb_properties, strategy_catalog, BbOutcome, Bits, SystemConfig};

fn setup(small: bool, strategy: usize, seed: u64, gens: usize) -> (SystemConfig, selbb_core::StrategySpec, Bits) {
    let (n, t) = if small { (4, 1) } else { (7, 2) };
    let d = 3 * (n - 2 * t);
    let cfg = SystemConfig::new(n, t, 3, gens * d, seed).unwrap();
    let spec = strategy_catalog(seed).swap_remove(strategy);
    let x: Bits = (0..cfg.input_bits()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
    (cfg, spec, x)
}

fn same(a: &BbOutcome, b: &BbOutcome) -> bool {
    a.outputs == b.outputs
        && a.meter == b.meter
        && a.trace == b.trace
        && a.generations == b.generations
        && a.dispute_graph == b.dispute_graph
        && a.dispute_control_invocations == b.dispute_control_invocations
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_deterministic(small in any::<bool>(), strategy in 0usize..7, seed in any::<u64>(), gens in 1usize..4) {
        let (cfg, spec, x) = setup(small, strategy, seed, gens);
        let a = run_byzantine_broadcast(&x, &cfg, &spec).unwrap();
        let b = run_byzantine_broadcast(&x, &cfg, &spec).unwrap();
        prop_assert!(same(&a, &b));
        let a = run_algorithm2(&x, &cfg, &spec).unwrap();
        let b = run_algorithm2(&x, &cfg, &spec).unwrap();
        prop_assert!(same(&a, &b));
    }

    #[test]
    fn honest_bits_are_the_fault_free_broadcasts(small in any::<bool>(), strategy in 0usize..7, seed in any::<u64>()) {
        let (cfg, spec, x) = setup(small, strategy, seed, 2);
        for out in [run_byzantine_broadcast(&x, &cfg, &spec).unwrap(), run_algorithm2(&x, &cfg, &spec).unwrap()] {
            let traced: u64 = out
                .trace
                .iter()
                .filter(|s| !out.corrupt.contains(&s.sender) && s.kind == SlotKind::Broadcast)
                .map(|s| s.bits as u64)
                .sum();
            prop_assert_eq!(out.meter.honest().bits, traced);
            let by_phase: u64 = Phase::ALL.iter().map(|&p| out.meter.phase(p).honest.bits).sum();
            prop_assert_eq!(by_phase, traced);
            let adv: u64 = Phase::ALL.iter().map(|&p| out.meter.phase(p).adversary.messages).sum();
            prop_assert_eq!(adv, out.meter.adversary().messages);
            prop_assert!(out.trace.iter().all(|s| s.kind != SlotKind::Selective || out.corrupt.contains(&s.sender)));
        }
    }

    #[test]
    fn broadcast_properties_hold(small in any::<bool>(), strategy in 0usize..7, seed in any::<u64>(), gens in 1usize..6) {
        let (cfg, spec, x) = setup(small, strategy, seed, gens);
        let out = run_byzantine_broadcast(&x, &cfg, &spec).unwrap();
        prop_assert!(check_bb_properties(&out, &x, &out.corrupt).is_pass());
        let audit = audit_dispute_run(&out, cfg.t());
        prop_assert!(audit.is_clean(), "{:?}", audit);
        let out = run_algorithm2(&x, &cfg, &spec).unwrap();
        prop_assert!(check_bb_properties(&out, &x, &out.corrupt).is_pass());
    }
}
