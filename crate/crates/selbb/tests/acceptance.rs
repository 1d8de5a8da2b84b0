//! One line per acceptance criterion. Exits non-zero if any fails.
//!
//! Run with `cargo test -p selbb --test acceptance`.

use std::collections::BTreeSet;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use selbb::scenario::random_input;
use selbb::trace::render;
use selbb::verify::{builtin_checks, run_check};
use selbb::{run_scenario, write_csv, Scenario};
use selbb_core::adversary::StrategyKind;
use selbb_core::audit::{audit_dispute_run, dichotomy_holds};
use selbb_core::bounds::{check_measured, cost_ratio, total_bb_cost_bits, Rational};
use selbb_core::gf::FieldSpec;
use selbb_core::protocol::{run_algorithm2, run_algorithm2_with, run_byzantine_broadcast};
use selbb_core::rs::{Consistency, PartialView, RsCode};
use selbb_core::sim::{Coalescing, Phase};
use selbb_core::{check_bb_properties, strategy_catalog, BbOutcome, Bits, NodeId, StrategySpec, SystemConfig};

const SEEDS: u64 = 100;
const CONFIGS: [(usize, usize); 2] = [(4, 1), (7, 2)];
/// Generations per dispute-control run, so that later generations see the
/// disputes found earlier.
const GENERATIONS: usize = 4;

struct Criterion {
    id: u8,
    ok: bool,
    detail: String,
}

fn report(id: u8, ok: bool, detail: impl Into<String>) -> Criterion {
    Criterion {
        id,
        ok,
        detail: detail.into(),
    }
}

fn p(i: u16) -> NodeId {
    NodeId::new(i)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Alg {
    Dispute,
    Committee,
}

struct Run {
    alg: Alg,
    n: usize,
    t: usize,
    seed: u64,
    strategy: String,
    input: Bits,
    outcome: BbOutcome,
}

fn catalog_runs() -> Vec<Run> {
    let mut jobs = Vec::new();
    for &(n, t) in &CONFIGS {
        for seed in 0..SEEDS {
            for spec in strategy_catalog(seed) {
                for alg in [Alg::Dispute, Alg::Committee] {
                    jobs.push((alg, n, t, seed, spec.clone()));
                }
            }
        }
    }
    jobs.into_par_iter()
        .map(|(alg, n, t, seed, spec)| {
            let c = SystemConfig::minimal_width(n);
            let d = usize::from(c) * (n - 2 * t);
            let l = match alg {
                Alg::Dispute => GENERATIONS * d,
                Alg::Committee => d,
            };
            let cfg = SystemConfig::new(n, t, c, l, seed).unwrap();
            let input = random_input(seed, l);
            let outcome = match alg {
                Alg::Dispute => run_byzantine_broadcast(&input, &cfg, &spec),
                Alg::Committee => run_algorithm2(&input, &cfg, &spec),
            }
            .unwrap_or_else(|e| panic!("{spec} n={n} t={t} seed={seed}: {e}"));
            Run {
                alg,
                n,
                t,
                seed,
                strategy: spec.to_string(),
                input,
                outcome,
            }
        })
        .collect()
}

fn name(r: &Run) -> String {
    let alg = match r.alg {
        Alg::Dispute => "dispute_bb",
        Alg::Committee => "algo2",
    };
    format!("{alg} {} (n={}, t={}) seed {}", r.strategy, r.n, r.t, r.seed)
}

fn first_failures(bad: &[String]) -> String {
    let shown: Vec<&str> = bad.iter().take(3).map(String::as_str).collect();
    format!("{} failures, e.g. {}", bad.len(), shown.join("; "))
}

fn criterion_1() -> Criterion {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, t, c, l) in [(4, 1, 3, 12), (7, 2, 3, 18), (10, 3, 4, 160)] {
        let cfg = SystemConfig::new(n, t, c, l, 0).unwrap();
        let x = random_input(1, l);
        let start = Instant::now();
        let out = run_byzantine_broadcast(&x, &cfg, &StrategySpec::new(StrategyKind::Honest)).unwrap();
        let elapsed = start.elapsed();
        let bits = out.meter.phase(Phase::Db).honest.bits;
        let expected = total_bb_cost_bits(n, t, l).unwrap();
        let exact = Rational::from_integer(u128::from(bits)) == expected;
        ok &= exact && elapsed < Duration::from_secs(1) && out.outputs.values().all(|y| *y == x);
        notes.push(format!("({n},{t},{c},{l}) {bits}/{expected} bits in {}ms", elapsed.as_millis()));
    }
    report(1, ok, notes.join(", "))
}

fn criterion_2() -> Criterion {
    let (two, four) = (Rational::from_integer(2), Rational::from_integer(4));
    let mut points = 0;
    let mut bad = Vec::new();
    for t in 1..=5usize {
        for n in 3 * t + 1..=3 * t + 10 {
            points += 1;
            let l = 100 * (n - 2 * t);
            let r = total_bb_cost_bits(n, t, l).unwrap() / Rational::from_integer(l as u128);
            if !(r > two && r < four) || r != cost_ratio(n, t).unwrap() {
                bad.push(format!("(n={n}, t={t}) ratio {r}"));
            }
        }
    }
    if bad.is_empty() {
        report(2, true, format!("{points} (n, t) points strictly inside (2, 4)"))
    } else {
        report(2, false, first_failures(&bad))
    }
}

fn criterion_3(runs: &[Run]) -> Criterion {
    let mut generations = 0;
    let mut bad = Vec::new();
    for r in runs.iter().filter(|r| r.alg == Alg::Dispute) {
        for g in &r.outcome.generations {
            generations += 1;
            if !dichotomy_holds(g, &r.outcome.corrupt) {
                bad.push(format!("{} generation {}", name(r), g.generation));
            }
        }
    }
    if bad.is_empty() {
        report(3, true, format!("{generations} generations, 0 violations"))
    } else {
        report(3, false, first_failures(&bad))
    }
}

fn criterion_4(runs: &[Run], elapsed: Duration) -> Criterion {
    let bad: Vec<String> = runs
        .iter()
        .filter_map(|r| {
            let v = check_bb_properties(&r.outcome, &r.input, &r.outcome.corrupt);
            (!v.is_pass()).then(|| format!("{}: {v:?}", name(r)))
        })
        .collect();
    let in_time = elapsed < Duration::from_secs(60);
    let detail = format!("{} runs, {} violations, {:.1}s", runs.len(), bad.len(), elapsed.as_secs_f64());
    if bad.is_empty() {
        report(4, in_time, detail)
    } else {
        report(4, false, format!("{detail}; {}", first_failures(&bad)))
    }
}

fn criterion_5(runs: &[Run]) -> Criterion {
    let mut invocations = 0;
    let mut most = 0;
    let mut bad = Vec::new();
    for r in runs.iter().filter(|r| r.alg == Alg::Dispute) {
        let a = audit_dispute_run(&r.outcome, r.t);
        invocations += a.invocations;
        most = most.max(a.invocations);
        if !a.fault_free_pairs.is_empty() || !a.stalled_invocations.is_empty() || a.invocations > a.invocation_cap {
            bad.push(format!("{}: {a:?}", name(r)));
        }
    }
    let detail = format!("{invocations} invocations in total, at most {most} per run");
    if bad.is_empty() {
        report(5, true, detail)
    } else {
        report(5, false, format!("{detail}; {}", first_failures(&bad)))
    }
}

/// GF(8) mod x^3 + x + 1, written out independently of the library.
fn gf8_mul(a: u32, b: u32) -> u32 {
    let mut r = 0;
    for i in 0..3 {
        if (b >> i) & 1 == 1 {
            r ^= a << i;
        }
    }
    for bit in (3..5).rev() {
        if (r >> bit) & 1 == 1 {
            r ^= 0b1011 << (bit - 3);
        }
    }
    r
}

fn gf8_inv(a: u32) -> u32 {
    (1..8).find(|&b| gf8_mul(a, b) == 1).expect("non-zero")
}

/// Degree-1 polynomial through two points, as `[c0, c1]`.
fn line_through((x0, y0): (u32, u32), (x1, y1): (u32, u32)) -> [u32; 2] {
    let slope = gf8_mul(y0 ^ y1, gf8_inv(x0 ^ x1));
    [y0 ^ gf8_mul(slope, x0), slope]
}

#[derive(Debug, PartialEq, Eq)]
enum Verdict {
    Underfull,
    Consistent([u32; 2]),
    Inconsistent,
}

/// Interpolates every pair of present positions; consistent when all pairs
/// give the same line.
fn brute_force(points: &[u32; 4], view: &[Option<u32>; 4]) -> Verdict {
    let present: Vec<(u32, u32)> = (0..4).filter_map(|i| view[i].map(|y| (points[i], y))).collect();
    if present.len() < 2 {
        return Verdict::Underfull;
    }
    let mut lines = BTreeSet::new();
    for i in 0..present.len() {
        for j in i + 1..present.len() {
            lines.insert(line_through(present[i], present[j]));
        }
    }
    match lines.len() {
        1 => Verdict::Consistent(*lines.first().unwrap()),
        _ => Verdict::Inconsistent,
    }
}

fn criterion_6() -> Criterion {
    let start = Instant::now();
    let code = RsCode::new(FieldSpec::with_default_polynomial(3).unwrap(), 4, 1).unwrap();
    // alpha = x, so the points are x^0..x^3
    let points = [1, 2, 4, gf8_mul(4, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    let mut inconsistent = 0;
    let mut bad = Vec::new();
    for a in 0..8u32 {
        for b in 0..8u32 {
            let block = code.data_block(vec![a as _, b as _]).unwrap();
            let cw = code.encode(&block);
            for _ in 0..500 {
                let mut view = [None; 4];
                for (i, slot) in view.iter_mut().enumerate() {
                    *slot = match rng.random_range(0..4) {
                        0 => None,
                        1 => Some((cw.at(i + 1) as u32 ^ rng.random_range(1..8)) & 7),
                        _ => Some(cw.at(i + 1) as u32),
                    };
                }
                let expected = brute_force(&points, &view);
                let pv = PartialView::new(view.iter().map(|s| s.map(|v| v as _)).collect());
                let got = match code.consistency_check(&pv) {
                    Err(_) => Verdict::Underfull,
                    Ok(Consistency::Inconsistent) => Verdict::Inconsistent,
                    Ok(Consistency::Consistent(d)) => {
                        let s = d.symbols();
                        Verdict::Consistent([s[0] as u32, s[1] as u32])
                    }
                };
                if expected == Verdict::Inconsistent {
                    inconsistent += 1;
                }
                if got != expected {
                    bad.push(format!("block ({a},{b}) view {view:?}: {got:?} vs {expected:?}"));
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{checked} views ({inconsistent} inconsistent), {} disagreements, {}ms",
        bad.len(),
        elapsed.as_millis()
    );
    if bad.is_empty() {
        report(6, elapsed < Duration::from_secs(5), detail)
    } else {
        report(6, false, format!("{detail}; {}", first_failures(&bad)))
    }
}

fn criterion_7(runs: &[Run]) -> Criterion {
    let mut bad = Vec::new();
    let mut compared = 0;
    for seed in 0..10 {
        for spec in strategy_catalog(seed) {
            // Same corrupt set at both sizes: the one drawn for n = 10, and p3.
            let drawn = spec.corrupt_set(&SystemConfig::new(10, 1, 5, 2, seed).unwrap()).unwrap();
            let variants = match spec.kind {
                StrategyKind::Honest | StrategyKind::EquivocatingSource => vec![spec.clone()],
                _ => vec![spec.clone().with_corrupt(drawn), spec.clone().with_corrupt([p(3)])],
            };
            for spec in variants {
                let run = |n: usize, mode| {
                    let cfg = SystemConfig::new(n, 1, 5, 2, seed).unwrap();
                    let x = random_input(seed, 2);
                    let mut adv = spec.build(&cfg).unwrap();
                    let out = run_algorithm2_with(&x, &cfg, &mut adv, mode).unwrap();
                    (x, out)
                };
                let (x, small) = run(10, Coalescing::Broadcast);
                let (_, large) = run(25, Coalescing::Broadcast);
                let (_, unicast) = run(10, Coalescing::Unicast);
                compared += 1;
                let tag = format!("{spec} seed {seed}");
                if small.meter.honest().messages != large.meter.honest().messages {
                    bad.push(format!("{tag}: n=10 vs n=25 message counts differ"));
                }
                for out in [&small, &large] {
                    let passive_sent = out.trace.iter().any(|s| s.sender.get() > 4 && !out.corrupt.contains(&s.sender));
                    if passive_sent {
                        bad.push(format!("{tag}: a fault-free passive node sent"));
                    }
                    if !check_bb_properties(out, &x, &out.corrupt).is_pass() {
                        bad.push(format!("{tag}: property violation"));
                    }
                }
                if unicast.outputs != small.outputs || small.meter.honest().messages >= unicast.meter.honest().messages {
                    bad.push(format!("{tag}: unicast vs broadcast core"));
                }
            }
        }
    }
    let mut fewest = u64::MAX;
    for r in runs.iter().filter(|r| r.alg == Alg::Committee) {
        let m = r.outcome.meter.honest().messages;
        fewest = fewest.min(m);
        if m <= r.t as u64 {
            bad.push(format!("{}: only {m} honest messages", name(r)));
        }
    }
    let detail = format!("{compared} n=10/n=25/unicast triples, fewest honest messages {fewest}");
    if bad.is_empty() {
        report(7, true, detail)
    } else {
        report(7, false, format!("{detail}; {}", first_failures(&bad)))
    }
}

fn criterion_8(runs: &[Run]) -> Criterion {
    let mut bad = Vec::new();
    let mut asserted = 0;
    let mut static_reported = 0;
    let mut static_satisfied = 0;
    for r in runs {
        let l = r.input.len();
        let report = check_measured(r.n, r.t, l, &r.outcome.meter).unwrap();
        static_reported += 1;
        static_satisfied += usize::from(report.static_db_lower_bound_satisfied);
        if r.outcome.corrupt.contains(&NodeId::SOURCE) {
            continue;
        }
        asserted += 1;
        if r.outcome.meter.honest().bits < l as u64 || !report.input_bits_satisfied {
            bad.push(format!("{}: {} honest bits for L = {l}", name(r), r.outcome.meter.honest().bits));
        }
        if r.alg == Alg::Dispute && !report.total_bb_cost_satisfied {
            bad.push(format!("{}: DB bits above the formula", name(r)));
        }
    }
    for check in builtin_checks() {
        let out = run_check(&check);
        if !out.ok {
            bad.push(format!("{} = {}", out.label, out.value));
        }
    }
    let detail = format!(
        "{asserted} fault-free-source runs with honest bits >= L; static bound met in {static_satisfied}/{static_reported} (reported only); {} formula examples exact",
        builtin_checks().len()
    );
    if bad.is_empty() {
        report(8, true, detail)
    } else {
        report(8, false, format!("{detail}; {}", first_failures(&bad)))
    }
}

const DETERMINISM_SCENARIOS: &str = r#"[
  {"config":{"n":4,"t":1,"c":3,"L":24},"algorithm":"dispute_bb","strategy":{"name":"randomized_byzantine"},"repetitions":5,"seed":11},
  {"config":{"n":7,"t":2,"L":36},"algorithm":"dispute_bb","strategy":{"name":"claim_liar"},"repetitions":3,"seed":3},
  {"config":{"n":7,"t":2,"L":18},"algorithm":"dispute_bb","strategy":{"name":"equivocating_source"},"repetitions":3},
  {"config":{"n":10,"t":1,"L":4},"algorithm":"algo2","strategy":{"name":"randomized_byzantine"},"repetitions":3,"seed":5}
]"#;

/// CSV and trace bytes for all scenarios, straight from the library.
fn library_bytes(scenarios: &[Scenario]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut records = Vec::new();
    let runs: Vec<_> = scenarios.iter().map(|s| (s, run_scenario(s).unwrap())).collect();
    for (_, rs) in &runs {
        records.extend(rs.iter().map(|r| &r.record));
    }
    write_csv(&mut out, &records).unwrap();
    for (s, rs) in &runs {
        for r in rs {
            for line in render(s, r) {
                out.extend_from_slice(line.as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

fn cli_bytes(scenario_file: &std::path::Path, jobs: &str) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_selbb"))
        .arg("run")
        .arg(scenario_file)
        .args(["--out", "m.csv", "--trace", "traces", "--jobs", jobs])
        .current_dir(dir.path())
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    let mut files = vec![("m.csv".to_string(), fs::read(dir.path().join("m.csv")).unwrap())];
    let mut traces: Vec<_> = fs::read_dir(dir.path().join("traces"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    traces.sort();
    files.extend(traces);
    files
}

fn criterion_9() -> Criterion {
    let scenarios: Vec<Scenario> = serde_json::from_str(DETERMINISM_SCENARIOS).unwrap();
    let a = library_bytes(&scenarios);
    let b = library_bytes(&scenarios);
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("scenarios.json");
    fs::write(&file, DETERMINISM_SCENARIOS).unwrap();
    let serial = cli_bytes(&file, "1");
    let parallel = cli_bytes(&file, "8");
    let ok = a == b && serial == parallel && serial.len() == 1 + 14;
    report(
        9,
        ok,
        format!(
            "{} scenarios: library output {} bytes twice, CLI csv + {} traces at 1 and 8 threads",
            scenarios.len(),
            a.len(),
            serial.len() - 1
        ),
    )
}

fn main() {
    let start = Instant::now();
    let runs = catalog_runs();
    let catalog_time = start.elapsed();
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(&runs),
        criterion_4(&runs, catalog_time),
        criterion_5(&runs),
        criterion_6(),
        criterion_7(&runs),
        criterion_8(&runs),
        criterion_9(),
    ];
    let mut failed = 0;
    for c in &results {
        let tag = if c.ok { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} - {}", c.id, c.detail);
        failed += usize::from(!c.ok);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
