use std::io::Write;

use rayon::prelude::*;
use selbb_core::bounds::check_measured;
use selbb_core::protocol::{run_algorithm2, run_byzantine_broadcast, ProtocolError};
use selbb_core::sim::{Phase, PhaseCounters};
use selbb_core::{check_bb_properties, BbOutcome, BbVerdict};

use crate::scenario::{Algorithm, Prepared, Scenario, ScenarioError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("repetition {repetition} (seed {seed}): {source}")]
    Protocol {
        repetition: usize,
        seed: u64,
        source: ProtocolError,
    },
}

/// One CSV row. Columns follow field order; per-phase counters expand to
/// four columns per phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsRecord {
    pub scenario: String,
    pub algorithm: &'static str,
    pub strategy: String,
    pub corrupt: String,
    pub n: usize,
    pub t: usize,
    pub c: u8,
    pub block_bits: usize,
    pub input_bits: usize,
    pub repetition: usize,
    pub seed: u64,
    pub verdict: String,
    pub honest_messages: u64,
    pub honest_bits: u64,
    pub adversary_messages: u64,
    pub adversary_bits: u64,
    pub phases: [PhaseCounters; 7],
    pub dispute_control_invocations: usize,
    pub total_bb_cost_bits: String,
    pub total_bb_cost_satisfied: bool,
    pub message_lower_bound: u64,
    pub message_lower_bound_satisfied: bool,
    pub static_db_lower_bound: String,
    pub static_db_lower_bound_satisfied: bool,
    pub input_bits_satisfied: bool,
}

impl MetricsRecord {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = [
            "scenario",
            "algorithm",
            "strategy",
            "corrupt",
            "n",
            "t",
            "c",
            "D",
            "L",
            "repetition",
            "seed",
            "verdict",
            "honest_messages",
            "honest_bits",
            "adversary_messages",
            "adversary_bits",
        ]
        .map(String::from)
        .to_vec();
        for p in Phase::ALL {
            let tag = p.tag().to_lowercase();
            for col in ["honest_messages", "honest_bits", "adversary_messages", "adversary_bits"] {
                h.push(format!("{tag}_{col}"));
            }
        }
        h.extend(
            [
                "dispute_control_invocations",
                "total_bb_cost_bits",
                "total_bb_cost_satisfied",
                "message_lower_bound",
                "message_lower_bound_satisfied",
                "static_db_lower_bound",
                "static_db_lower_bound_satisfied",
                "input_bits_satisfied",
            ]
            .map(String::from),
        );
        h
    }

    pub fn row(&self) -> Vec<String> {
        let mut r = vec![
            self.scenario.clone(),
            self.algorithm.to_string(),
            self.strategy.clone(),
            self.corrupt.clone(),
            self.n.to_string(),
            self.t.to_string(),
            self.c.to_string(),
            self.block_bits.to_string(),
            self.input_bits.to_string(),
            self.repetition.to_string(),
            self.seed.to_string(),
            self.verdict.clone(),
            self.honest_messages.to_string(),
            self.honest_bits.to_string(),
            self.adversary_messages.to_string(),
            self.adversary_bits.to_string(),
        ];
        for p in &self.phases {
            r.push(p.honest.messages.to_string());
            r.push(p.honest.bits.to_string());
            r.push(p.adversary.messages.to_string());
            r.push(p.adversary.bits.to_string());
        }
        r.extend([
            self.dispute_control_invocations.to_string(),
            self.total_bb_cost_bits.clone(),
            self.total_bb_cost_satisfied.to_string(),
            self.message_lower_bound.to_string(),
            self.message_lower_bound_satisfied.to_string(),
            self.static_db_lower_bound.clone(),
            self.static_db_lower_bound_satisfied.to_string(),
            self.input_bits_satisfied.to_string(),
        ]);
        r
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

pub fn verdict_string(v: &BbVerdict) -> String {
    match v {
        BbVerdict::Pass => "pass".into(),
        BbVerdict::Fail { property, witnesses } => {
            let w: Vec<String> = witnesses.iter().map(ToString::to_string).collect();
            format!("fail:{property}:{}", w.join(";"))
        }
    }
}

/// A finished repetition.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub prepared: Prepared,
    pub outcome: BbOutcome,
    pub verdict: BbVerdict,
    pub record: MetricsRecord,
}

pub fn run_prepared(scenario: &Scenario, p: &Prepared) -> Result<RunResult, RunError> {
    let run = match scenario.algorithm {
        Algorithm::DisputeBb => run_byzantine_broadcast(&p.input, &p.config, &p.strategy),
        Algorithm::Algo2 => run_algorithm2(&p.input, &p.config, &p.strategy),
    };
    let outcome = run.map_err(|source| RunError::Protocol {
        repetition: p.repetition,
        seed: p.seed,
        source,
    })?;
    let verdict = check_bb_properties(&outcome, &p.input, &outcome.corrupt);
    let cfg = &p.config;
    let bounds = check_measured(cfg.n(), cfg.t(), cfg.input_bits(), &outcome.meter)
        .expect("configuration already validated");
    let honest = outcome.meter.honest();
    let adversary = outcome.meter.adversary();
    let corrupt: Vec<String> = outcome.corrupt.iter().map(|v| v.get().to_string()).collect();
    let record = MetricsRecord {
        scenario: scenario.label(),
        algorithm: scenario.algorithm.as_str(),
        strategy: scenario.strategy.label(),
        corrupt: corrupt.join(";"),
        n: cfg.n(),
        t: cfg.t(),
        c: cfg.symbol_bits(),
        block_bits: cfg.block_bits(),
        input_bits: cfg.input_bits(),
        repetition: p.repetition,
        seed: p.seed,
        verdict: verdict_string(&verdict),
        honest_messages: honest.messages,
        honest_bits: honest.bits,
        adversary_messages: adversary.messages,
        adversary_bits: adversary.bits,
        phases: Phase::ALL.map(|ph| outcome.meter.phase(ph)),
        dispute_control_invocations: outcome.dispute_control_invocations,
        total_bb_cost_bits: bounds.total_bb_cost_bits.to_string(),
        total_bb_cost_satisfied: bounds.total_bb_cost_satisfied,
        message_lower_bound: bounds.message_lower_bound,
        message_lower_bound_satisfied: bounds.message_lower_bound_satisfied,
        static_db_lower_bound: bounds.static_db_lower_bound.to_string(),
        static_db_lower_bound_satisfied: bounds.static_db_lower_bound_satisfied,
        input_bits_satisfied: bounds.input_bits_satisfied,
    };
    Ok(RunResult {
        prepared: p.clone(),
        outcome,
        verdict,
        record,
    })
}

/// Runs every repetition, in parallel on the current rayon pool. Results
/// come back in repetition order.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<RunResult>, RunError> {
    scenario.validate()?;
    let prepared: Vec<Prepared> = (0..scenario.repetitions)
        .map(|r| scenario.prepare(r))
        .collect::<Result<_, _>>()?;
    prepared.par_iter().map(|p| run_prepared(scenario, p)).collect()
}

pub fn write_csv<W: Write>(out: W, records: &[&MetricsRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MetricsRecord::header())?;
    for r in records {
        w.write_record(r.row())?;
    }
    w.flush()?;
    Ok(())
}
