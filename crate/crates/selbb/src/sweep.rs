use rayon::prelude::*;
use selbb_core::adversary::STRATEGY_NAMES;
use selbb_core::SystemConfig;
use serde::{Deserialize, Serialize};

use crate::metrics::{run_prepared, RunError, RunResult};
use crate::scenario::{Algorithm, ConfigSpec, Prepared, Scenario, StrategyParams};

/// Parameter ranges. Every combination becomes one scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n: Vec<usize>,
    /// Fault bounds; `floor((n - 1) / 3)` when absent.
    #[serde(default)]
    pub t: Option<Vec<usize>>,
    /// Symbol width; minimal for each `n` when absent.
    #[serde(default)]
    pub c: Option<u8>,
    /// Input sizes in blocks of `D` bits.
    #[serde(default = "one_block")]
    pub input_blocks: Vec<usize>,
    #[serde(default = "dispute_only")]
    pub algorithms: Vec<Algorithm>,
    /// The whole catalog when absent.
    #[serde(default)]
    pub strategies: Option<Vec<StrategyParams>>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one_block() -> Vec<usize> {
    vec![1]
}

fn dispute_only() -> Vec<Algorithm> {
    vec![Algorithm::DisputeBb]
}

fn one() -> usize {
    1
}

impl Grid {
    pub fn scenarios(&self) -> Vec<Scenario> {
        let strategies = self.strategies.clone().unwrap_or_else(|| {
            STRATEGY_NAMES.iter().map(|name| StrategyParams::named(name)).collect()
        });
        let mut out = Vec::new();
        for &n in &self.n {
            let ts = self.t.clone().unwrap_or_else(|| vec![n.saturating_sub(1) / 3]);
            for &t in &ts {
                let c = self.c.unwrap_or_else(|| SystemConfig::minimal_width(n));
                let d = usize::from(c) * n.saturating_sub(2 * t);
                for &blocks in &self.input_blocks {
                    for &algorithm in &self.algorithms {
                        for strategy in &strategies {
                            out.push(Scenario {
                                config: ConfigSpec {
                                    n,
                                    t,
                                    c: Some(c),
                                    d: None,
                                    l: Some(blocks * d),
                                },
                                algorithm,
                                strategy: strategy.clone(),
                                repetitions: self.repetitions,
                                seed: self.seed,
                                input: None,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub struct SweepResult {
    /// Scenario and its repetitions, in grid order.
    pub runs: Vec<(Scenario, Vec<RunResult>)>,
    /// Points rejected before running, with the reason.
    pub skipped: Vec<(Scenario, String)>,
}

pub fn sweep(grid: &Grid) -> Result<SweepResult, RunError> {
    let mut valid = Vec::new();
    let mut skipped = Vec::new();
    for s in grid.scenarios() {
        match s.validate() {
            Ok(()) => valid.push(s),
            Err(e) => skipped.push((s, e.to_string())),
        }
    }
    let jobs: Vec<(usize, Prepared)> = valid
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.repetitions).map(move |r| (i, s.prepare(r).expect("validated"))))
        .collect();
    let results: Vec<(usize, RunResult)> = jobs
        .par_iter()
        .map(|(i, p)| run_prepared(&valid[*i], p).map(|r| (*i, r)))
        .collect::<Result<_, _>>()?;
    let mut runs: Vec<(Scenario, Vec<RunResult>)> = valid.into_iter().map(|s| (s, Vec::new())).collect();
    for (i, r) in results {
        runs[i].1.push(r);
    }
    Ok(SweepResult { runs, skipped })
}
