use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selbb_core::adversary::{AdversaryError, StrategyKind};
use selbb_core::sim::ConfigError;
use selbb_core::{Bits, NodeId, StrategySpec, SystemConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid strategy: {0}")]
    Strategy(#[from] AdversaryError),
    #[error("input has {got} bits, configuration says {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("input is not a bit string: {0}")]
    BadInput(String),
    #[error("node ids start at 1")]
    ZeroNodeId,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("L = {l} is not a multiple of D = {d}")]
    NotWholeGenerations { l: usize, d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    DisputeBb,
    Algo2,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::DisputeBb => "dispute_bb",
            Algorithm::Algo2 => "algo2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub n: usize,
    pub t: usize,
    /// Symbol width; the smallest width with `2^c > n` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u8>,
    /// Block size, checked against `c (n - 2t)` when present.
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Input size; one block when absent.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub name: String,
    /// Explicit corrupt node ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<Vec<u16>>,
    /// `symbol_corruptor`: lie to every receiver instead of one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_receivers: Option<bool>,
    /// `randomized_byzantine`: fixed seed instead of the repetition seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl StrategyParams {
    pub fn named(name: &str) -> Self {
        StrategyParams {
            name: name.to_string(),
            corrupt: None,
            all_receivers: None,
            seed: None,
        }
    }

    pub fn spec(&self, repetition_seed: u64) -> Result<StrategySpec, ScenarioError> {
        let mut spec = StrategySpec::from_name(&self.name, self.seed.unwrap_or(repetition_seed))?;
        if let (StrategyKind::SymbolCorruptor { .. }, Some(all)) = (spec.kind, self.all_receivers) {
            spec.kind = StrategyKind::SymbolCorruptor { all_receivers: all };
        }
        if let Some(ids) = &self.corrupt {
            if ids.contains(&0) {
                return Err(ScenarioError::ZeroNodeId);
            }
            spec = spec.with_corrupt(ids.iter().map(|&id| NodeId::new(id)));
        }
        Ok(spec)
    }

    pub fn label(&self) -> String {
        self.name.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ConfigSpec,
    pub algorithm: Algorithm,
    pub strategy: StrategyParams,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Base seed; repetition `r` uses `seed + r`.
    #[serde(default)]
    pub seed: u64,
    /// Source input as a bit string; seeded random bits when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
}

fn one() -> usize {
    1
}

/// Everything needed to run one repetition.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub repetition: usize,
    pub seed: u64,
    pub config: SystemConfig,
    pub strategy: StrategySpec,
    pub input: Bits,
}

impl Scenario {
    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        self.seed.wrapping_add(repetition as u64)
    }

    /// Short name used in trace file names.
    pub fn label(&self) -> String {
        format!(
            "{}_{}_n{}_t{}",
            self.algorithm.as_str(),
            self.strategy.label(),
            self.config.n,
            self.config.t
        )
    }

    fn system_config(&self, seed: u64) -> Result<SystemConfig, ScenarioError> {
        let ConfigSpec { n, t, c, d, l } = self.config;
        let c = c.unwrap_or_else(|| SystemConfig::minimal_width(n));
        let block = usize::from(c) * n.saturating_sub(2 * t);
        let l = l.unwrap_or(block);
        let cfg = match d {
            Some(d) => SystemConfig::with_block_bits(n, t, c, d, l, seed)?,
            None => SystemConfig::new(n, t, c, l, seed)?,
        };
        if self.algorithm == Algorithm::DisputeBb && cfg.generations().is_err() {
            return Err(ScenarioError::NotWholeGenerations {
                l,
                d: cfg.block_bits(),
            });
        }
        Ok(cfg)
    }

    /// Checks the whole scenario before anything runs.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.repetitions == 0 {
            return Err(ScenarioError::NoRepetitions);
        }
        for r in 0..self.repetitions {
            self.prepare(r)?;
        }
        Ok(())
    }

    pub fn prepare(&self, repetition: usize) -> Result<Prepared, ScenarioError> {
        let seed = self.repetition_seed(repetition);
        let config = self.system_config(seed)?;
        let strategy = self.strategy.spec(seed)?;
        strategy.corrupt_set(&config)?;
        let input = match &self.input {
            Some(s) => {
                let bits: Bits = s.parse().map_err(|_| ScenarioError::BadInput(s.clone()))?;
                if bits.len() != config.input_bits() {
                    return Err(ScenarioError::InputLength {
                        expected: config.input_bits(),
                        got: bits.len(),
                    });
                }
                bits
            }
            None => random_input(seed, config.input_bits()),
        };
        Ok(Prepared {
            repetition,
            seed,
            config,
            strategy,
            input,
        })
    }
}

pub fn random_input(seed: u64, len: usize) -> Bits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0123_4567_89ab_cdef);
    (0..len).map(|_| rng.random::<bool>()).collect()
}
