use core::fmt;

use thiserror::Error;

use crate::gf::{FieldError, FieldSpec, MAX_WIDTH};
use crate::rs::{CodeError, RsCode};

/// A node identity, `1..=n`. Node 1 is the source.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u16);

impl NodeId {
    pub const SOURCE: NodeId = NodeId(1);

    pub fn new(id: u16) -> Self {
        assert!(id >= 1, "node ids start at 1");
        NodeId(id)
    }

    pub fn get(self) -> u16 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0) - 1
    }

    pub fn is_source(self) -> bool {
        self == Self::SOURCE
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("n = {n} is below 3t + 1 for t = {t}")]
    TooManyFaults { n: usize, t: usize },
    #[error("need at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("n = {n} exceeds 2^c - 1 for c = {c}")]
    FieldTooSmall { n: usize, c: u8 },
    #[error("block size must be c(n - 2t) = {expected} bits, got {got}")]
    BlockMismatch { expected: usize, got: usize },
    #[error("input length must be positive")]
    EmptyInput,
    #[error("input length {input_bits} is not a multiple of the block size {block_bits}")]
    InputNotMultiple { input_bits: usize, block_bits: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// System parameters `(n, t, c, D, L)` plus the run's RNG seed.
///
/// Construction enforces `n >= 3t + 1`, `n <= 2^c - 1` and `D = c(n - 2t)`.
/// Whether `L` is a multiple of `D` is only required by the generation-based
/// protocol and is checked by [`SystemConfig::generations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemConfig {
    n: usize,
    t: usize,
    c: u8,
    block_bits: usize,
    input_bits: usize,
    seed: u64,
}

impl SystemConfig {
    pub fn new(n: usize, t: usize, c: u8, input_bits: usize, seed: u64) -> Result<Self, ConfigError> {
        if n < 2 {
            return Err(ConfigError::TooFewNodes(n));
        }
        if n < 3 * t + 1 {
            return Err(ConfigError::TooManyFaults { n, t });
        }
        if c == 0 || c > MAX_WIDTH {
            return Err(FieldError::UnsupportedWidth(c).into());
        }
        if n as u64 > (1u64 << c) - 1 {
            return Err(ConfigError::FieldTooSmall { n, c });
        }
        if input_bits == 0 {
            return Err(ConfigError::EmptyInput);
        }
        Ok(SystemConfig {
            n,
            t,
            c,
            block_bits: usize::from(c) * (n - 2 * t),
            input_bits,
            seed,
        })
    }

    /// Like [`SystemConfig::new`] but also checks an explicitly given `D`.
    pub fn with_block_bits(
        n: usize,
        t: usize,
        c: u8,
        block_bits: usize,
        input_bits: usize,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        let cfg = Self::new(n, t, c, input_bits, seed)?;
        if cfg.block_bits != block_bits {
            return Err(ConfigError::BlockMismatch {
                expected: cfg.block_bits,
                got: block_bits,
            });
        }
        Ok(cfg)
    }

    /// Smallest symbol width with `n <= 2^c - 1`.
    pub fn minimal_width(n: usize) -> u8 {
        (1..=MAX_WIDTH)
            .find(|&c| (n as u64) < (1u64 << c))
            .unwrap_or(MAX_WIDTH)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn symbol_bits(&self) -> u8 {
        self.c
    }

    /// `D`, bits per generation.
    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    /// `L`, bits of the source input.
    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SystemConfig { seed, ..self.clone() }
    }

    /// `L / D`, failing when `D` does not divide `L`.
    pub fn generations(&self) -> Result<usize, ConfigError> {
        if !self.input_bits.is_multiple_of(self.block_bits) {
            return Err(ConfigError::InputNotMultiple {
                input_bits: self.input_bits,
                block_bits: self.block_bits,
            });
        }
        Ok(self.input_bits / self.block_bits)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + Clone {
        (1..=self.n as u16).map(NodeId)
    }

    pub fn peers(&self) -> impl Iterator<Item = NodeId> + Clone {
        (2..=self.n as u16).map(NodeId)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        usize::from(id.0) <= self.n
    }

    pub fn field(&self) -> FieldSpec {
        FieldSpec::with_default_polynomial(self.c).expect("width validated at construction")
    }

    pub fn code(&self) -> RsCode {
        RsCode::new(self.field(), self.n, self.t).expect("parameters validated at construction")
    }
}
