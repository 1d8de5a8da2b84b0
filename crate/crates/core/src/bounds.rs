//! Closed-form costs and lower bounds, in exact rationals, and checks of
//! measured traffic against them.

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::sim::{Phase, TrafficMeter};

pub type Rational = Ratio<u128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    Invalid(&'static str),
}

fn r(v: usize) -> Rational {
    Rational::from_integer(v as u128)
}

fn check_resilience(n: usize, t: usize) -> Result<(), BoundsError> {
    if n <= 3 * t {
        return Err(BoundsError::Invalid("need n >= 3t + 1"));
    }
    Ok(())
}

/// Bits fault-free nodes spend on one Detectable Broadcast of a `D`-bit
/// block: `D + (n - 1) D / (n - 2t)`.
pub fn detectable_cost_bits(n: usize, t: usize, d: usize) -> Result<Rational, BoundsError> {
    check_resilience(n, t)?;
    if d == 0 || !d.is_multiple_of(n - 2 * t) {
        return Err(BoundsError::Invalid("D must be a positive multiple of n - 2t"));
    }
    Ok(r(d) + r((n - 1) * d) / r(n - 2 * t))
}

/// Detectable Broadcast cost over an `L`-bit input:
/// `L (2n - 2t - 1) / (n - 2t)`.
pub fn total_bb_cost_bits(n: usize, t: usize, l: usize) -> Result<Rational, BoundsError> {
    check_resilience(n, t)?;
    Ok(r(l) * r(2 * n - 2 * t - 1) / r(n - 2 * t))
}

/// Per-bit cost factor `(2n - 2t - 1) / (n - 2t)`.
pub fn cost_ratio(n: usize, t: usize) -> Result<Rational, BoundsError> {
    check_resilience(n, t)?;
    Ok(r(2 * n - 2 * t - 1) / r(n - 2 * t))
}

/// Lower bound for static algorithms tolerating `f` faults:
/// `L + (n - 1) L / (n - f)`.
pub fn static_db_lower_bound_bits(n: usize, f: usize, l: usize) -> Result<Rational, BoundsError> {
    if f >= n {
        return Err(BoundsError::Invalid("need f < n"));
    }
    Ok(r(l) + r((n - 1) * l) / r(n - f))
}

/// Fewer than `t + 1` messages cannot suffice in the worst case.
pub fn message_lower_bound(t: usize) -> u64 {
    t as u64 + 1
}

/// Message count `M_*(n')` of the base algorithm at the bottom of the
/// recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCost {
    /// `n'^k`.
    Power(u32),
}

impl BaseCost {
    pub fn eval(self, n: Rational) -> Rational {
        match self {
            BaseCost::Power(k) => (0..k).fold(Rational::one(), |acc, _| acc * n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularBoundParams {
    /// Branching factor, `2 <= B <= t + 1`.
    pub b: u32,
    /// Recursion level, `0 <= i <= log_B t`.
    pub i: u32,
    pub alpha: Rational,
    pub m_star: BaseCost,
}

/// `B^i M_*(3t / B^i + 1) + alpha B t i`.
pub fn modular_bound(params: ModularBoundParams, t: usize) -> Result<Rational, BoundsError> {
    let ModularBoundParams { b, i, alpha, m_star } = params;
    if b < 2 || b as usize > t + 1 {
        return Err(BoundsError::Invalid("need 2 <= B <= t + 1"));
    }
    let bi = (b as u128)
        .checked_pow(i)
        .ok_or(BoundsError::Invalid("B^i overflows"))?;
    if bi > t as u128 {
        return Err(BoundsError::Invalid("need i <= log_B t"));
    }
    if alpha <= Rational::zero() {
        return Err(BoundsError::Invalid("alpha must be positive"));
    }
    let bi = Rational::from_integer(bi);
    let inner = r(3 * t) / bi + Rational::one();
    Ok(bi * m_star.eval(inner) + alpha * Rational::from_integer(b as u128) * r(t) * Rational::from_integer(i as u128))
}

/// Measured traffic set against the formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsReport {
    pub total_bb_cost_bits: Rational,
    /// Fault-free Detectable Broadcast bits do not exceed the formula.
    pub total_bb_cost_satisfied: bool,
    pub message_lower_bound: u64,
    pub message_lower_bound_satisfied: bool,
    /// With `f = t`. Applies to static algorithms only, so it is reported
    /// rather than required.
    pub static_db_lower_bound: Rational,
    pub static_db_lower_bound_satisfied: bool,
    pub input_bits_satisfied: bool,
}

pub fn check_measured(n: usize, t: usize, l: usize, meter: &TrafficMeter) -> Result<BoundsReport, BoundsError> {
    let total = total_bb_cost_bits(n, t, l)?;
    let stat = static_db_lower_bound_bits(n, t, l)?;
    let db_bits = meter.phase(Phase::Db).honest.bits;
    let honest = meter.honest();
    Ok(BoundsReport {
        total_bb_cost_satisfied: Rational::from_integer(db_bits as u128) <= total,
        total_bb_cost_bits: total,
        message_lower_bound: message_lower_bound(t),
        message_lower_bound_satisfied: honest.messages >= message_lower_bound(t),
        static_db_lower_bound_satisfied: Rational::from_integer(honest.bits as u128) >= stat,
        static_db_lower_bound: stat,
        input_bits_satisfied: honest.bits >= l as u64,
    })
}
