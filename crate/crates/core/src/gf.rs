//! Arithmetic in GF(2^c) for a configurable symbol width.
//!
//! Elements are stored as bit patterns in a `u16`, so widths from 1 to 16
//! bits are supported. Addition is XOR; multiplication is carry-less
//! shift-and-XOR reduced modulo the field's reduction polynomial.

use core::fmt;

use thiserror::Error;

/// Raw symbol of a field of width at most 16 bits.
pub type Symbol = u16;

/// Widest supported field.
pub const MAX_WIDTH: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field width {0} is outside 1..=16")]
    UnsupportedWidth(u8),
    #[error("polynomial {poly:#x} does not have degree {width}")]
    WrongDegree { poly: u32, width: u8 },
    #[error("polynomial {0:#x} is reducible over GF(2)")]
    Reducible(u32),
    #[error("value {value} does not fit in {width} bits")]
    OutOfRange { value: u32, width: u8 },
    #[error("operands belong to different fields")]
    MismatchedField,
    #[error("zero has no multiplicative inverse")]
    DivisionByZero,
}

/// Primitive reduction polynomials, indexed by width. Bit `k` is the
/// coefficient of `x^k`.
const DEFAULT_POLYNOMIALS: [u32; MAX_WIDTH as usize + 1] = [
    0,
    0b11,      // x + 1
    0b111,     // x^2 + x + 1
    0b1011,    // x^3 + x + 1
    0x13,      // x^4 + x + 1
    0x25,      // x^5 + x^2 + 1
    0x43,      // x^6 + x + 1
    0x83,      // x^7 + x + 1
    0x11D,     // x^8 + x^4 + x^3 + x^2 + 1
    0x211,     // x^9 + x^4 + 1
    0x409,     // x^10 + x^3 + 1
    0x805,     // x^11 + x^2 + 1
    0x1053,    // x^12 + x^6 + x^4 + x + 1
    0x201B,    // x^13 + x^4 + x^3 + x + 1
    0x4443,    // x^14 + x^10 + x^6 + x + 1
    0x8003,    // x^15 + x + 1
    0x1100B,   // x^16 + x^12 + x^3 + x + 1
];

/// A binary extension field GF(2^c) fixed by its width and reduction
/// polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    width: u8,
    poly: u32,
    generator: Symbol,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.width, self.poly)
    }
}

impl FieldSpec {
    /// Builds the field of the given width with the fixed default polynomial.
    pub fn with_default_polynomial(width: u8) -> Result<Self, FieldError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(FieldError::UnsupportedWidth(width));
        }
        Self::new(width, DEFAULT_POLYNOMIALS[width as usize])
    }

    /// Builds a field from an explicit reduction polynomial, which must be
    /// irreducible of degree exactly `width`.
    pub fn new(width: u8, poly: u32) -> Result<Self, FieldError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(FieldError::UnsupportedWidth(width));
        }
        if degree(poly) != Some(u32::from(width)) {
            return Err(FieldError::WrongDegree { poly, width });
        }
        if !is_irreducible(poly) {
            return Err(FieldError::Reducible(poly));
        }
        let mut spec = FieldSpec {
            width,
            poly,
            generator: 1,
        };
        spec.generator = spec.find_generator();
        Ok(spec)
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, `2^c`.
    pub fn size(&self) -> u32 {
        1u32 << self.width
    }

    /// Order of the multiplicative group, `2^c - 1`.
    pub fn group_order(&self) -> u32 {
        self.size() - 1
    }

    /// The smallest element generating the multiplicative group.
    pub fn generator(&self) -> Symbol {
        self.generator
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value >= self.size() {
            return Err(FieldError::OutOfRange {
                value,
                width: self.width,
            });
        }
        Ok(FieldElement {
            value: value as Symbol,
            field: *self,
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            value: 0,
            field: *self,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1,
            field: *self,
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        u32::from(s) < self.size()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    /// Shift-and-XOR multiplication with interleaved reduction.
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        let top = 1u32 << self.width;
        let mut a = u32::from(a);
        let mut b = u32::from(b);
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 != 0 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        acc as Symbol
    }

    pub fn pow(&self, base: Symbol, mut exp: u32) -> Symbol {
        let mut result: Symbol = 1;
        let mut b = base;
        while exp > 0 {
            if exp & 1 != 0 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        result
    }

    /// Inverse via Fermat: `a^(2^c - 2)`.
    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.group_order() - 1))
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: Symbol) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }

    fn find_generator(&self) -> Symbol {
        let order = self.group_order();
        let factors = prime_factors(order);
        (1..self.size())
            .map(|v| v as Symbol)
            .find(|&g| factors.iter().all(|&p| self.pow(g, order / p) != 1))
            .expect("multiplicative group of a finite field is cyclic")
    }
}

/// A typed element that remembers which field it lives in.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: Symbol,
    field: FieldSpec,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> Symbol {
        self.value
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

fn same_field(a: &FieldElement, b: &FieldElement) -> Result<FieldSpec, FieldError> {
    if a.field != b.field {
        return Err(FieldError::MismatchedField);
    }
    Ok(a.field)
}

pub fn gf_add(a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
    let f = same_field(&a, &b)?;
    Ok(FieldElement {
        value: f.add(a.value, b.value),
        field: f,
    })
}

pub fn gf_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
    let f = same_field(&a, &b)?;
    Ok(FieldElement {
        value: f.mul(a.value, b.value),
        field: f,
    })
}

pub fn gf_inv(a: FieldElement) -> Result<FieldElement, FieldError> {
    Ok(FieldElement {
        value: a.field.inv(a.value)?,
        field: a.field,
    })
}

fn degree(p: u32) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(31 - p.leading_zeros())
    }
}

/// Remainder of carry-less polynomial division over GF(2).
fn poly_rem(mut num: u32, den: u32) -> u32 {
    let dd = degree(den).expect("nonzero divisor");
    while let Some(dn) = degree(num) {
        if dn < dd {
            break;
        }
        num ^= den << (dn - dd);
    }
    num
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(p: u32) -> bool {
    let Some(d) = degree(p) else { return false };
    if d == 0 {
        return false;
    }
    for dq in 1..=d / 2 {
        for q in (1u32 << dq)..(1u32 << (dq + 1)) {
            if poly_rem(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

fn prime_factors(mut m: u32) -> alloc::vec::Vec<u32> {
    let mut out = alloc::vec::Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}
