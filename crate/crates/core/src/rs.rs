//! The (n, n - 2t) Reed-Solomon code used for error *detection*.
//!
//! A data block of `n - 2t` symbols is read as the coefficients of a
//! polynomial of degree below `n - 2t`; codeword position `j` (1-based) is
//! that polynomial evaluated at `alpha^(j-1)`, `alpha` the field generator.
//! Any `n - 2t` positions determine the block, and two distinct codewords
//! agree on at most `n - 2t - 1` positions.

use alloc::vec::Vec;

use thiserror::Error;

use crate::bits::Bits;
use crate::gf::{FieldError, FieldSpec, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("code length {n} exceeds the {max} distinct nonzero points of the field")]
    TooLong { n: usize, max: u32 },
    #[error("code needs n > 2t (n = {n}, t = {t})")]
    NoDataSymbols { n: usize, t: usize },
    #[error("expected {expected} symbols, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("symbol {0} is not an element of the field")]
    SymbolOutOfRange(Symbol),
    #[error("subset must hold {expected} distinct non-null positions")]
    BadSubset { expected: usize },
    #[error("view has {present} non-null symbols, fewer than the {needed} required")]
    Underfull { present: usize, needed: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The `n - 2t` data symbols of one generation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DataBlock(Vec<Symbol>);

impl DataBlock {
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn to_bits(&self, width: u8) -> Bits {
        let mut b = Bits::new();
        for &s in &self.0 {
            b.push_uint(u32::from(s), width);
        }
        b
    }
}

/// The `n` coded symbols of a data block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword(Vec<Symbol>);

impl Codeword {
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    /// Symbol at 1-based `position`.
    pub fn at(&self, position: usize) -> Symbol {
        self.0[position - 1]
    }
}

/// A node's view of a codeword: one entry per position, `None` for the
/// null symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialView(Vec<Option<Symbol>>);

impl PartialView {
    pub fn new(entries: Vec<Option<Symbol>>) -> Self {
        PartialView(entries)
    }

    pub fn full(cw: &Codeword) -> Self {
        PartialView(cw.0.iter().copied().map(Some).collect())
    }

    pub fn entries(&self) -> &[Option<Symbol>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry at 1-based `position`.
    pub fn get(&self, position: usize) -> Option<Symbol> {
        self.0.get(position - 1).copied().flatten()
    }

    pub fn set(&mut self, position: usize, value: Option<Symbol>) {
        self.0[position - 1] = value;
    }

    /// 1-based positions holding a symbol.
    pub fn present(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|_| i + 1))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Consistency {
    Consistent(DataBlock),
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCode {
    field: FieldSpec,
    n: usize,
    k: usize,
    points: Vec<Symbol>,
}

impl RsCode {
    pub fn new(field: FieldSpec, n: usize, t: usize) -> Result<Self, CodeError> {
        if n as u64 > u64::from(field.group_order()) {
            return Err(CodeError::TooLong {
                n,
                max: field.group_order(),
            });
        }
        if n <= 2 * t {
            return Err(CodeError::NoDataSymbols { n, t });
        }
        let alpha = field.generator();
        let points = (0..n as u32).map(|j| field.pow(alpha, j)).collect();
        Ok(RsCode {
            field,
            n,
            k: n - 2 * t,
            points,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of data symbols, `n - 2t`.
    pub fn data_len(&self) -> usize {
        self.k
    }

    /// Evaluation point of 1-based `position`.
    pub fn point(&self, position: usize) -> Symbol {
        self.points[position - 1]
    }

    /// Data payload in bits, `c (n - 2t)`.
    pub fn block_bits(&self) -> usize {
        self.k * usize::from(self.field.width())
    }

    pub fn data_block(&self, symbols: Vec<Symbol>) -> Result<DataBlock, CodeError> {
        if symbols.len() != self.k {
            return Err(CodeError::WrongLength {
                expected: self.k,
                got: symbols.len(),
            });
        }
        if let Some(&bad) = symbols.iter().find(|&&s| !self.field.contains(s)) {
            return Err(CodeError::SymbolOutOfRange(bad));
        }
        Ok(DataBlock(symbols))
    }

    pub fn zero_block(&self) -> DataBlock {
        DataBlock(alloc::vec![0; self.k])
    }

    /// Parses exactly `c (n - 2t)` bits into a block.
    pub fn block_from_bits(&self, bits: &Bits) -> Option<DataBlock> {
        if bits.len() != self.block_bits() {
            return None;
        }
        let w = self.field.width();
        let symbols = (0..self.k)
            .map(|i| bits.read_uint(i * usize::from(w), w).map(|v| v as Symbol))
            .collect::<Option<Vec<_>>>()?;
        Some(DataBlock(symbols))
    }

    pub fn encode(&self, data: &DataBlock) -> Codeword {
        Codeword(self.points.iter().map(|&x| self.eval(&data.0, x)).collect())
    }

    /// Single coded symbol at 1-based `position`.
    pub fn encode_at(&self, data: &DataBlock, position: usize) -> Symbol {
        self.eval(&data.0, self.point(position))
    }

    fn eval(&self, coeffs: &[Symbol], x: Symbol) -> Symbol {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.field.add(self.field.mul(acc, x), c))
    }

    /// Recovers the block whose codeword agrees with `view` on `subset`
    /// (1-based positions) by solving the Vandermonde system.
    pub fn reconstruct(&self, view: &PartialView, subset: &[usize]) -> Result<DataBlock, CodeError> {
        let bad = || CodeError::BadSubset { expected: self.k };
        if subset.len() != self.k || view.len() != self.n {
            return Err(bad());
        }
        let mut seen = alloc::vec![false; self.n];
        let mut rows: Vec<Vec<Symbol>> = Vec::with_capacity(self.k);
        for &pos in subset {
            if pos == 0 || pos > self.n || seen[pos - 1] {
                return Err(bad());
            }
            seen[pos - 1] = true;
            let value = view.get(pos).ok_or_else(bad)?;
            let x = self.point(pos);
            let mut row: Vec<Symbol> = (0..self.k as u32).map(|e| self.field.pow(x, e)).collect();
            row.push(value);
            rows.push(row);
        }
        self.solve(rows).map(DataBlock)
    }

    /// Gauss-Jordan elimination on an augmented `k x (k+1)` system.
    fn solve(&self, mut rows: Vec<Vec<Symbol>>) -> Result<Vec<Symbol>, CodeError> {
        let f = &self.field;
        let k = self.k;
        for col in 0..k {
            let pivot = (col..k)
                .find(|&r| rows[r][col] != 0)
                .expect("distinct evaluation points give a nonsingular system");
            rows.swap(col, pivot);
            let inv = f.inv(rows[col][col])?;
            for v in rows[col].iter_mut() {
                *v = f.mul(*v, inv);
            }
            let pivot_row = rows[col].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != col && row[col] != 0 {
                    let factor = row[col];
                    for (v, &p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        *v = f.add(*v, f.mul(factor, p));
                    }
                }
            }
        }
        Ok(rows.into_iter().map(|r| r[k]).collect())
    }

    /// Decides whether a single codeword agrees with every non-null entry.
    ///
    /// Decodes from the first `n - 2t` present positions and re-encodes;
    /// by the minimum-distance property this gives the same verdict as
    /// decoding every `(n - 2t)`-subset and checking the solutions agree.
    pub fn consistency_check(&self, view: &PartialView) -> Result<Consistency, CodeError> {
        if view.len() != self.n {
            return Err(CodeError::WrongLength {
                expected: self.n,
                got: view.len(),
            });
        }
        let present = view.present();
        if present.len() < self.k {
            return Err(CodeError::Underfull {
                present: present.len(),
                needed: self.k,
            });
        }
        let data = self.reconstruct(view, &present[..self.k])?;
        let consistent = present[self.k..]
            .iter()
            .all(|&pos| view.get(pos) == Some(self.encode_at(&data, pos)));
        Ok(if consistent {
            Consistency::Consistent(data)
        } else {
            Consistency::Inconsistent
        })
    }
}
