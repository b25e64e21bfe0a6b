//! Strings over a finite alphabet and the restrict/splice primitives.
//!
//! A [`DitString`] is the basis-state label used everywhere in this crate:
//! an ordered sequence of symbols from `{0, .., q-1}`. Positions are
//! 0-indexed. Restriction and splicing against an ordered position list
//! form the projection/overwrite pair that all class arithmetic is built on.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Symbol set `{0, .., q-1}` for one qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    q: u32,
}

impl Alphabet {
    /// Maximum supported symbol count (symbols are stored as `u8`).
    pub const MAX_Q: u32 = 256;

    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::Validation(format!("alphabet size must be >= 2, got {q}")));
        }
        if q > Self::MAX_Q {
            return Err(Error::Validation(format!(
                "alphabet size must be <= {}, got {q}",
                Self::MAX_Q
            )));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn contains(&self, symbol: u8) -> bool {
        u32::from(symbol) < self.q
    }

    /// `q^len`, or an error when it exceeds `usize`.
    pub fn dim(&self, len: usize) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..len {
            dim = dim
                .checked_mul(self.q as usize)
                .ok_or_else(|| Error::TooLarge(format!("q^{len} overflows usize")))?;
        }
        Ok(dim)
    }

    /// Basis index of `x`: big-endian, leftmost symbol most significant.
    pub fn index_of(&self, x: &DitString) -> usize {
        let mut idx = 0usize;
        for &s in x.symbols() {
            idx = idx * self.q as usize + s as usize;
        }
        idx
    }

    /// Inverse of [`Alphabet::index_of`] for strings of length `len`.
    pub fn string_at(&self, mut index: usize, len: usize) -> DitString {
        let mut symbols = vec![0u8; len];
        for i in (0..len).rev() {
            symbols[i] = (index % self.q as usize) as u8;
            index /= self.q as usize;
        }
        DitString::new(symbols)
    }

    /// All strings of length `len` in lexicographic (= index) order.
    pub fn strings(&self, len: usize) -> impl Iterator<Item = DitString> + '_ {
        let dim = self.dim(len).expect("dimension overflow");
        (0..dim).map(move |i| self.string_at(i, len))
    }

    /// Checks that every symbol of `x` is a valid digit.
    pub fn validate(&self, x: &DitString) -> Result<()> {
        match x.symbols().iter().find(|&&s| !self.contains(s)) {
            None => Ok(()),
            Some(&s) => Err(Error::Validation(format!(
                "symbol {s} out of range for alphabet of size {}",
                self.q
            ))),
        }
    }
}

/// A string of `n` symbols over some [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DitString(Vec<u8>);

impl DitString {
    pub fn new(symbols: Vec<u8>) -> Self {
        Self(symbols)
    }

    /// The all-zeros string of length `n`.
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn symbol(&self, pos: usize) -> u8 {
        self.0[pos]
    }

    /// The substring of `self` on the listed positions, in list order.
    pub fn restrict(&self, positions: &[usize]) -> Result<DitString> {
        let mut out = Vec::with_capacity(positions.len());
        for &p in positions {
            let s = self
                .0
                .get(p)
                .ok_or_else(|| Error::Validation(format!("position {p} out of range")))?;
            out.push(*s);
        }
        Ok(DitString(out))
    }

    /// Overwrites the listed positions with `v`, leaving the rest unchanged.
    pub fn splice(&self, positions: &[usize], v: &DitString) -> Result<DitString> {
        if positions.len() != v.len() {
            return Err(Error::Validation(format!(
                "splice arity mismatch: {} positions vs {} symbols",
                positions.len(),
                v.len()
            )));
        }
        let mut out = self.0.clone();
        for (&p, &s) in positions.iter().zip(v.symbols()) {
            let slot = out
                .get_mut(p)
                .ok_or_else(|| Error::Validation(format!("position {p} out of range")))?;
            *slot = s;
        }
        Ok(DitString(out))
    }
}

impl fmt::Display for DitString {
    /// Digit rendering when every symbol fits a single digit, otherwise a
    /// comma-separated list (matching the file format for q > 10).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for &s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "[{}]", parts.join(","))
        }
    }
}

impl FromStr for DitString {
    type Err = Error;

    /// Parses a digit string like `0011`. Symbols above 9 must use the
    /// array form of the file format instead.
    fn from_str(s: &str) -> Result<Self> {
        let mut symbols = Vec::with_capacity(s.len());
        for c in s.chars() {
            let d = c
                .to_digit(10)
                .ok_or_else(|| Error::Parse(format!("invalid digit {c:?} in dit string")))?;
            symbols.push(d as u8);
        }
        Ok(DitString(symbols))
    }
}
