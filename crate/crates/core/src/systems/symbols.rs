//! Driving symbol sequences on the four-state subshift.
//!
//! Symbols are read off the binary expansion `τ` of `1/√3`:
//! `ω_k = 1 + 2 τ_{k+25} + τ_{k+26}`, with `τ_i = 0` for `i ≤ 0`.

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Allowed transitions: row `s` lists which symbols may follow `s + 1`.
pub const ADJACENCY: [[bool; 4]; 4] = [
    [true, true, false, false],
    [false, false, true, true],
    [true, true, false, false],
    [false, false, true, true],
];

/// Offset between symbol index and expansion digit.
const DIGIT_OFFSET: i64 = 25;

/// The first `count` binary digits of `1/√3`, digit `i` at position `i - 1`.
///
/// Digit by digit: keep the largest `u` with `u / 2^k < 1/√3`, which is
/// the integer test `3u² < 4^k`.
pub fn inverse_sqrt3_digits(count: usize) -> Vec<u8> {
    let mut digits = Vec::with_capacity(count);
    let mut u = BigUint::from(0u32);
    let three = BigUint::from(3u32);
    for k in 1..=count {
        let trial = (&u << 1u32) + 1u32;
        let bound = BigUint::from(1u32) << (2 * k);
        if &three * &trial * &trial < bound {
            u = trial;
            digits.push(1);
        } else {
            u <<= 1u32;
            digits.push(0);
        }
    }
    digits
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    first: i64,
    symbols: Vec<u8>,
}

impl SymbolSequence {
    /// The driving sequence on the window `first..=last`.
    pub fn driving(first: i64, last: i64) -> Result<Self> {
        if last < first {
            return Err(Error::Config(format!("empty symbol window [{first}, {last}]")));
        }
        let top = (last + DIGIT_OFFSET + 1).max(0) as usize;
        let digits = inverse_sqrt3_digits(top);
        let tau = |i: i64| -> u8 {
            if i <= 0 {
                0
            } else {
                digits[i as usize - 1]
            }
        };
        let symbols = (first..=last)
            .map(|k| 1 + 2 * tau(k + DIGIT_OFFSET) + tau(k + DIGIT_OFFSET + 1))
            .collect();
        Ok(Self { first, symbols })
    }

    /// A sequence repeating `pattern` with `pattern[0]` at index 0.
    pub fn periodic(pattern: &[u8], first: i64, last: i64) -> Result<Self> {
        if pattern.is_empty() || last < first {
            return Err(Error::Config("periodic symbol pattern needs a symbol and a window".into()));
        }
        let p = pattern.len() as i64;
        let symbols = (first..=last)
            .map(|k| pattern[k.rem_euclid(p) as usize])
            .collect();
        Ok(Self { first, symbols })
    }

    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn last(&self) -> i64 {
        self.first + self.symbols.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> Result<u8> {
        if k < self.first || k > self.last() {
            return Err(Error::Precondition(format!(
                "symbol index {k} outside the window [{}, {}]",
                self.first,
                self.last()
            )));
        }
        Ok(self.symbols[(k - self.first) as usize])
    }

    /// Symbols `ω_start, …, ω_{start+len-1}`.
    pub fn slice(&self, start: i64, len: usize) -> Result<Vec<u8>> {
        (start..start + len as i64).map(|k| self.get(k)).collect()
    }

    /// Check every consecutive pair against [`ADJACENCY`].
    pub fn check_adjacency(&self) -> Result<()> {
        for (off, w) in self.symbols.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let ok = (1..=4).contains(&a)
                && (1..=4).contains(&b)
                && ADJACENCY[a as usize - 1][b as usize - 1];
            if !ok {
                return Err(Error::Precondition(format!(
                    "transition {a} -> {b} at index {} is not allowed",
                    self.first + off as i64
                )));
            }
        }
        Ok(())
    }
}
