use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// A natural-number literal as a little-endian bit list.
///
/// Canonical form: no trailing (most significant) zero bit, except that zero
/// itself is the single bit `[false]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<bool>", into = "Vec<bool>")]
pub struct Numeral(Vec<bool>);

impl Numeral {
    pub fn zero() -> Self {
        Numeral(vec![false])
    }

    pub fn one() -> Self {
        Numeral(vec![true])
    }

    /// Builds a numeral from arbitrary bits, trimming redundant high zeros.
    pub fn from_bits(mut bits: Vec<bool>) -> Self {
        while bits.len() > 1 && bits.last() == Some(&false) {
            bits.pop();
        }
        if bits.is_empty() {
            bits.push(false);
        }
        Numeral(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn is_canonical_bits(bits: &[bool]) -> bool {
        !bits.is_empty() && (bits.len() == 1 || bits.last() == Some(&true))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [false]
    }

    pub fn is_one(&self) -> bool {
        self.0 == [true]
    }

    pub fn from_u64(mut n: u64) -> Self {
        let mut bits = Vec::new();
        while n > 0 {
            bits.push(n & 1 == 1);
            n >>= 1;
        }
        Numeral::from_bits(bits)
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        let bits = (0..n.bits()).map(|i| n.bit(i)).collect();
        Numeral::from_bits(bits)
    }

    pub fn to_biguint(&self) -> BigUint {
        let bytes: Vec<u8> = self
            .0
            .chunks(8)
            .map(|c| c.iter().rev().fold(0u8, |acc, &b| (acc << 1) | b as u8))
            .collect();
        BigUint::from_bytes_le(&bytes)
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, b)| acc | ((*b as u64) << i)),
        )
    }

    pub fn parse_decimal(s: &str) -> Option<Self> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        BigUint::parse_bytes(s.as_bytes(), 10).map(|n| Numeral::from_biguint(&n))
    }

    fn bit(&self, i: usize) -> bool {
        self.0.get(i).copied().unwrap_or(false)
    }

    /// Ripple-carry addition (bit0/bit1 algebra).
    pub fn add(&self, other: &Numeral) -> Numeral {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n + 1);
        let mut carry = false;
        for i in 0..n {
            let (a, b) = (self.bit(i), other.bit(i));
            out.push(a ^ b ^ carry);
            carry = (a && b) || (carry && (a ^ b));
        }
        out.push(carry);
        Numeral::from_bits(out)
    }

    /// `self - other`, or `None` when `other > self`.
    pub fn checked_sub(&self, other: &Numeral) -> Option<Numeral> {
        if self.cmp_value(other) == Ordering::Less {
            return None;
        }
        let mut out = Vec::with_capacity(self.0.len());
        let mut borrow = false;
        for i in 0..self.0.len() {
            let (a, b) = (self.bit(i), other.bit(i));
            out.push(a ^ b ^ borrow);
            borrow = (!a && (b || borrow)) || (a && b && borrow);
        }
        Some(Numeral::from_bits(out))
    }

    pub fn mul(&self, other: &Numeral) -> Numeral {
        Numeral::from_biguint(&(self.to_biguint() * other.to_biguint()))
    }

    /// Square-and-multiply over the exponent bits.
    pub fn pow(&self, exp: &Numeral) -> Numeral {
        let base = self.to_biguint();
        let mut acc = BigUint::from(1u8);
        for i in (0..exp.0.len()).rev() {
            acc = &acc * &acc;
            if exp.0[i] {
                acc *= &base;
            }
        }
        Numeral::from_biguint(&acc)
    }

    pub fn cmp_value(&self, other: &Numeral) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }

    pub fn to_decimal(&self) -> String {
        self.to_biguint().to_string()
    }
}

impl Ord for Numeral {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl PartialOrd for Numeral {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<bool>> for Numeral {
    type Error = String;

    fn try_from(bits: Vec<bool>) -> Result<Self, Self::Error> {
        if Numeral::is_canonical_bits(&bits) {
            Ok(Numeral(bits))
        } else {
            Err("non-canonical numeral bit list".to_string())
        }
    }
}

impl From<Numeral> for Vec<bool> {
    fn from(n: Numeral) -> Self {
        n.0
    }
}

impl fmt::Display for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}", self.to_decimal()),
        }
    }
}
