//! Coefficient types for polynomial and linear-arithmetic cores.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

/// A commutative ring of coefficients with exact equality.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> {
    fn from_bigint(v: &BigInt) -> Self;
}

/// An exactly computable ordered field.
pub trait OrderedField: Coefficient + Ord + Signed {}

impl<T: Coefficient + Ord + Signed> OrderedField for T {}

impl Coefficient for BigRational {
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
}

impl Coefficient for BigInt {
    fn from_bigint(v: &BigInt) -> Self {
        v.clone()
    }
}

/// The prime field of order 2^61 - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp61(u64);

impl Fp61 {
    pub const MODULUS: u64 = (1 << 61) - 1;

    pub fn new(v: u64) -> Self {
        Fp61(v % Self::MODULUS)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn reduce(v: u128) -> u64 {
        let m = Self::MODULUS as u128;
        let folded = (v & m) + (v >> 61);
        let folded = (folded & m) + (folded >> 61);
        (folded % m) as u64
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp61(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; zero maps to zero.
    pub fn inv(self) -> Self {
        self.pow(Self::MODULUS - 2)
    }
}

impl fmt::Display for Fp61 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp61 {
    type Output = Fp61;
    fn add(self, o: Fp61) -> Fp61 {
        Fp61(Self::reduce(self.0 as u128 + o.0 as u128))
    }
}

impl Sub for Fp61 {
    type Output = Fp61;
    fn sub(self, o: Fp61) -> Fp61 {
        Fp61(Self::reduce(self.0 as u128 + (Self::MODULUS - o.0) as u128))
    }
}

impl Mul for Fp61 {
    type Output = Fp61;
    fn mul(self, o: Fp61) -> Fp61 {
        Fp61(Self::reduce(self.0 as u128 * o.0 as u128))
    }
}

impl Div for Fp61 {
    type Output = Fp61;
    fn div(self, o: Fp61) -> Fp61 {
        self * o.inv()
    }
}

impl Rem for Fp61 {
    type Output = Fp61;
    fn rem(self, _: Fp61) -> Fp61 {
        Fp61(0)
    }
}

impl Neg for Fp61 {
    type Output = Fp61;
    fn neg(self) -> Fp61 {
        Fp61(0) - self
    }
}

impl Zero for Fp61 {
    fn zero() -> Self {
        Fp61(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Fp61 {
    fn one() -> Self {
        Fp61(1)
    }
}

impl Num for Fp61 {
    type FromStrRadixErr = std::num::ParseIntError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        u64::from_str_radix(s, radix).map(Fp61::new)
    }
}

impl Coefficient for Fp61 {
    fn from_bigint(v: &BigInt) -> Self {
        let m = BigInt::from(Self::MODULUS);
        let r = ((v % &m) + &m) % &m;
        Fp61(u64::try_from(r).unwrap_or(0))
    }
}

/// Formats an exact rational as `n` or `n/d`.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `n` or `n/d` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            let n: BigInt = n.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_laws_spot_checks() {
        let a = Fp61::new(Fp61::MODULUS - 1);
        assert_eq!(a + Fp61(1), Fp61(0));
        assert_eq!(-Fp61(1), a);
        assert_eq!(a * a, Fp61(1));
        let x = Fp61::new(123_456_789_012);
        assert_eq!(x * x.inv(), Fp61(1));
        assert_eq!(Fp61::from_bigint(&BigInt::from(-1)), a);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_rational("-4"), Some(BigRational::from_integer((-4).into())));
        assert_eq!(parse_rational("1/0"), None);
    }
}
