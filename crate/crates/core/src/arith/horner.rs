//! Sparse Horner normal form for commutative polynomials.

use std::fmt;

use crate::scalar::Coefficient;

/// `Const(c)`, or `base * x_var ^ exp + addend`.
///
/// Canonical by construction: `base` is never zero, a base that is itself
/// `b * x_var ^ e + 0` is merged into the exponent, and `addend` only
/// mentions variables with a larger index than `var`.
#[derive(Debug, Clone, PartialEq)]
pub enum HornerPoly<C> {
    Const(C),
    Horner {
        base: Box<HornerPoly<C>>,
        var: usize,
        exp: u32,
        addend: Box<HornerPoly<C>>,
    },
}

impl<C: Coefficient> HornerPoly<C> {
    pub fn constant(c: C) -> Self {
        HornerPoly::Const(c)
    }

    pub fn zero() -> Self {
        HornerPoly::Const(C::zero())
    }

    pub fn one() -> Self {
        HornerPoly::Const(C::one())
    }

    pub fn var(v: usize) -> Self {
        Self::mk(Self::one(), v, 1, Self::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, HornerPoly::Const(c) if c.is_zero())
    }

    fn mk(base: Self, var: usize, exp: u32, addend: Self) -> Self {
        if base.is_zero() {
            return addend;
        }
        if let HornerPoly::Horner {
            base: b2,
            var: v2,
            exp: e2,
            addend: a2,
        } = &base
        {
            if *v2 == var && a2.is_zero() {
                return HornerPoly::Horner {
                    base: b2.clone(),
                    var,
                    exp: exp + e2,
                    addend: Box::new(addend),
                };
            }
        }
        HornerPoly::Horner {
            base: Box::new(base),
            var,
            exp,
            addend: Box::new(addend),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        use HornerPoly::*;
        match (self, other) {
            (Const(a), Const(b)) => Const(a.clone() + b.clone()),
            (Const(_), Horner { base, var, exp, addend }) | (Horner { base, var, exp, addend }, Const(_)) => {
                let c = if matches!(self, Const(_)) { self } else { other };
                Self::mk((**base).clone(), *var, *exp, addend.add(c))
            }
            (
                Horner { base: b1, var: v1, exp: e1, addend: a1 },
                Horner { base: b2, var: v2, exp: e2, addend: a2 },
            ) => {
                if v1 < v2 {
                    Self::mk((**b1).clone(), *v1, *e1, a1.add(other))
                } else if v2 < v1 {
                    Self::mk((**b2).clone(), *v2, *e2, a2.add(self))
                } else {
                    let v = *v1;
                    let (e, base) = match e1.cmp(e2) {
                        std::cmp::Ordering::Equal => (*e1, b1.add(b2)),
                        std::cmp::Ordering::Less => (*e1, b1.add(&Self::mk((**b2).clone(), v, e2 - e1, Self::zero()))),
                        std::cmp::Ordering::Greater => (*e2, b2.add(&Self::mk((**b1).clone(), v, e1 - e2, Self::zero()))),
                    };
                    Self::mk(base, v, e, a1.add(a2))
                }
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        match self {
            HornerPoly::Const(a) => HornerPoly::Const(a.clone() * c.clone()),
            HornerPoly::Horner { base, var, exp, addend } => {
                Self::mk(base.scale(c), *var, *exp, addend.scale(c))
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        use HornerPoly::*;
        match (self, other) {
            (Const(a), _) => other.scale(a),
            (_, Const(b)) => self.scale(b),
            (
                Horner { base: b1, var: v1, exp: e1, addend: a1 },
                Horner { base: b2, var: v2, exp: e2, addend: a2 },
            ) => {
                if v1 < v2 {
                    Self::mk(b1.mul(other), *v1, *e1, a1.mul(other))
                } else if v2 < v1 {
                    Self::mk(b2.mul(self), *v2, *e2, a2.mul(self))
                } else {
                    let v = *v1;
                    let top = Self::mk(b1.mul(b2), v, e1 + e2, Self::zero());
                    let left = Self::mk(b1.mul(a2), v, *e1, Self::zero());
                    let right = Self::mk(a1.mul(b2), v, *e2, Self::zero());
                    top.add(&left).add(&right).add(&a1.mul(a2))
                }
            }
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, point: &[C]) -> C {
        match self {
            HornerPoly::Const(c) => c.clone(),
            HornerPoly::Horner { base, var, exp, addend } => {
                let x = point[*var].clone();
                let mut p = C::one();
                for _ in 0..*exp {
                    p = p * x.clone();
                }
                base.eval(point) * p + addend.eval(point)
            }
        }
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        match self {
            HornerPoly::Const(_) => 0,
            HornerPoly::Horner { base, exp, addend, .. } => (base.degree() + exp).max(addend.degree()),
        }
    }

    /// Checks the structural invariants.
    pub fn is_canonical(&self) -> bool {
        self.canonical_above(None)
    }

    fn canonical_above(&self, bound: Option<usize>) -> bool {
        match self {
            HornerPoly::Const(_) => true,
            HornerPoly::Horner { base, var, exp, addend } => {
                if bound.is_some_and(|b| *var <= b) || *exp == 0 || base.is_zero() {
                    return false;
                }
                if let HornerPoly::Horner { var: bv, addend: ba, .. } = &**base {
                    if bv == var && ba.is_zero() {
                        return false;
                    }
                }
                let base_ok = base.canonical_above(var.checked_sub(1).or(bound));
                base_ok && base.min_var().map_or(true, |m| m >= *var) && addend.canonical_above(Some(*var))
            }
        }
    }

    fn min_var(&self) -> Option<usize> {
        match self {
            HornerPoly::Const(_) => None,
            HornerPoly::Horner { var, .. } => Some(*var),
        }
    }

    /// Maps the coefficients into another ring.
    pub fn map<D: Coefficient>(&self, f: &impl Fn(&C) -> D) -> HornerPoly<D> {
        match self {
            HornerPoly::Const(c) => HornerPoly::Const(f(c)),
            HornerPoly::Horner { base, var, exp, addend } => {
                HornerPoly::<D>::mk(base.map(f), *var, *exp, addend.map(f))
            }
        }
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for HornerPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HornerPoly::Const(c) => write!(f, "{c}"),
            HornerPoly::Horner { base, var, exp, addend } => {
                write!(f, "({base})*x{var}")?;
                if *exp != 1 {
                    write!(f, "^{exp}")?;
                }
                if !addend.is_zero() {
                    write!(f, " + {addend}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    type P = HornerPoly<BigInt>;

    fn c(v: i64) -> P {
        P::constant(BigInt::from(v))
    }

    #[test]
    fn binomial_square() {
        let (x, y) = (P::var(0), P::var(1));
        let lhs = x.add(&y).pow(2);
        let rhs = x.pow(2).add(&c(2).mul(&x).mul(&y)).add(&y.pow(2));
        assert_eq!(lhs, rhs);
        assert!(lhs.is_canonical());
        assert_eq!(lhs.degree(), 2);
    }

    #[test]
    fn cancellation_gives_zero() {
        let x = P::var(0);
        assert!(x.sub(&x).is_zero());
        let p = x.add(&c(1)).mul(&x.sub(&c(1)));
        assert_eq!(p, x.pow(2).sub(&c(1)));
    }

    #[derive(Debug, Clone)]
    enum E {
        C(i64),
        V(usize),
        Add(Box<E>, Box<E>),
        Mul(Box<E>, Box<E>),
        Neg(Box<E>),
    }

    fn expr() -> impl Strategy<Value = E> {
        let leaf = prop_oneof![(-3i64..4).prop_map(E::C), (0usize..3).prop_map(E::V)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| E::Mul(Box::new(a), Box::new(b))),
                inner.prop_map(|a| E::Neg(Box::new(a))),
            ]
        })
    }

    fn build(e: &E) -> P {
        match e {
            E::C(v) => c(*v),
            E::V(i) => P::var(*i),
            E::Add(a, b) => build(a).add(&build(b)),
            E::Mul(a, b) => build(a).mul(&build(b)),
            E::Neg(a) => build(a).neg(),
        }
    }

    fn direct(e: &E, pt: &[i64]) -> BigInt {
        match e {
            E::C(v) => BigInt::from(*v),
            E::V(i) => BigInt::from(pt[*i]),
            E::Add(a, b) => direct(a, pt) + direct(b, pt),
            E::Mul(a, b) => direct(a, pt) * direct(b, pt),
            E::Neg(a) => -direct(a, pt),
        }
    }

    proptest! {
        #[test]
        fn canonical_and_evaluates_correctly(e in expr(), pt in proptest::collection::vec(-5i64..6, 3)) {
            let p = build(&e);
            prop_assert!(p.is_canonical());
            let point: Vec<BigInt> = pt.iter().map(|&v| BigInt::from(v)).collect();
            prop_assert_eq!(p.eval(&point), direct(&e, &pt));
        }

        #[test]
        fn ring_laws_hold_structurally(a in expr(), b in expr(), d in expr()) {
            let (a, b, d) = (build(&a), build(&b), build(&d));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&d)), a.mul(&b).add(&a.mul(&d)));
        }
    }
}
