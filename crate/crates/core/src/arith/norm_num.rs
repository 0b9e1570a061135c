//! Literal arithmetic by lemma steps over binary numerals.
//!
//! Evaluation never runs the sort's own operations: every intermediate value
//! is a [`Numeral`] computed by bit-level algorithms and recorded as a fact
//! (`a + b = c`, `a * b = c`, ...). The checker replays the facts with an
//! independent big-integer implementation, so the same route works for
//! sorts such as `real` that have no executable arithmetic.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{sym, Numeral, Path, RelOp, Sort, Term};

/// Largest exponent accepted in a literal power.
pub const MAX_EXPONENT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("`{term}` at position {position:?} is not a literal")]
    NonLiteral { position: Path, term: String },
    #[error("`{0}` is not supported by norm_num")]
    Unsupported(String),
    #[error("negative value in sort nat at position {0:?}")]
    NegativeNat(Path),
    #[error("exponent {0} exceeds the limit of 65536")]
    ExponentTooLarge(String),
    #[error("`{0}` is not a relation")]
    NotARelation(String),
}

/// An integer as sign and binary magnitude. Zero is never negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedNum {
    pub neg: bool,
    pub mag: Numeral,
}

impl SignedNum {
    pub fn new(neg: bool, mag: Numeral) -> Self {
        let neg = neg && !mag.is_zero();
        SignedNum { neg, mag }
    }

    pub fn zero() -> Self {
        Self::new(false, Numeral::zero())
    }

    pub fn nat(mag: Numeral) -> Self {
        Self::new(false, mag)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(v < 0, Numeral::from_u64(v.unsigned_abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn negate(&self) -> Self {
        Self::new(!self.neg, self.mag.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.neg == other.neg {
            return Self::new(self.neg, self.mag.add(&other.mag));
        }
        match self.mag.cmp_value(&other.mag) {
            Ordering::Less => Self::new(other.neg, other.mag.checked_sub(&self.mag).unwrap()),
            _ => Self::new(self.neg, self.mag.checked_sub(&other.mag).unwrap()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.neg != other.neg, self.mag.mul(&other.mag))
    }

    pub fn pow(&self, e: &Numeral) -> Self {
        let odd = e.bits()[0];
        Self::new(self.neg && odd, self.mag.pow(e))
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.neg, other.neg) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.mag.cmp_value(&other.mag),
            (true, true) => other.mag.cmp_value(&self.mag),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        let m = BigInt::from(self.mag.to_biguint());
        if self.neg {
            -m
        } else {
            m
        }
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Self::new(v.is_negative(), Numeral::from_biguint(v.magnitude()))
    }

    /// The canonical literal term: `n` or `-n`.
    pub fn to_term(&self, sort: Sort) -> Term {
        let n = Term::numeral(self.mag.clone(), sort.clone());
        if self.neg {
            Term::op(sym::NEG, vec![n], sort)
        } else {
            n
        }
    }

    /// Reads a canonical literal term (`n` or `-n` with `n > 0`).
    pub fn from_term(t: &Term) -> Option<Self> {
        match t {
            Term::Num { value, .. } => Some(Self::nat(value.clone())),
            Term::Op { sym: s, args, .. } if s == sym::NEG && args.len() == 1 => match &args[0] {
                Term::Num { value, .. } if !value.is_zero() => Some(Self::new(true, value.clone())),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for SignedNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "-")?;
        }
        write!(f, "{}", self.mag)
    }
}

/// Three-way comparison outcome recorded in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Lt,
    Eq,
    Gt,
}

impl From<Ordering> for Cmp {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Cmp::Lt,
            Ordering::Equal => Cmp::Eq,
            Ordering::Greater => Cmp::Gt,
        }
    }
}

/// A primitive fact about numerals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "lemma", rename_all = "snake_case")]
pub enum NumStep {
    Add { a: SignedNum, b: SignedNum, c: SignedNum },
    Mul { a: SignedNum, b: SignedNum, c: SignedNum },
    Sub { a: SignedNum, b: SignedNum, c: SignedNum },
    /// Truncated subtraction in `nat`: `a ≤ b` so `a - b = 0`.
    SubTrunc { a: SignedNum, b: SignedNum },
    Neg { a: SignedNum, c: SignedNum },
    Pow { a: SignedNum, e: Numeral, c: SignedNum },
    /// A numeral keeps its value under a coercion.
    Cast { a: SignedNum },
    Compare { a: SignedNum, b: SignedNum, ord: Cmp },
    /// `b = a * q + r` with `0 ≤ r < |a|` (or `a = 0`, `q = 0`, `r = b`).
    DivMod { a: SignedNum, b: SignedNum, q: SignedNum, r: SignedNum },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumTrace {
    pub steps: Vec<NumStep>,
}

/// Outcome of deciding a literal relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelProof {
    pub lhs: SignedNum,
    pub rhs: SignedNum,
    pub holds: bool,
    pub trace: NumTrace,
}

fn is_nat(s: &Sort) -> bool {
    *s == Sort::nat()
}

struct Evaluator {
    steps: Vec<NumStep>,
}

impl Evaluator {
    fn eval(&mut self, t: &Term, path: &mut Path) -> Result<SignedNum, NumError> {
        let non_literal = |path: &Path| NumError::NonLiteral {
            position: path.clone(),
            term: t.to_string(),
        };
        match t {
            Term::Num { value, .. } => Ok(SignedNum::nat(value.clone())),
            Term::Var { .. } => Err(non_literal(path)),
            Term::Rel { .. } => Err(non_literal(path)),
            Term::Coerce { arg, .. } => {
                path.push(0);
                let a = self.eval(arg, path)?;
                path.pop();
                self.steps.push(NumStep::Cast { a: a.clone() });
                Ok(a)
            }
            Term::Op { sym: s, args, sort } => {
                let mut vals = Vec::with_capacity(args.len());
                match s.as_str() {
                    sym::ADD | sym::SUB | sym::MUL | sym::SMUL | sym::POW | sym::NEG => {}
                    other => {
                        if args.iter().all(|a| a.is_literal_expr()) || args.is_empty() {
                            return Err(NumError::Unsupported(other.to_string()));
                        }
                    }
                }
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    vals.push(self.eval(a, path)?);
                    path.pop();
                }
                let v = match (s.as_str(), vals.as_slice()) {
                    (sym::ADD, [a, b]) => {
                        let c = a.add(b);
                        self.steps.push(NumStep::Add { a: a.clone(), b: b.clone(), c: c.clone() });
                        c
                    }
                    (sym::MUL | sym::SMUL, [a, b]) => {
                        let c = a.mul(b);
                        self.steps.push(NumStep::Mul { a: a.clone(), b: b.clone(), c: c.clone() });
                        c
                    }
                    (sym::SUB, [a, b]) => {
                        if is_nat(sort) && a.cmp_value(b) != Ordering::Greater {
                            self.steps.push(NumStep::SubTrunc { a: a.clone(), b: b.clone() });
                            SignedNum::zero()
                        } else {
                            let c = a.sub(b);
                            self.steps.push(NumStep::Sub { a: a.clone(), b: b.clone(), c: c.clone() });
                            c
                        }
                    }
                    (sym::NEG, [a]) => {
                        if is_nat(sort) {
                            return Err(NumError::NegativeNat(path.clone()));
                        }
                        let c = a.negate();
                        self.steps.push(NumStep::Neg { a: a.clone(), c: c.clone() });
                        c
                    }
                    (sym::POW, [a, e]) => {
                        if e.neg {
                            return Err(NumError::NegativeNat(path.clone()));
                        }
                        if e.mag.to_u64().map_or(true, |v| v > MAX_EXPONENT) {
                            return Err(NumError::ExponentTooLarge(e.mag.to_decimal()));
                        }
                        let c = a.pow(&e.mag);
                        self.steps.push(NumStep::Pow { a: a.clone(), e: e.mag.clone(), c: c.clone() });
                        c
                    }
                    (other, _) => return Err(NumError::Unsupported(other.to_string())),
                };
                Ok(v)
            }
        }
    }
}

/// Evaluates a literal expression to a numeral with a replayable trace.
pub fn norm_num_eval(e: &Term) -> Result<(SignedNum, NumTrace), NumError> {
    let mut ev = Evaluator { steps: Vec::new() };
    let v = ev.eval(e, &mut Vec::new())?;
    Ok((v, NumTrace { steps: ev.steps }))
}

/// Decides a relation between literal expressions.
pub fn prove_rel(r: &Term) -> Result<RelProof, NumError> {
    let Term::Rel { op, lhs, rhs } = r else {
        return Err(NumError::NotARelation(r.to_string()));
    };
    if *op == RelOp::Eq && lhs.sort() == Sort::Prop {
        return Err(NumError::Unsupported("↔".into()));
    }
    let mut ev = Evaluator { steps: Vec::new() };
    let a = ev.eval(lhs, &mut vec![0])?;
    let b = ev.eval(rhs, &mut vec![1])?;
    let holds = match op {
        RelOp::Dvd => {
            let s = lhs.sort();
            if !(is_nat(&s) || s == Sort::int()) {
                return Err(NumError::Unsupported(format!("∣ over {s}")));
            }
            let (q, r) = div_mod(&a, &b);
            let holds = r.is_zero();
            ev.steps.push(NumStep::DivMod { a: a.clone(), b: b.clone(), q, r });
            holds
        }
        _ => {
            let ord = a.cmp_value(&b);
            ev.steps.push(NumStep::Compare {
                a: a.clone(),
                b: b.clone(),
                ord: ord.into(),
            });
            op.holds(&ord, &Ordering::Equal)
        }
    };
    Ok(RelProof {
        lhs: a,
        rhs: b,
        holds,
        trace: NumTrace { steps: ev.steps },
    })
}

/// Euclidean division of `b` by `a` on the bit representation.
fn div_mod(a: &SignedNum, b: &SignedNum) -> (SignedNum, SignedNum) {
    if a.is_zero() {
        return (SignedNum::zero(), b.clone());
    }
    // Long division, most significant bit first.
    let mut q_bits = vec![false; b.mag.bits().len()];
    let mut r = Numeral::zero();
    for i in (0..b.mag.bits().len()).rev() {
        let mut bits = vec![b.mag.bits()[i]];
        bits.extend_from_slice(r.bits());
        r = Numeral::from_bits(bits);
        if r.cmp_value(&a.mag) != Ordering::Less {
            r = r.checked_sub(&a.mag).unwrap();
            q_bits[i] = true;
        }
    }
    let mut q = SignedNum::new(a.neg != b.neg, Numeral::from_bits(q_bits));
    let mut rem = SignedNum::nat(r);
    if b.neg && !rem.is_zero() {
        // Adjust so the remainder is nonnegative.
        rem = SignedNum::nat(a.mag.checked_sub(&rem.mag).unwrap());
        q = if a.neg { q.add(&SignedNum::from_i64(1)) } else { q.sub(&SignedNum::from_i64(1)) };
    }
    (q, rem)
}

// ---------------------------------------------------------------------------
// Checking

fn big(n: &SignedNum) -> BigInt {
    let mag = BigUint::from_bytes_le(&bits_to_bytes(n.mag.bits()));
    BigInt::from_biguint(if n.neg { Sign::Minus } else { Sign::Plus }, mag)
}

fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, b)| acc | ((*b as u8) << i)))
        .collect()
}

fn canonical(n: &SignedNum) -> Result<(), String> {
    if !Numeral::is_canonical_bits(n.mag.bits()) || (n.neg && n.mag.is_zero()) {
        return Err(format!("non-canonical numeral {n}"));
    }
    Ok(())
}

struct Replayer<'a> {
    steps: std::slice::Iter<'a, NumStep>,
    index: usize,
}

impl Replayer<'_> {
    fn next(&mut self) -> Result<&NumStep, String> {
        self.index += 1;
        self.steps
            .next()
            .ok_or_else(|| "trace ends before the expression is evaluated".to_string())
    }

    fn expect(&self, what: &str, claimed: &SignedNum, actual: &BigInt) -> Result<(), String> {
        canonical(claimed)?;
        if big(claimed) != *actual {
            return Err(format!(
                "step {}: {what} operand {claimed} does not match computed value {actual}",
                self.index
            ));
        }
        Ok(())
    }

    fn fact(&self, ok: bool, what: &str) -> Result<(), String> {
        if ok {
            Ok(())
        } else {
            Err(format!("step {}: {what} fact does not hold", self.index))
        }
    }

    fn replay(&mut self, t: &Term) -> Result<BigInt, String> {
        match t {
            Term::Num { value, .. } => {
                if !Numeral::is_canonical_bits(value.bits()) {
                    return Err("non-canonical numeral in expression".into());
                }
                Ok(BigInt::from(BigUint::from_bytes_le(&bits_to_bytes(value.bits()))))
            }
            Term::Coerce { arg, .. } => {
                let v = self.replay(arg)?;
                match self.next()?.clone() {
                    NumStep::Cast { a } => {
                        self.expect("cast", &a, &v)?;
                        Ok(v)
                    }
                    s => Err(format!("step {}: expected a cast step, found {s:?}", self.index)),
                }
            }
            Term::Op { sym: s, args, sort } => {
                let vals = args
                    .iter()
                    .map(|a| self.replay(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let step = self.next()?.clone();
                match (s.as_str(), vals.as_slice(), step) {
                    (sym::ADD, [x, y], NumStep::Add { a, b, c }) => {
                        self.expect("left", &a, x)?;
                        self.expect("right", &b, y)?;
                        canonical(&c)?;
                        self.fact(big(&c) == x + y, "addition")?;
                        Ok(big(&c))
                    }
                    (sym::MUL | sym::SMUL, [x, y], NumStep::Mul { a, b, c }) => {
                        self.expect("left", &a, x)?;
                        self.expect("right", &b, y)?;
                        canonical(&c)?;
                        self.fact(big(&c) == x * y, "multiplication")?;
                        Ok(big(&c))
                    }
                    (sym::SUB, [x, y], NumStep::Sub { a, b, c }) => {
                        self.expect("left", &a, x)?;
                        self.expect("right", &b, y)?;
                        canonical(&c)?;
                        self.fact(big(&c) + y == *x, "subtraction")?;
                        if is_nat(sort) {
                            self.fact(!c.neg, "nat subtraction")?;
                        }
                        Ok(big(&c))
                    }
                    (sym::SUB, [x, y], NumStep::SubTrunc { a, b }) => {
                        self.expect("left", &a, x)?;
                        self.expect("right", &b, y)?;
                        self.fact(is_nat(sort) && x <= y, "truncated subtraction")?;
                        Ok(BigInt::zero())
                    }
                    (sym::NEG, [x], NumStep::Neg { a, c }) => {
                        self.expect("operand", &a, x)?;
                        canonical(&c)?;
                        self.fact(!is_nat(sort) && big(&c) == -x, "negation")?;
                        Ok(big(&c))
                    }
                    (sym::POW, [x, y], NumStep::Pow { a, e, c }) => {
                        self.expect("base", &a, x)?;
                        self.expect("exponent", &SignedNum::nat(e.clone()), y)?;
                        canonical(&c)?;
                        let e = y
                            .to_biguint()
                            .and_then(|v| u32::try_from(v).ok())
                            .filter(|v| u64::from(*v) <= MAX_EXPONENT)
                            .ok_or_else(|| format!("step {}: exponent out of range", self.index))?;
                        self.fact(big(&c) == num_traits::pow::Pow::pow(x, e), "power")?;
                        Ok(big(&c))
                    }
                    (s, _, step) => Err(format!(
                        "step {}: `{s}` node is not justified by {step:?}",
                        self.index
                    )),
                }
            }
            _ => Err(format!("`{t}` is not a literal expression")),
        }
    }
}

/// Evaluates a literal expression from its trace alone; fails if any step
/// is not a true fact about the values computed so far.
pub fn replay_eval(e: &Term, trace: &NumTrace) -> Result<BigInt, String> {
    let mut r = Replayer {
        steps: trace.steps.iter(),
        index: 0,
    };
    let v = r.replay(e)?;
    if r.steps.next().is_some() {
        return Err("trace has unused steps".into());
    }
    Ok(v)
}

/// Independent check of a relation decision against its trace.
pub fn verify_rel(
    r: &Term,
    lhs: &SignedNum,
    rhs: &SignedNum,
    value: bool,
    trace: &NumTrace,
) -> Result<(), String> {
    let Term::Rel { op, lhs: l, rhs: rt } = r else {
        return Err(format!("`{r}` is not a relation"));
    };
    let mut rp = Replayer {
        steps: trace.steps.iter(),
        index: 0,
    };
    let x = rp.replay(l)?;
    let y = rp.replay(rt)?;
    rp.expect("left", lhs, &x)?;
    rp.expect("right", rhs, &y)?;
    let last = rp.next()?.clone();
    let computed = match (op, last) {
        (RelOp::Dvd, NumStep::DivMod { a, b, q, r }) => {
            rp.expect("divisor", &a, &x)?;
            rp.expect("dividend", &b, &y)?;
            let (q, r) = (big(&q), big(&r));
            rp.fact(y == &x * &q + &r, "division")?;
            if x.is_zero() {
                rp.fact(q.is_zero(), "division by zero")?;
            } else {
                rp.fact(!r.is_negative() && r < x.abs(), "remainder bound")?;
            }
            r.is_zero()
        }
        (op, NumStep::Compare { a, b, ord }) if *op != RelOp::Dvd => {
            rp.expect("left", &a, &x)?;
            rp.expect("right", &b, &y)?;
            let real: Cmp = x.cmp(&y).into();
            rp.fact(real == ord, "comparison")?;
            match op {
                RelOp::Eq => x == y,
                RelOp::Ne => x != y,
                RelOp::Lt => x < y,
                RelOp::Le => x <= y,
                RelOp::Gt => x > y,
                RelOp::Ge => x >= y,
                RelOp::Dvd => unreachable!(),
            }
        }
        (_, s) => return Err(format!("final step {s:?} does not decide `{}`", op.symbol())),
    };
    if rp.steps.next().is_some() {
        return Err("trace has unused steps".into());
    }
    if computed != value {
        return Err(format!("trace shows the relation is {computed}, claimed {value}"));
    }
    Ok(())
}
