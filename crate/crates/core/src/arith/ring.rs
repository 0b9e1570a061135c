//! Commutative (semi)ring normalization with one trace step per axiom.
//!
//! The normal form is a sum of monomials in descending lexicographic order
//! (variables compared by name), left-nested: `m₁ + m₂ + ... + mₖ`. A
//! monomial is a constant `c`, a power product `p`, or `c * p`; a power
//! product is a left-nested product of `x` or `x ^ e` (`e ≥ 2`) with
//! variables in ascending name order. The normalizer rewrites towards this
//! form bottom-up, citing prelude axioms and literal folds only.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::horner::HornerPoly;
use super::norm_num::{norm_num_eval, SignedNum, MAX_EXPONENT};
use crate::prooftrace::{ProofTrace, Step, Tracer};
use crate::syntax::{sym, Path, RelOp, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("`{symbol}` at position {position:?} is not supported by ring")]
    Unsupported { symbol: String, position: Path },
    #[error("subtraction or negation at position {0:?} in the semiring nat")]
    SemiringSubtraction(Path),
    #[error("exponent at position {0:?} is not a numeral")]
    ExponentNotNumeral(Path),
    #[error("exponent {0} exceeds the limit of 65536")]
    ExponentTooLarge(String),
    #[error("`{0}` is not an equation")]
    NotAnEquation(String),
    #[error("sides have different sorts: {0} and {1}")]
    SortMismatch(Sort, Sort),
}

/// A normalized term: its polynomial, the variable order used for it, the
/// canonical term, and a trace proving `input = normal`.
#[derive(Debug, Clone)]
pub struct RingNormal {
    pub poly: HornerPoly<BigRational>,
    pub vars: Vec<String>,
    pub normal: Term,
    pub trace: ProofTrace,
}

#[derive(Debug, Clone)]
pub enum EqOutcome {
    Proved(ProofTrace),
    NotEqual { lhs: Term, rhs: Term },
}

pub(super) fn is_const(t: &Term) -> bool {
    SignedNum::from_term(t).is_some()
}

pub(super) fn is_zero(t: &Term) -> bool {
    matches!(t, Term::Num { value, .. } if value.is_zero())
}

pub(super) fn args(t: &Term) -> &[Term] {
    match t {
        Term::Op { args, .. } => args,
        _ => &[],
    }
}

pub(super) fn child(p: &[usize], i: usize) -> Path {
    let mut q = p.to_vec();
    q.push(i);
    q
}

/// Splits a canonical monomial into its coefficient and power product.
fn split_mono(m: &Term) -> (BigInt, Option<&Term>) {
    if let Some(c) = SignedNum::from_term(m) {
        return (c.to_bigint(), None);
    }
    if m.is_op(sym::MUL) {
        if let Some(c) = SignedNum::from_term(&args(m)[0]) {
            return (c.to_bigint(), Some(&args(m)[1]));
        }
    }
    (BigInt::one(), Some(m))
}

fn factor_of(f: &Term) -> (String, u64) {
    match f {
        Term::Var { name, .. } => (name.clone(), 1),
        Term::Op { sym: s, args, .. } if s == sym::POW => {
            let Term::Var { name, .. } = &args[0] else {
                unreachable!("canonical factor")
            };
            let Term::Num { value, .. } = &args[1] else {
                unreachable!("canonical exponent")
            };
            (name.clone(), value.to_u64().unwrap_or(u64::MAX))
        }
        _ => unreachable!("canonical factor"),
    }
}

fn power_product(p: &Term, out: &mut BTreeMap<String, u64>) {
    if p.is_op(sym::MUL) {
        power_product(&args(p)[0], out);
        power_product(&args(p)[1], out);
    } else {
        let (v, e) = factor_of(p);
        *out.entry(v).or_default() += e;
    }
}

fn pp_of(m: &Term) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    if let (_, Some(p)) = split_mono(m) {
        power_product(p, &mut out);
    }
    out
}

/// Lexicographic order on power products: the first variable (by name)
/// whose exponents differ decides; the larger exponent is greater.
fn cmp_pp(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> Ordering {
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    ia.next();
                    ib.next();
                }
            },
        }
    }
}

fn cmp_mono(a: &Term, b: &Term) -> Ordering {
    cmp_pp(&pp_of(a), &pp_of(b))
}

struct Normalizer {
    tr: Tracer,
    sort: Sort,
}

impl Normalizer {
    fn constant(&self, v: &BigInt) -> Term {
        SignedNum::from_bigint(v).to_term(self.sort.clone())
    }

    fn at(&self, p: &[usize]) -> &Term {
        self.tr.at(p)
    }

    fn ax(&mut self, p: &[usize], name: &str) {
        self.tr.axiom(p, name, false);
    }

    fn ax_rev(&mut self, p: &[usize], name: &str) {
        self.tr.axiom(p, name, true);
    }

    /// Folds a literal subterm to its canonical constant.
    fn fold_literal(&mut self, p: &[usize]) {
        let (v, _) = norm_num_eval(self.at(p)).expect("validated literal");
        let c = v.to_term(self.at(p).sort());
        self.tr.fold(p, c);
    }

    fn norm(&mut self, p: &mut Path) {
        let t = self.at(p).clone();
        if t.is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let Term::Op { sym: s, .. } = &t else {
            return;
        };
        match s.as_str() {
            sym::ADD | sym::MUL | sym::SUB => {
                for i in 0..2 {
                    p.push(i);
                    self.norm(p);
                    p.pop();
                }
                match s.as_str() {
                    sym::ADD => self.add(p),
                    sym::MUL => self.mul(p),
                    _ => {
                        self.ax(p, "sub_eq_add_neg");
                        self.neg(&child(p, 1));
                        self.add(p);
                    }
                }
            }
            sym::NEG => {
                p.push(0);
                self.norm(p);
                p.pop();
                self.neg(p);
            }
            sym::POW => {
                p.push(0);
                self.norm(p);
                p.pop();
                self.pow(p);
            }
            _ => unreachable!("validated operator"),
        }
    }

    /// `-A` with `A` canonical.
    fn neg(&mut self, p: &[usize]) {
        if self.at(p).is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        self.ax(p, "neg_eq_neg_one_mul");
        self.mul(p);
    }

    /// `A + B` with both canonical.
    fn add(&mut self, p: &[usize]) {
        let t = self.at(p);
        if t.is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let (a, b) = (&args(t)[0], &args(t)[1]);
        if is_zero(b) {
            self.ax(p, "add_zero");
        } else if is_zero(a) {
            self.ax(p, "zero_add");
        } else if b.is_op(sym::ADD) {
            self.ax_rev(p, "add_assoc");
            self.add(&child(p, 0));
            self.insert(p);
        } else {
            self.insert(p);
        }
    }

    /// `C + m` with `C` canonical and `m` a monomial.
    fn insert(&mut self, p: &[usize]) {
        let t = self.at(p);
        let (c, m) = (&args(t)[0], &args(t)[1]);
        if is_zero(c) {
            self.ax(p, "zero_add");
            return;
        }
        if c.is_op(sym::ADD) {
            let last = &args(c)[1];
            match cmp_mono(last, m) {
                Ordering::Greater => {}
                Ordering::Less => {
                    self.ax(p, "add_right_comm");
                    let left = child(p, 0);
                    self.insert(&left);
                    if is_zero(self.at(&left)) {
                        self.ax(p, "zero_add");
                    }
                }
                Ordering::Equal => {
                    self.ax(p, "add_assoc");
                    self.combine(&child(p, 1));
                    if is_zero(self.at(&child(p, 1))) {
                        self.ax(p, "add_zero");
                    }
                }
            }
        } else {
            match cmp_mono(c, m) {
                Ordering::Greater => {}
                Ordering::Less => self.ax(p, "add_comm"),
                Ordering::Equal => self.combine(p),
            }
        }
    }

    /// `a • P + b • P` to `(a + b) • P`, written with `*`.
    fn combine(&mut self, p: &[usize]) {
        if self.at(p).is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let t = self.at(p);
        let (ca, _) = split_mono(&args(t)[0]);
        let (cb, _) = split_mono(&args(t)[1]);
        for i in 0..2 {
            let q = child(p, i);
            if !is_const(self.at(&q)) && !self.explicit(&q) {
                self.ax_rev(&q, "one_mul");
            }
        }
        self.ax_rev(p, "right_distrib");
        let sum = ca + cb;
        let c = self.constant(&sum);
        self.tr.fold(&child(p, 0), c);
        if sum.is_zero() {
            self.ax(p, "zero_mul");
        } else if sum.is_one() {
            self.ax(p, "one_mul");
        }
    }

    /// Whether the monomial at `p` carries an explicit coefficient.
    fn explicit(&self, p: &[usize]) -> bool {
        let t = self.at(p);
        t.is_op(sym::MUL) && is_const(&args(t)[0])
    }

    /// `A * B` with both canonical.
    fn mul(&mut self, p: &[usize]) {
        let t = self.at(p);
        if t.is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let (a, b) = (&args(t)[0], &args(t)[1]);
        if is_zero(b) {
            self.ax(p, "mul_zero");
        } else if is_zero(a) {
            self.ax(p, "zero_mul");
        } else if b.is_op(sym::ADD) {
            self.ax(p, "left_distrib");
            self.mul(&child(p, 0));
            self.mul(&child(p, 1));
            self.add(p);
        } else if a.is_op(sym::ADD) {
            self.ax(p, "right_distrib");
            self.mul(&child(p, 0));
            self.mul(&child(p, 1));
            self.add(p);
        } else {
            self.mul_mono(p);
        }
    }

    /// Product of two nonzero monomials.
    fn mul_mono(&mut self, p: &[usize]) {
        let t = self.at(p);
        if t.is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let (a, b) = (&args(t)[0], &args(t)[1]);
        let (ca, pa) = split_mono(a);
        let (cb, pb) = split_mono(b);
        match (pa.is_some(), pb.is_some()) {
            (false, _) => {
                if self.explicit(&child(p, 1)) {
                    self.ax_rev(p, "mul_assoc");
                    let prod = ca * cb;
                    let c = self.constant(&prod);
                    self.tr.fold(&child(p, 0), c);
                    if prod.is_one() {
                        self.ax(p, "one_mul");
                    }
                } else if ca.is_one() {
                    self.ax(p, "one_mul");
                }
            }
            (true, false) => {
                self.ax(p, "mul_comm");
                self.mul_mono(p);
            }
            (true, true) => {
                if self.explicit(&child(p, 0)) {
                    self.ax(p, "mul_assoc");
                    self.mul_mono(&child(p, 1));
                    self.mul_mono(p);
                } else if self.explicit(&child(p, 1)) {
                    self.ax(p, "mul_left_comm");
                    self.pp_merge(&child(p, 1));
                } else {
                    self.pp_merge(p);
                }
            }
        }
    }

    /// Product of two power products.
    fn pp_merge(&mut self, p: &[usize]) {
        if args(self.at(p))[1].is_op(sym::MUL) {
            self.ax_rev(p, "mul_assoc");
            self.pp_merge(&child(p, 0));
        }
        self.pp_insert(p);
    }

    /// `Q * f` with `Q` a power product and `f` a factor.
    fn pp_insert(&mut self, p: &[usize]) {
        let t = self.at(p);
        let (q, f) = (&args(t)[0], &args(t)[1]);
        let fv = factor_of(f).0;
        if q.is_op(sym::MUL) {
            let gv = factor_of(&args(q)[1]).0;
            match gv.cmp(&fv) {
                Ordering::Less => {}
                Ordering::Greater => {
                    self.ax(p, "mul_right_comm");
                    self.pp_insert(&child(p, 0));
                }
                Ordering::Equal => {
                    self.ax(p, "mul_assoc");
                    self.pow_combine(&child(p, 1));
                }
            }
        } else {
            match factor_of(q).0.cmp(&fv) {
                Ordering::Less => {}
                Ordering::Greater => self.ax(p, "mul_comm"),
                Ordering::Equal => self.pow_combine(p),
            }
        }
    }

    /// `x^a * x^b` to `x^(a+b)`.
    fn pow_combine(&mut self, p: &[usize]) {
        let mut total = 0;
        for i in 0..2 {
            let q = child(p, i);
            if self.at(&q).is_var() {
                self.ax_rev(&q, "pow_one");
            }
            total += factor_of(self.at(&q)).1;
        }
        self.ax_rev(p, "pow_add");
        self.tr.fold(&child(p, 1), Term::num(total, Sort::nat()));
    }

    /// `A ^ e` with `A` canonical and `e` a numeral.
    fn pow(&mut self, p: &[usize]) {
        let t = self.at(p);
        if t.is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let base = &args(t)[0];
        let e = match &args(t)[1] {
            Term::Num { value, .. } => value.to_u64().expect("validated exponent"),
            _ => unreachable!("validated exponent"),
        };
        match e {
            0 => return self.ax(p, "pow_zero"),
            1 => return self.ax(p, "pow_one"),
            _ => {}
        }
        if base.is_op(sym::ADD) {
            let lo = e / 2;
            let split = Term::bin(sym::ADD, Term::num(lo, Sort::nat()), Term::num(e - lo, Sort::nat()));
            self.tr.fold(&child(p, 1), split);
            self.ax(p, "pow_add");
            self.pow(&child(p, 0));
            self.pow(&child(p, 1));
            self.mul(p);
        } else if base.is_op(sym::MUL) {
            self.ax(p, "mul_pow");
            self.pow(&child(p, 0));
            self.pow(&child(p, 1));
            self.mul_mono(p);
        } else if base.is_op(sym::POW) {
            let k = factor_of(base).1;
            self.ax_rev(p, "pow_mul");
            self.tr.fold(&child(p, 1), Term::num(k * e, Sort::nat()));
        }
    }
}

/// Checks that `t` is in the ring fragment and records variables in order
/// of first occurrence.
fn validate(t: &Term, sort: &Sort, path: &mut Path, vars: &mut Vec<String>) -> Result<(), RingError> {
    let semiring = *sort == Sort::nat();
    let unsupported = |s: &str, path: &Path| RingError::Unsupported {
        symbol: s.to_string(),
        position: path.clone(),
    };
    if t.sort() != *sort {
        return Err(unsupported(&format!("{t} : {}", t.sort()), path));
    }
    match t {
        Term::Var { name, .. } => {
            if !vars.contains(name) {
                vars.push(name.clone());
            }
            Ok(())
        }
        Term::Num { .. } => Ok(()),
        Term::Coerce { .. } => Err(unsupported("↑", path)),
        Term::Rel { op, .. } => Err(unsupported(op.symbol(), path)),
        Term::Op { sym: s, args, .. } => match s.as_str() {
            sym::ADD | sym::MUL | sym::SUB | sym::NEG => {
                if semiring && (s == sym::SUB || s == sym::NEG) {
                    return Err(RingError::SemiringSubtraction(path.clone()));
                }
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    validate(a, sort, path, vars)?;
                    path.pop();
                }
                Ok(())
            }
            sym::POW => {
                path.push(1);
                let Term::Num { value, .. } = &args[1] else {
                    return Err(RingError::ExponentNotNumeral(path.clone()));
                };
                if value.to_u64().map_or(true, |e| e > MAX_EXPONENT) {
                    return Err(RingError::ExponentTooLarge(value.to_decimal()));
                }
                path.pop();
                path.push(0);
                validate(&args[0], sort, path, vars)?;
                path.pop();
                Ok(())
            }
            other => Err(unsupported(other, path)),
        },
    }
}

/// The polynomial denoted by a validated term, over the given variable order.
pub fn to_poly(t: &Term, vars: &[String]) -> HornerPoly<BigRational> {
    let nat = t.sort() == Sort::nat();
    match t {
        Term::Var { name, .. } => HornerPoly::var(vars.iter().position(|v| v == name).expect("known variable")),
        Term::Num { value, .. } => HornerPoly::constant(BigRational::from_integer(value.to_biguint().into())),
        Term::Op { sym: s, args, .. } => {
            let a = to_poly(&args[0], vars);
            match s.as_str() {
                sym::ADD => a.add(&to_poly(&args[1], vars)),
                sym::MUL => a.mul(&to_poly(&args[1], vars)),
                sym::SUB if !nat => a.sub(&to_poly(&args[1], vars)),
                sym::NEG if !nat => a.neg(),
                sym::POW => {
                    let Term::Num { value, .. } = &args[1] else {
                        panic!("validated exponent")
                    };
                    a.pow(value.to_u64().expect("validated exponent"))
                }
                other => panic!("`{other}` outside the ring fragment"),
            }
        }
        _ => panic!("`{t}` outside the ring fragment"),
    }
}

fn run(t: &Term) -> (Term, Vec<Step>) {
    let mut n = Normalizer {
        tr: Tracer::new(t.clone()),
        sort: t.sort(),
    };
    n.norm(&mut Vec::new());
    n.tr.into_parts()
}

pub(super) fn prefixed(steps: Vec<Step>, side: usize) -> Vec<Step> {
    steps
        .into_iter()
        .map(|mut s| {
            s.position.insert(0, side);
            s
        })
        .collect()
}

/// Normalizes `t`, returning its polynomial and a trace of `t = normal`.
pub fn ring_normalize(t: &Term) -> Result<RingNormal, RingError> {
    let sort = t.sort();
    let mut vars = Vec::new();
    validate(t, &sort, &mut Vec::new(), &mut vars)?;
    let (normal, steps) = run(t);
    let poly = to_poly(t, &vars);
    debug_assert_eq!(poly, to_poly(&normal, &vars));
    let trace = ProofTrace::equation("ring", t.clone(), normal.clone(), prefixed(steps, 0));
    Ok(RingNormal {
        poly,
        vars,
        normal,
        trace,
    })
}

/// Proves `lhs = rhs` by normalizing both sides.
pub fn ring_prove_eq(lhs: &Term, rhs: &Term) -> Result<EqOutcome, RingError> {
    let sort = lhs.sort();
    if rhs.sort() != sort {
        return Err(RingError::SortMismatch(sort, rhs.sort()));
    }
    let mut vars = Vec::new();
    validate(lhs, &sort, &mut vec![0], &mut vars)?;
    validate(rhs, &sort, &mut vec![1], &mut vars)?;
    let (ln, ls) = run(lhs);
    let (rn, rs) = run(rhs);
    debug_assert_eq!(ln == rn, to_poly(lhs, &vars) == to_poly(rhs, &vars));
    if ln != rn {
        return Ok(EqOutcome::NotEqual { lhs: ln, rhs: rn });
    }
    let mut steps = prefixed(ls, 0);
    steps.extend(prefixed(rs, 1));
    Ok(EqOutcome::Proved(ProofTrace::equation("ring", lhs.clone(), rhs.clone(), steps)))
}

/// `ring_prove_eq` on an equation term.
pub fn ring_prove(goal: &Term) -> Result<EqOutcome, RingError> {
    match goal {
        Term::Rel {
            op: RelOp::Eq,
            lhs,
            rhs,
        } => ring_prove_eq(lhs, rhs),
        _ => Err(RingError::NotAnEquation(goal.to_string())),
    }
}

/// The canonical term of a numeral constant, exposed for callers building
/// expected normal forms.
pub fn constant_term(v: i64, sort: Sort) -> Term {
    SignedNum::from_i64(v).to_term(sort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Env;
    use crate::prooftrace::verify;
    use crate::syntax::{format_term, parse_term, TermCtx};

    fn t(src: &str) -> Term {
        parse_term(src, &Env::new(), &TermCtx::with_default(Sort::int())).unwrap()
    }

    fn normal(src: &str) -> String {
        let r = ring_normalize(&t(src)).unwrap();
        assert!(verify(&r.trace, &Env::new()).is_accepted(), "{src}");
        format_term(&r.normal)
    }

    #[test]
    fn add_zero_is_one_step() {
        let r = ring_normalize(&t("x + 0")).unwrap();
        assert_eq!(r.trace.rules_used(), vec!["add_zero"]);
        assert_eq!(r.trace.steps.len(), 1);
        assert_eq!(format_term(&r.normal), "x");
    }

    #[test]
    fn normal_forms() {
        assert_eq!(normal("(x + y) ^ 2"), "x ^ 2 + 2 * (x * y) + y ^ 2");
        assert_eq!(normal("y * x"), "x * y");
        assert_eq!(normal("x - x"), "0");
        assert_eq!(normal("2 * x + 3 - x"), "x + 3");
        assert_eq!(normal("-(x * 2)"), "-2 * x");
        assert_eq!(normal("(x ^ 2) ^ 3 * x"), "x ^ 7");
        assert_eq!(normal("(x + 1) * (x - 1)"), "x ^ 2 + -1");
        assert_eq!(normal("1 + 2 * 3"), "7");
    }

    #[test]
    fn proves_and_refutes() {
        let Ok(EqOutcome::Proved(tr)) = ring_prove(&t("x * y = y * x")) else {
            panic!()
        };
        assert!(verify(&tr, &Env::new()).is_accepted());
        assert!(matches!(ring_prove(&t("x + 1 = x + 2")), Ok(EqOutcome::NotEqual { .. })));
        let Ok(EqOutcome::Proved(tr)) = ring_prove(&t("(r + s) * x = r * x + s * x")) else {
            panic!()
        };
        assert!(verify(&tr, &Env::new()).is_accepted());
    }

    #[test]
    fn canonical_input_has_empty_trace() {
        let n = ring_normalize(&t("(x + y) ^ 2 - y")).unwrap().normal;
        let again = ring_normalize(&n).unwrap();
        assert!(again.trace.steps.is_empty());
        let reparsed = t(&format_term(&n));
        assert_eq!(reparsed, n);
    }

    #[test]
    fn rejections() {
        assert!(matches!(ring_normalize(&t("x / y")), Err(RingError::Unsupported { symbol, .. }) if symbol == "/"));
        let nat = parse_term("x - y", &Env::new(), &TermCtx::with_default(Sort::nat())).unwrap();
        assert!(matches!(ring_normalize(&nat), Err(RingError::SemiringSubtraction(_))));
        assert!(matches!(ring_normalize(&t("x ^ 70000")), Err(RingError::ExponentTooLarge(_))));
    }

    #[test]
    fn semiring_traces_verify() {
        let nat = parse_term("(a + b) * (a + 2) = a * a + 2 * a + b * a + 2 * b", &Env::new(), &TermCtx::with_default(Sort::nat())).unwrap();
        let Ok(EqOutcome::Proved(tr)) = ring_prove(&nat) else {
            panic!()
        };
        assert!(verify(&tr, &Env::new()).is_accepted());
    }
}
