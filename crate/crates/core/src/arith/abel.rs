//! Abelian-group normalization with integer scalars.
//!
//! The normal form is a left-nested sum of `x` or `c • x` (`c` an integer
//! numeral other than 0 and 1) in ascending order of the printed atom,
//! followed by a numeral constant when the sort has one and it is nonzero.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::norm_num::{norm_num_eval, SignedNum};
use super::ring::{args, child, is_const, is_zero, prefixed, EqOutcome};
use crate::prooftrace::{ProofTrace, Step, Tracer};
use crate::syntax::{format_term, sym, Path, RelOp, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbelError {
    #[error("`{symbol}` at position {position:?} is not an abelian-group operation")]
    NonGroup { symbol: String, position: Path },
    #[error("scalar at position {0:?} is not an integer literal")]
    Scalar(Path),
    #[error("negation at position {0:?} in nat")]
    NatNegation(Path),
    #[error("`{0}` is not an equation")]
    NotAnEquation(String),
    #[error("sides have different sorts: {0} and {1}")]
    SortMismatch(Sort, Sort),
}

/// Coefficients of atoms, plus a constant part.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AbelForm {
    pub terms: Vec<(Term, BigInt)>,
    pub constant: BigInt,
}

impl AbelForm {
    pub fn coefficient(&self, atom: &Term) -> BigInt {
        self.terms
            .iter()
            .find(|(a, _)| a == atom)
            .map_or_else(BigInt::zero, |(_, c)| c.clone())
    }

    fn of_normal(t: &Term) -> AbelForm {
        let mut form = AbelForm::default();
        let mut monos = Vec::new();
        let mut cur = t;
        while cur.is_op(sym::ADD) {
            monos.push(&args(cur)[1]);
            cur = &args(cur)[0];
        }
        monos.push(cur);
        for m in monos.into_iter().rev() {
            if is_zero(m) {
                continue;
            }
            match key(m) {
                None => form.constant = SignedNum::from_term(m).expect("constant").to_bigint(),
                Some(a) => {
                    let c = if m.is_op(sym::SMUL) {
                        SignedNum::from_term(&args(m)[0]).expect("scalar").to_bigint()
                    } else {
                        BigInt::one()
                    };
                    form.terms.push((a.clone(), c));
                }
            }
        }
        form
    }
}

#[derive(Debug, Clone)]
pub struct AbelNormal {
    pub form: AbelForm,
    pub normal: Term,
    pub trace: ProofTrace,
}

/// The atom of a monomial, or `None` for a constant.
fn key(m: &Term) -> Option<&Term> {
    if is_const(m) {
        None
    } else if m.is_op(sym::SMUL) {
        Some(&args(m)[1])
    } else {
        Some(m)
    }
}

fn cmp_mono(a: &Term, b: &Term) -> Ordering {
    match (key(a), key(b)) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => (format_term(x), x).cmp(&(format_term(y), y)),
    }
}

fn scalar(v: &BigInt) -> Term {
    SignedNum::from_bigint(v).to_term(Sort::int())
}

struct Normalizer {
    tr: Tracer,
}

impl Normalizer {
    fn at(&self, p: &[usize]) -> &Term {
        self.tr.at(p)
    }

    fn ax(&mut self, p: &[usize], name: &str) {
        self.tr.axiom(p, name, false);
    }

    fn fold_literal(&mut self, p: &[usize]) {
        let (v, _) = norm_num_eval(self.at(p)).expect("validated literal");
        let c = v.to_term(self.at(p).sort());
        self.tr.fold(p, c);
    }

    fn scalar_of(&self, p: &[usize]) -> BigInt {
        SignedNum::from_term(self.at(p)).expect("canonical scalar").to_bigint()
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
            sym::ADD | sym::SUB => {
                for i in 0..2 {
                    p.push(i);
                    self.norm(p);
                    p.pop();
                }
                if s == sym::SUB {
                    self.ax(p, "sub_eq_add_neg");
                    self.neg(&child(p, 1));
                }
                self.add(p);
            }
            sym::NEG => {
                p.push(0);
                self.norm(p);
                p.pop();
                self.neg(p);
            }
            sym::SMUL => {
                self.fold_literal(&child(p, 0));
                p.push(1);
                self.norm(p);
                p.pop();
                self.smul(p);
            }
            _ => {}
        }
    }

    fn neg(&mut self, p: &[usize]) {
        if self.at(p).is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        self.ax(p, "neg_eq_neg_one_smul");
        self.smul(p);
    }

    /// `c • A` with `c` a canonical integer and `A` canonical.
    fn smul(&mut self, p: &[usize]) {
        if self.at(p).is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        let c = self.scalar_of(&child(p, 0));
        let a = &args(self.at(p))[1];
        if c.is_zero() {
            self.ax(p, "zero_smul");
        } else if is_zero(a) {
            self.ax(p, "smul_zero");
        } else if c.is_one() {
            self.ax(p, "one_smul");
        } else if a.is_op(sym::ADD) {
            self.ax(p, "smul_add");
            self.smul(&child(p, 0));
            self.smul(&child(p, 1));
            self.add(p);
        } else if a.is_op(sym::SMUL) {
            let d = self.scalar_of(&[p, &[1, 0]].concat());
            self.tr.axiom(p, "mul_smul", true);
            let prod = c * d;
            self.tr.fold(&child(p, 0), scalar(&prod));
            self.unit_scalar(p, &prod);
        }
    }

    fn unit_scalar(&mut self, p: &[usize], c: &BigInt) {
        if c.is_zero() {
            self.ax(p, "zero_smul");
        } else if c.is_one() {
            self.ax(p, "one_smul");
        }
    }

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
            self.tr.axiom(p, "add_assoc", true);
            self.add(&child(p, 0));
            self.insert(p);
        } else {
            self.insert(p);
        }
    }

    fn insert(&mut self, p: &[usize]) {
        let t = self.at(p);
        let (c, m) = (&args(t)[0], &args(t)[1]);
        if is_zero(c) {
            self.ax(p, "zero_add");
            return;
        }
        if c.is_op(sym::ADD) {
            match cmp_mono(&args(c)[1], m) {
                Ordering::Less => {}
                Ordering::Greater => {
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
                Ordering::Less => {}
                Ordering::Greater => self.ax(p, "add_comm"),
                Ordering::Equal => self.combine(p),
            }
        }
    }

    /// `a • x + b • x` to `(a + b) • x`.
    fn combine(&mut self, p: &[usize]) {
        if self.at(p).is_literal_expr() {
            self.fold_literal(p);
            return;
        }
        for i in 0..2 {
            let q = child(p, i);
            if !self.at(&q).is_op(sym::SMUL) {
                self.tr.axiom(&q, "one_smul", true);
            }
        }
        let a = self.scalar_of(&[p, &[0, 0]].concat());
        let b = self.scalar_of(&[p, &[1, 0]].concat());
        self.tr.axiom(p, "add_smul", true);
        let sum = a + b;
        self.tr.fold(&child(p, 0), scalar(&sum));
        self.unit_scalar(p, &sum);
    }
}

fn validate(t: &Term, sort: &Sort, path: &mut Path) -> Result<(), AbelError> {
    let nat = *sort == Sort::nat();
    let non_group = |s: &str, path: &Path| AbelError::NonGroup {
        symbol: s.to_string(),
        position: path.clone(),
    };
    match t {
        Term::Rel { op, .. } => Err(non_group(op.symbol(), path)),
        Term::Op { sym: s, args, .. } => match s.as_str() {
            sym::ADD | sym::SUB | sym::NEG => {
                if nat && s != sym::ADD {
                    return Err(AbelError::NatNegation(path.clone()));
                }
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    validate(a, sort, path)?;
                    path.pop();
                }
                Ok(())
            }
            sym::SMUL => {
                path.push(0);
                let k = &args[0];
                if k.sort() != Sort::int() || !k.is_literal_expr() || norm_num_eval(k).is_err() {
                    return Err(AbelError::Scalar(path.clone()));
                }
                path.pop();
                path.push(1);
                validate(&args[1], sort, path)?;
                path.pop();
                Ok(())
            }
            sym::MUL | sym::DIV | sym::POW => Err(non_group(s, path)),
            _ => Ok(()),
        },
        _ => Ok(()),
    }
}

fn run(t: &Term) -> (Term, Vec<Step>) {
    let mut n = Normalizer {
        tr: Tracer::new(t.clone()),
    };
    n.norm(&mut Vec::new());
    n.tr.into_parts()
}

pub fn abel_normalize(t: &Term) -> Result<AbelNormal, AbelError> {
    validate(t, &t.sort(), &mut Vec::new())?;
    let (normal, steps) = run(t);
    Ok(AbelNormal {
        form: AbelForm::of_normal(&normal),
        trace: ProofTrace::equation("abel", t.clone(), normal.clone(), prefixed(steps, 0)),
        normal,
    })
}

pub fn abel_prove_eq(lhs: &Term, rhs: &Term) -> Result<EqOutcome, AbelError> {
    if lhs.sort() != rhs.sort() {
        return Err(AbelError::SortMismatch(lhs.sort(), rhs.sort()));
    }
    validate(lhs, &lhs.sort(), &mut vec![0])?;
    validate(rhs, &rhs.sort(), &mut vec![1])?;
    let (ln, ls) = run(lhs);
    let (rn, rs) = run(rhs);
    if ln != rn {
        return Ok(EqOutcome::NotEqual { lhs: ln, rhs: rn });
    }
    let mut steps = prefixed(ls, 0);
    steps.extend(prefixed(rs, 1));
    Ok(EqOutcome::Proved(ProofTrace::equation("abel", lhs.clone(), rhs.clone(), steps)))
}

pub fn abel_prove(goal: &Term) -> Result<EqOutcome, AbelError> {
    match goal {
        Term::Rel {
            op: RelOp::Eq,
            lhs,
            rhs,
        } => abel_prove_eq(lhs, rhs),
        _ => Err(AbelError::NotAnEquation(goal.to_string())),
    }
}
