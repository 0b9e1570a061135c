use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::numeral::Numeral;
use super::sort::{Sort, SortSubst};

/// Relation symbols. `Gt`/`Ge` are kept distinct from flipped `Lt`/`Le` so that
/// goals print back the way they were written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelOp {
    Eq,
    Le,
    Lt,
    Ne,
    Dvd,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Le => "≤",
            RelOp::Lt => "<",
            RelOp::Ne => "≠",
            RelOp::Dvd => "∣",
            RelOp::Gt => ">",
            RelOp::Ge => "≥",
        }
    }

    pub const ALL: [RelOp; 7] = [
        RelOp::Eq,
        RelOp::Le,
        RelOp::Lt,
        RelOp::Ne,
        RelOp::Dvd,
        RelOp::Gt,
        RelOp::Ge,
    ];

    /// Evaluates the relation on an ordered domain.
    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            RelOp::Eq => a == b,
            RelOp::Le => a <= b,
            RelOp::Lt => a < b,
            RelOp::Ne => a != b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
            RelOp::Dvd => panic!("divisibility has no order semantics"),
        }
    }
}

/// Operator symbols with dedicated surface syntax.
pub mod sym {
    pub const ADD: &str = "+";
    pub const SUB: &str = "-";
    pub const MUL: &str = "*";
    pub const DIV: &str = "/";
    pub const POW: &str = "^";
    pub const NEG: &str = "neg";
    pub const SMUL: &str = "•";
    pub const COMP: &str = "≫";
    pub const NORM: &str = "norm";
    pub const APP: &str = "app";
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var {
        name: String,
        sort: Sort,
    },
    Op {
        sym: String,
        args: Vec<Term>,
        sort: Sort,
    },
    Num {
        value: Numeral,
        sort: Sort,
    },
    Coerce {
        from: Sort,
        to: Sort,
        arg: Box<Term>,
    },
    Rel {
        op: RelOp,
        lhs: Box<Term>,
        rhs: Box<Term>,
    },
}

/// A simultaneous substitution for term and sort variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subst {
    #[serde(default)]
    pub terms: BTreeMap<String, Term>,
    #[serde(default)]
    pub sorts: SortSubst,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }
}

pub type Path = Vec<usize>;

impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var {
            name: name.to_string(),
            sort,
        }
    }

    pub fn op(sym: &str, args: Vec<Term>, sort: Sort) -> Term {
        Term::Op {
            sym: sym.to_string(),
            args,
            sort,
        }
    }

    pub fn num(n: u64, sort: Sort) -> Term {
        Term::Num {
            value: Numeral::from_u64(n),
            sort,
        }
    }

    pub fn numeral(value: Numeral, sort: Sort) -> Term {
        Term::Num { value, sort }
    }

    pub fn coerce(from: Sort, to: Sort, arg: Term) -> Term {
        Term::Coerce {
            from,
            to,
            arg: Box::new(arg),
        }
    }

    pub fn rel(op: RelOp, lhs: Term, rhs: Term) -> Term {
        Term::Rel {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Binary operator whose result sort is the sort of its left argument.
    pub fn bin(sym: &str, lhs: Term, rhs: Term) -> Term {
        let sort = lhs.sort();
        Term::op(sym, vec![lhs, rhs], sort)
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var { sort, .. } | Term::Op { sort, .. } | Term::Num { sort, .. } => sort.clone(),
            Term::Coerce { to, .. } => to.clone(),
            Term::Rel { .. } => Sort::Prop,
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Op { args, .. } => args.iter().collect(),
            Term::Coerce { arg, .. } => vec![arg],
            Term::Rel { lhs, rhs, .. } => vec![lhs, rhs],
            _ => vec![],
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut Term> {
        match self {
            Term::Op { args, .. } => args.get_mut(i),
            Term::Coerce { arg, .. } if i == 0 => Some(arg),
            Term::Rel { lhs, .. } if i == 0 => Some(lhs),
            Term::Rel { rhs, .. } if i == 1 => Some(rhs),
            _ => None,
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i)?;
        }
        Some(cur)
    }

    /// Replaces the subterm at `path`; returns false if the path is invalid.
    pub fn replace_at(&mut self, path: &[usize], new: Term) -> bool {
        match self.at_mut(path) {
            Some(slot) => {
                *slot = new;
                true
            }
            None => false,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var { .. })
    }

    pub fn is_op(&self, s: &str) -> bool {
        matches!(self, Term::Op { sym, .. } if sym == s)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Free term variables in first-occurrence order.
    pub fn vars(&self) -> Vec<(String, Sort)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<(String, Sort)>) {
        match self {
            Term::Var { name, sort } => {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), sort.clone()));
                }
            }
            _ => {
                for c in self.children() {
                    c.collect_vars(out);
                }
            }
        }
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars().into_iter().map(|(n, _)| n).collect()
    }

    pub fn mentions_var(&self, name: &str) -> bool {
        match self {
            Term::Var { name: n, .. } => n == name,
            _ => self.children().iter().any(|c| c.mentions_var(name)),
        }
    }

    /// Sort variables appearing anywhere in the term.
    pub fn sort_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_sort_vars(&mut out);
        out
    }

    fn collect_sort_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Coerce { from, to, .. } => {
                from.vars(out);
                to.vars(out);
            }
            Term::Rel { .. } => {}
            other => other.sort().vars(out),
        }
        for c in self.children() {
            c.collect_sort_vars(out);
        }
    }

    pub fn contains_coercion(&self) -> bool {
        matches!(self, Term::Coerce { .. }) || self.children().iter().any(|c| c.contains_coercion())
    }

    /// All positions in pre-order (root first, children left to right).
    pub fn positions(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, p)) = stack.pop() {
            let kids = t.children();
            for (i, c) in kids.iter().enumerate().rev() {
                let mut cp = p.clone();
                cp.push(i);
                stack.push((c, cp));
            }
            out.push(p);
        }
        out
    }

    pub fn subst(&self, s: &Subst) -> Term {
        match self {
            Term::Var { name, sort } => match s.terms.get(name) {
                Some(t) => t.clone(),
                None => Term::Var {
                    name: name.clone(),
                    sort: sort.subst(&s.sorts),
                },
            },
            Term::Op { sym, args, sort } => Term::Op {
                sym: sym.clone(),
                args: args.iter().map(|a| a.subst(s)).collect(),
                sort: sort.subst(&s.sorts),
            },
            Term::Num { value, sort } => Term::Num {
                value: value.clone(),
                sort: sort.subst(&s.sorts),
            },
            Term::Coerce { from, to, arg } => Term::Coerce {
                from: from.subst(&s.sorts),
                to: to.subst(&s.sorts),
                arg: Box::new(arg.subst(s)),
            },
            Term::Rel { op, lhs, rhs } => Term::Rel {
                op: *op,
                lhs: Box::new(lhs.subst(s)),
                rhs: Box::new(rhs.subst(s)),
            },
        }
    }

    /// First-order syntactic matching of the pattern `self` against `target`,
    /// extending `s`. Sort variables are matched alongside term variables.
    pub fn match_into(&self, target: &Term, s: &mut Subst) -> bool {
        match (self, target) {
            (Term::Var { name, sort }, _) => {
                if !sort.match_into(&target.sort(), &mut s.sorts) {
                    return false;
                }
                match s.terms.get(name) {
                    Some(bound) => bound == target,
                    None => {
                        s.terms.insert(name.clone(), target.clone());
                        true
                    }
                }
            }
            (
                Term::Op { sym, args, sort },
                Term::Op {
                    sym: tsym,
                    args: targs,
                    sort: tsort,
                },
            ) => {
                sym == tsym
                    && args.len() == targs.len()
                    && sort.match_into(tsort, &mut s.sorts)
                    && args.iter().zip(targs).all(|(p, t)| p.match_into(t, s))
            }
            (
                Term::Num { value, sort },
                Term::Num {
                    value: tv,
                    sort: ts,
                },
            ) => value == tv && sort.match_into(ts, &mut s.sorts),
            (
                Term::Coerce { from, to, arg },
                Term::Coerce {
                    from: tf,
                    to: tt,
                    arg: ta,
                },
            ) => {
                from.match_into(tf, &mut s.sorts)
                    && to.match_into(tt, &mut s.sorts)
                    && arg.match_into(ta, s)
            }
            (
                Term::Rel { op, lhs, rhs },
                Term::Rel {
                    op: top,
                    lhs: tl,
                    rhs: tr,
                },
            ) => op == top && lhs.match_into(tl, s) && rhs.match_into(tr, s),
            _ => false,
        }
    }

    pub fn matches(&self, target: &Term) -> Option<Subst> {
        let mut s = Subst::new();
        self.match_into(target, &mut s).then_some(s)
    }

    /// True when the term is built only from numerals and arithmetic operators.
    pub fn is_literal_expr(&self) -> bool {
        match self {
            Term::Num { .. } => true,
            Term::Op { sym, args, .. } => {
                matches!(
                    sym.as_str(),
                    sym::ADD | sym::SUB | sym::MUL | sym::POW | sym::NEG | sym::SMUL
                ) && args.iter().all(|a| a.is_literal_expr())
            }
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format::format_term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x", Sort::var("a"))
    }

    #[test]
    fn nonlinear_pattern_requires_equal_bindings() {
        let pat = Term::bin(sym::ADD, x(), x());
        let a = Term::var("a", Sort::int());
        let b = Term::var("b", Sort::int());
        assert!(pat.matches(&Term::bin(sym::ADD, a.clone(), a.clone())).is_some());
        assert!(pat.matches(&Term::bin(sym::ADD, a, b)).is_none());
    }

    #[test]
    fn numeral_sort_is_bound_by_matching() {
        let pat = Term::bin(sym::MUL, x(), Term::num(1, Sort::var("a")));
        let t = Term::bin(sym::MUL, Term::var("y", Sort::int()), Term::num(1, Sort::int()));
        let s = pat.matches(&t).unwrap();
        assert_eq!(s.sorts.get("a"), Some(&Sort::int()));
        let bad = Term::bin(sym::MUL, Term::var("y", Sort::int()), Term::num(1, Sort::nat()));
        assert!(pat.matches(&bad).is_none());
    }

    #[test]
    fn positions_are_preorder() {
        let t = Term::bin(sym::ADD, Term::bin(sym::MUL, x(), x()), x());
        assert_eq!(
            t.positions(),
            vec![vec![], vec![0], vec![0, 0], vec![0, 1], vec![1]]
        );
    }
}
