use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A sort of the term language.
///
/// `Named` sorts are declared carriers (`nat`, `Z`, ...). `Var` sorts are
/// schematic parameters that only appear in patterns (rule heads, lemma
/// statements) and are bound by matching.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    Named(String),
    Var(String),
    Arrow(Box<Sort>, Box<Sort>),
    Prop,
}

pub type SortSubst = BTreeMap<String, Sort>;

impl Sort {
    pub fn named(name: &str) -> Sort {
        Sort::Named(name.to_string())
    }

    pub fn var(name: &str) -> Sort {
        Sort::Var(name.to_string())
    }

    pub fn arrow(dom: Sort, cod: Sort) -> Sort {
        Sort::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn nat() -> Sort {
        Sort::named("nat")
    }

    pub fn int() -> Sort {
        Sort::named("int")
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Sort::Named(_) | Sort::Prop => true,
            Sort::Var(_) => false,
            Sort::Arrow(d, c) => d.is_ground() && c.is_ground(),
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Sort::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Sort::Arrow(d, c) => {
                d.vars(out);
                c.vars(out);
            }
            _ => {}
        }
    }

    /// All sorts occurring inside this one, including itself.
    pub fn subsorts(&self, out: &mut Vec<Sort>) {
        if !out.contains(self) {
            out.push(self.clone());
        }
        if let Sort::Arrow(d, c) = self {
            d.subsorts(out);
            c.subsorts(out);
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Sort::Arrow(d, c) => 1 + d.depth().max(c.depth()),
            _ => 0,
        }
    }

    pub fn subst(&self, s: &SortSubst) -> Sort {
        match self {
            Sort::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Sort::Arrow(d, c) => Sort::arrow(d.subst(s), c.subst(s)),
            _ => self.clone(),
        }
    }

    /// One-way matching: binds variables of `self` so that it equals `target`.
    pub fn match_into(&self, target: &Sort, s: &mut SortSubst) -> bool {
        match (self, target) {
            (Sort::Var(v), _) => match s.get(v) {
                Some(bound) => bound == target,
                None => {
                    s.insert(v.clone(), target.clone());
                    true
                }
            },
            (Sort::Named(a), Sort::Named(b)) => a == b,
            (Sort::Prop, Sort::Prop) => true,
            (Sort::Arrow(d1, c1), Sort::Arrow(d2, c2)) => {
                d1.match_into(d2, s) && c1.match_into(c2, s)
            }
            _ => false,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match self {
            Sort::Named(n) | Sort::Var(n) => write!(f, "{n}"),
            Sort::Prop => write!(f, "Prop"),
            Sort::Arrow(d, c) => {
                if nested {
                    write!(f, "(")?;
                }
                d.fmt_prec(f, true)?;
                write!(f, " -> ")?;
                c.fmt_prec(f, false)?;
                if nested {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }

    /// Rendering used inside class atoms, where arrows are always parenthesized.
    pub fn atom_arg(&self) -> String {
        match self {
            Sort::Arrow(..) => format!("({self})"),
            _ => self.to_string(),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrow_display_is_right_nested() {
        let s = Sort::arrow(Sort::var("c"), Sort::arrow(Sort::var("b"), Sort::var("a")));
        assert_eq!(s.to_string(), "c -> b -> a");
        let l = Sort::arrow(Sort::arrow(Sort::var("c"), Sort::var("b")), Sort::var("a"));
        assert_eq!(l.to_string(), "(c -> b) -> a");
    }

    #[test]
    fn matching_binds_consistently() {
        let pat = Sort::arrow(Sort::var("a"), Sort::var("a"));
        let mut s = SortSubst::new();
        assert!(pat.match_into(&Sort::arrow(Sort::nat(), Sort::nat()), &mut s));
        let mut s = SortSubst::new();
        assert!(!pat.match_into(&Sort::arrow(Sort::nat(), Sort::int()), &mut s));
    }
}
