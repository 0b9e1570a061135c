//! Linear arithmetic over ordered fields by Fourier-Motzkin elimination,
//! with refutation certificates and integer bound tightening.

mod fm;
mod goal;
mod tighten;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::OrderedField;

pub use fm::{fm_decide, fm_decide_with, FmOutcome, DEFAULT_VAR_LIMIT};
pub use goal::{build_cases, linarith_goal, verify_refutation, LinarithOutcome, MAX_CASES};
pub use tighten::int_tighten;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("{count} variables exceed the elimination limit of {limit}")]
    TooManyVars { count: usize, limit: usize },
    #[error("coefficient {0} is not an integer")]
    NonIntegral(String),
    #[error("`{0}` is not a linear relation")]
    NotLinear(String),
    #[error("case split produces {0} systems, more than the limit")]
    TooManyCases(usize),
    #[error("invalid elimination order: {0}")]
    BadOrder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinRel {
    Lt,
    Le,
    Eq,
}

impl LinRel {
    pub fn symbol(self) -> &'static str {
        match self {
            LinRel::Lt => "<",
            LinRel::Le => "≤",
            LinRel::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Rational,
    Int,
}

/// `Σ coeffs[i]·x_i + constant  rel  0`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint<F> {
    pub coeffs: BTreeMap<usize, F>,
    pub constant: F,
    pub rel: LinRel,
}

impl<F: OrderedField> Constraint<F> {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, F)>, constant: F, rel: LinRel) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Constraint { coeffs, constant, rel }
    }

    pub fn coeff(&self, v: usize) -> F {
        self.coeffs.get(&v).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// For a constraint without variables: whether it is false.
    pub fn is_absurd(&self) -> bool {
        self.is_constant()
            && match self.rel {
                LinRel::Lt => self.constant >= F::zero(),
                LinRel::Le => self.constant > F::zero(),
                LinRel::Eq => !self.constant.is_zero(),
            }
    }

    pub fn eval(&self, point: &[F]) -> F {
        self.coeffs
            .iter()
            .fold(self.constant.clone(), |acc, (v, c)| acc + c.clone() * point[*v].clone())
    }

    pub fn holds_at(&self, point: &[F]) -> bool {
        let v = self.eval(point);
        match self.rel {
            LinRel::Lt => v < F::zero(),
            LinRel::Le => v <= F::zero(),
            LinRel::Eq => v.is_zero(),
        }
    }

    pub fn scale(&self, k: &F) -> Self {
        Constraint::new(
            self.coeffs.iter().map(|(v, c)| (*v, c.clone() * k.clone())),
            self.constant.clone() * k.clone(),
            self.rel,
        )
    }

    /// `self + k·other`; the result is strict if either input is.
    pub fn add_scaled(&self, other: &Self, k: &F) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (v, c) in &other.coeffs {
            let e = coeffs.entry(*v).or_insert_with(F::zero);
            *e = e.clone() + c.clone() * k.clone();
        }
        let rel = match (self.rel, other.rel) {
            (LinRel::Lt, _) | (_, LinRel::Lt) => LinRel::Lt,
            (LinRel::Le, _) | (_, LinRel::Le) => LinRel::Le,
            _ => LinRel::Eq,
        };
        Constraint::new(coeffs, self.constant.clone() + other.constant.clone() * k.clone(), rel)
    }
}

/// A conjunction of constraints over named variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem<F> {
    pub vars: Vec<String>,
    pub constraints: Vec<Constraint<F>>,
    pub domain: Domain,
}

impl<F: OrderedField> LinearSystem<F> {
    pub fn new(vars: Vec<String>, constraints: Vec<Constraint<F>>, domain: Domain) -> Self {
        LinearSystem {
            vars,
            constraints,
            domain,
        }
    }

    pub fn satisfied_by(&self, point: &[F]) -> bool {
        self.constraints.iter().all(|c| c.holds_at(point))
    }
}

/// One multiplier per constraint; nonnegative except on equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate<F> {
    pub multipliers: Vec<F>,
}

impl<F: OrderedField> Certificate<F> {
    /// `Σ mᵢ·cᵢ`, with the relation of the strongest constraint used.
    pub fn combined(&self, sys: &LinearSystem<F>) -> Option<Constraint<F>> {
        if self.multipliers.len() != sys.constraints.len() {
            return None;
        }
        let mut acc = Constraint::new([], F::zero(), LinRel::Eq);
        for (m, c) in self.multipliers.iter().zip(&sys.constraints) {
            if m.is_zero() {
                continue;
            }
            acc = acc.add_scaled(c, m);
        }
        Some(acc)
    }
}

/// Checks that the multipliers are admissible and combine the system into
/// a false constant relation.
pub fn check_cert<F: OrderedField>(cert: &Certificate<F>, sys: &LinearSystem<F>) -> bool {
    if cert.multipliers.len() != sys.constraints.len() {
        return false;
    }
    let signs_ok = cert
        .multipliers
        .iter()
        .zip(&sys.constraints)
        .all(|(m, c)| c.rel == LinRel::Eq || *m >= F::zero());
    signs_ok && cert.combined(sys).is_some_and(|c| c.is_absurd())
}

impl<F: OrderedField + fmt::Display> fmt::Display for Constraint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·x{v}")?;
        }
        if self.coeffs.is_empty() {
            write!(f, "{}", self.constant)?;
        } else if !self.constant.is_zero() {
            write!(f, " + {}", self.constant)?;
        }
        write!(f, " {} 0", self.rel.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    pub(crate) fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn forced_one_variable_certificate() {
        // x ≥ 1 and x ≤ 0
        let sys = LinearSystem::new(
            vec!["x".into()],
            vec![
                Constraint::new([(0, q(-1))], q(1), LinRel::Le),
                Constraint::new([(0, q(1))], q(0), LinRel::Le),
            ],
            Domain::Rational,
        );
        let cert = Certificate {
            multipliers: vec![q(1), q(1)],
        };
        assert!(check_cert(&cert, &sys));
        let c = cert.combined(&sys).unwrap();
        assert!(c.is_constant());
        assert_eq!(c.constant, q(1));
        let bad = Certificate {
            multipliers: vec![q(1), q(2)],
        };
        assert!(!check_cert(&bad, &sys));
        let negative = Certificate {
            multipliers: vec![q(-1), q(-1)],
        };
        assert!(!check_cert(&negative, &sys));
    }
}
