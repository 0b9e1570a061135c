use std::collections::BTreeSet;


use super::{Certificate, Constraint, LinError, LinRel, LinearSystem};
use crate::scalar::OrderedField;

pub const DEFAULT_VAR_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FmOutcome<F> {
    Infeasible(Certificate<F>),
    /// A point satisfying every constraint, indexed like the system's vars.
    Feasible(Vec<F>),
}

impl<F> FmOutcome<F> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FmOutcome::Feasible(_))
    }
}

/// A derived constraint and the multipliers producing it from the input.
#[derive(Debug, Clone)]
struct Row<F> {
    c: Constraint<F>,
    prov: Vec<F>,
}

impl<F: OrderedField> Row<F> {
    fn add_scaled(&self, other: &Row<F>, k: &F) -> Row<F> {
        Row {
            c: self.c.add_scaled(&other.c, k),
            prov: self
                .prov
                .iter()
                .zip(&other.prov)
                .map(|(a, b)| a.clone() + b.clone() * k.clone())
                .collect(),
        }
    }

    fn scale(&self, k: &F) -> Row<F> {
        Row {
            c: self.c.scale(k),
            prov: self.prov.iter().map(|a| a.clone() * k.clone()).collect(),
        }
    }

    /// Scales so that the first coefficient has absolute value one.
    fn normalized(self) -> Row<F> {
        match self.c.coeffs.values().next() {
            Some(a) if !a.abs().is_one() => {
                let k = F::one() / a.abs();
                self.scale(&k)
            }
            _ => self,
        }
    }
}

enum Elim<F> {
    /// Variable solved from an equality.
    Solved(usize, Constraint<F>),
    /// Variable projected out; the constraints bounding it at that stage.
    Projected(usize, Vec<Constraint<F>>),
}

fn infeasible<F: OrderedField>(row: &Row<F>) -> FmOutcome<F> {
    FmOutcome::Infeasible(Certificate {
        multipliers: row.prov.clone(),
    })
}

/// Decides a system with the default variable limit and elimination order.
pub fn fm_decide<F: OrderedField>(sys: &LinearSystem<F>) -> Result<FmOutcome<F>, LinError> {
    fm_decide_with(sys, DEFAULT_VAR_LIMIT, None)
}

/// Equalities are solved and substituted first. Inequalities are then
/// eliminated one variable at a time, fewest strict constraints first (ties
/// by index) unless `order` fixes the sequence. Every derived constraint
/// tracks its multipliers, so an absurd one is its own certificate; if none
/// arises a witness is built by back-substitution.
pub fn fm_decide_with<F: OrderedField>(
    sys: &LinearSystem<F>,
    var_limit: usize,
    order: Option<&[usize]>,
) -> Result<FmOutcome<F>, LinError> {
    let used: BTreeSet<usize> = sys.constraints.iter().flat_map(|c| c.coeffs.keys().copied()).collect();
    if used.len() > var_limit {
        return Err(LinError::TooManyVars {
            count: used.len(),
            limit: var_limit,
        });
    }
    let width = sys.vars.len().max(used.iter().next_back().map_or(0, |v| v + 1));
    if let Some(o) = order {
        if let Some(v) = used.iter().find(|v| !o.contains(v)) {
            return Err(LinError::BadOrder(format!("variable {v} missing")));
        }
    }
    let n = sys.constraints.len();
    let mut rows: Vec<Row<F>> = sys
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut prov = vec![F::zero(); n];
            prov[i] = F::one();
            Row { c: c.clone(), prov }
        })
        .collect();
    let mut elims: Vec<Elim<F>> = Vec::new();

    while let Some(i) = rows.iter().position(|r| r.c.rel == LinRel::Eq) {
        let e = rows.remove(i);
        let Some((&v, a)) = e.c.coeffs.iter().next() else {
            if e.c.is_absurd() {
                return Ok(infeasible(&e));
            }
            continue;
        };
        let a = a.clone();
        for r in rows.iter_mut() {
            let c = r.c.coeff(v);
            if !c.is_zero() {
                *r = r.add_scaled(&e, &(-(c / a.clone())));
            }
        }
        elims.push(Elim::Solved(v, e.c));
    }

    let mut live = Vec::new();
    for r in rows {
        if r.c.is_constant() {
            if r.c.is_absurd() {
                return Ok(infeasible(&r));
            }
        } else {
            live.push(r);
        }
    }
    let mut rows = live;

    let mut pending = order.map(|o| o.to_vec());
    loop {
        let present: BTreeSet<usize> = rows.iter().flat_map(|r| r.c.coeffs.keys().copied()).collect();
        let Some(v) = pick(&rows, &present, pending.as_mut()) else {
            break;
        };
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            let c = r.c.coeff(v);
            if c.is_positive() {
                pos.push(r);
            } else if c.is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        elims.push(Elim::Projected(
            v,
            pos.iter().chain(neg.iter()).map(|r| r.c.clone()).collect(),
        ));
        let mut seen: BTreeSet<Constraint<F>> = rest.iter().map(|r| r.c.clone()).collect();
        for p in &pos {
            for q in &neg {
                let (ap, aq) = (p.c.coeff(v), q.c.coeff(v));
                let combined = p.scale(&(-aq)).add_scaled(q, &ap);
                if combined.c.is_constant() {
                    if combined.c.is_absurd() {
                        return Ok(infeasible(&combined));
                    }
                    continue;
                }
                let combined = combined.normalized();
                if seen.insert(combined.c.clone()) {
                    rest.push(combined);
                }
            }
        }
        rows = rest;
    }

    let mut point = vec![F::zero(); width];
    for e in elims.iter().rev() {
        match e {
            Elim::Projected(v, bounds) => point[*v] = choose(*v, bounds, &point),
            Elim::Solved(v, c) => {
                let a = c.coeff(*v);
                let mut rest = c.clone();
                rest.coeffs.remove(v);
                point[*v] = -(rest.eval(&point) / a);
            }
        }
    }
    debug_assert!(sys.satisfied_by(&point));
    Ok(FmOutcome::Feasible(point))
}

fn pick<F: OrderedField>(rows: &[Row<F>], present: &BTreeSet<usize>, order: Option<&mut Vec<usize>>) -> Option<usize> {
    if present.is_empty() {
        return None;
    }
    if let Some(o) = order {
        while let Some(v) = o.first().copied() {
            o.remove(0);
            if present.contains(&v) {
                return Some(v);
            }
        }
        return None;
    }
    present.iter().copied().min_by_key(|&v| {
        let strict = rows
            .iter()
            .filter(|r| r.c.rel == LinRel::Lt && r.c.coeffs.contains_key(&v))
            .count();
        (strict, v)
    })
}

/// A value for `v` within the bounds the constraints impose once the later
/// variables are fixed.
fn choose<F: OrderedField>(v: usize, bounds: &[Constraint<F>], point: &[F]) -> F {
    let mut lo: Option<(F, bool)> = None;
    let mut hi: Option<(F, bool)> = None;
    for c in bounds {
        let a = c.coeff(v);
        let mut rest = c.clone();
        rest.coeffs.remove(&v);
        let bound = -(rest.eval(point)) / a.clone();
        let strict = c.rel == LinRel::Lt;
        if a.is_positive() {
            if hi.as_ref().map_or(true, |(h, s)| bound < *h || (bound == *h && strict && !s)) {
                hi = Some((bound, strict));
            }
        } else if lo.as_ref().map_or(true, |(l, s)| bound > *l || (bound == *l && strict && !s)) {
            lo = Some((bound, strict));
        }
    }
    let two = F::one() + F::one();
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) if l == h => l,
        (Some((l, _)), Some((h, _))) => (l + h) / two,
        (Some((l, s)), None) => if s { l + F::one() } else { l },
        (None, Some((h, s))) => if s { h - F::one() } else { h },
        (None, None) => F::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linarith::{check_cert, Domain};
    use num_rational::BigRational;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn sys(rows: Vec<(Vec<i64>, i64, LinRel)>) -> LinearSystem<BigRational> {
        let n = rows[0].0.len();
        LinearSystem::new(
            (0..n).map(|i| format!("x{i}")).collect(),
            rows.into_iter()
                .map(|(cs, k, r)| Constraint::new(cs.into_iter().enumerate().map(|(i, c)| (i, q(c))), q(k), r))
                .collect(),
            Domain::Rational,
        )
    }

    #[test]
    fn forced_infeasible() {
        let s = sys(vec![(vec![-1], 1, LinRel::Le), (vec![1], 0, LinRel::Le)]);
        let FmOutcome::Infeasible(c) = fm_decide(&s).unwrap() else {
            panic!()
        };
        assert_eq!(c.multipliers, vec![q(1), q(1)]);
        assert!(check_cert(&c, &s));
    }

    #[test]
    fn origin_feasible() {
        // x + y ≤ 2, x − y ≤ 0, −x ≤ 0
        let s = sys(vec![
            (vec![1, 1], -2, LinRel::Le),
            (vec![1, -1], 0, LinRel::Le),
            (vec![-1, 0], 0, LinRel::Le),
        ]);
        let FmOutcome::Feasible(w) = fm_decide(&s).unwrap() else {
            panic!()
        };
        assert!(s.satisfied_by(&w));
    }

    #[test]
    fn strict_and_equalities() {
        // x = y, x < y is infeasible; x = y, x ≤ y is feasible
        let s = sys(vec![(vec![1, -1], 0, LinRel::Eq), (vec![1, -1], 0, LinRel::Lt)]);
        let FmOutcome::Infeasible(c) = fm_decide(&s).unwrap() else {
            panic!()
        };
        assert!(check_cert(&c, &s));
        let s = sys(vec![(vec![1, -1], 0, LinRel::Eq), (vec![1, -1], 0, LinRel::Le), (vec![0, 1], -3, LinRel::Eq)]);
        let FmOutcome::Feasible(w) = fm_decide(&s).unwrap() else {
            panic!()
        };
        assert_eq!(w, vec![q(3), q(3)]);
    }

    #[test]
    fn variable_limit() {
        let row: Vec<i64> = vec![1; 13];
        let s = sys(vec![(row, 0, LinRel::Le)]);
        assert!(matches!(fm_decide(&s), Err(LinError::TooManyVars { count: 13, .. })));
        assert!(fm_decide_with(&s, 13, None).is_ok());
    }
}
