//! Mapping of relation terms to linear systems, refutation of the negated
//! goal, and replay of the resulting certificates.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{check_cert, fm_decide, int_tighten, Certificate, Constraint, Domain, FmOutcome, LinError, LinRel, LinearSystem};
use crate::arith::norm_num::MAX_EXPONENT;
use crate::prooftrace::{ProofTrace, Terminal, TraceGoal};
use crate::scalar::{format_rational, parse_rational};
use crate::syntax::{format_term, sym, RelOp, Sort, Term};

/// Upper bound on the number of systems produced by disequality splits.
pub const MAX_CASES: usize = 64;

#[derive(Debug, Clone)]
pub enum LinarithOutcome {
    Proved {
        trace: ProofTrace,
        /// Each refuted system with its certificate, in case order.
        refutations: Vec<(LinearSystem<BigRational>, Certificate<BigRational>)>,
    },
    /// The negated goal is satisfiable over the rationals; the witness
    /// assigns a value to every atom of the first satisfiable case.
    Unknown { witness: BTreeMap<String, BigRational> },
}

impl LinarithOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, LinarithOutcome::Proved { .. })
    }
}

type LinExpr = (BTreeMap<usize, BigRational>, BigRational);

/// Assigns variable indices to maximal non-linear subterms.
struct Linearizer {
    atoms: Vec<Term>,
    rational: bool,
}

fn is_field(s: &Sort) -> bool {
    matches!(s, Sort::Named(n) if n == "rat" || n == "real")
}

fn is_integral(s: &Sort) -> bool {
    matches!(s, Sort::Named(n) if n == "int" || n == "nat")
}

impl Linearizer {
    fn atom(&mut self, t: &Term) -> LinExpr {
        let i = match self.atoms.iter().position(|a| a == t) {
            Some(i) => i,
            None => {
                self.atoms.push(t.clone());
                self.atoms.len() - 1
            }
        };
        (BTreeMap::from([(i, BigRational::one())]), BigRational::zero())
    }

    fn constant(v: BigRational) -> LinExpr {
        (BTreeMap::new(), v)
    }

    fn combine(a: LinExpr, b: LinExpr, k: &BigRational) -> LinExpr {
        let (mut m, c) = a;
        for (v, x) in b.0 {
            let e = m.entry(v).or_insert_with(BigRational::zero);
            *e += x * k;
        }
        m.retain(|_, x| !x.is_zero());
        (m, c + b.1 * k)
    }

    fn scale(a: LinExpr, k: &BigRational) -> LinExpr {
        let (m, c) = a;
        let m = m
            .into_iter()
            .map(|(v, x)| (v, x * k))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        (m, c * k)
    }

    fn as_constant(e: &LinExpr) -> Option<BigRational> {
        e.0.is_empty().then(|| e.1.clone())
    }

    fn linearize(&mut self, t: &Term) -> LinExpr {
        let Term::Op { sym: s, args, sort } = t else {
            return match t {
                Term::Num { value, .. } => Self::constant(BigRational::from_integer(value.to_biguint().into())),
                _ => self.atom(t),
            };
        };
        let one = BigRational::one();
        match (s.as_str(), args.as_slice()) {
            (sym::ADD, [a, b]) => {
                let (a, b) = (self.linearize(a), self.linearize(b));
                Self::combine(a, b, &one)
            }
            (sym::SUB, [a, b]) if *sort != Sort::nat() => {
                let (a, b) = (self.linearize(a), self.linearize(b));
                Self::combine(a, b, &-one)
            }
            (sym::NEG, [a]) if *sort != Sort::nat() => {
                let a = self.linearize(a);
                Self::scale(a, &-one)
            }
            (sym::MUL | sym::SMUL, [a, b]) => {
                let snapshot = self.atoms.len();
                let (la, lb) = (self.linearize(a), self.linearize(b));
                match (Self::as_constant(&la), Self::as_constant(&lb)) {
                    (Some(k), _) => Self::scale(lb, &k),
                    (_, Some(k)) => Self::scale(la, &k),
                    _ => {
                        self.atoms.truncate(snapshot);
                        self.atom(t)
                    }
                }
            }
            (sym::DIV, [a, b]) if self.rational && is_field(sort) => {
                let snapshot = self.atoms.len();
                let la = self.linearize(a);
                let lb = self.linearize(b);
                match Self::as_constant(&lb) {
                    Some(k) if !k.is_zero() => Self::scale(la, &k.recip()),
                    _ => {
                        self.atoms.truncate(snapshot);
                        self.atom(t)
                    }
                }
            }
            (sym::POW, [base, Term::Num { value, .. }]) => {
                let snapshot = self.atoms.len();
                let lb = self.linearize(base);
                match (Self::as_constant(&lb), value.to_u64()) {
                    (Some(k), Some(e)) if e <= MAX_EXPONENT => {
                        Self::constant(num_traits::pow::pow(k, e as usize))
                    }
                    _ => {
                        self.atoms.truncate(snapshot);
                        self.atom(t)
                    }
                }
            }
            _ => self.atom(t),
        }
    }

    /// `lhs op rhs` as constraints `Σ a·x + c rel 0`; a disequality gives
    /// two alternatives. `None` for relations outside the linear fragment.
    fn relation(&mut self, op: RelOp, lhs: &Term, rhs: &Term) -> Option<Vec<Vec<Constraint<BigRational>>>> {
        let l = self.linearize(lhs);
        let r = self.linearize(rhs);
        let l_minus_r = Self::combine(l, r, &-BigRational::one());
        let r_minus_l = Self::scale(l_minus_r.clone(), &-BigRational::one());
        let mk = |e: &LinExpr, rel| Constraint::new(e.0.clone(), e.1.clone(), rel);
        Some(match op {
            RelOp::Lt => vec![vec![mk(&l_minus_r, LinRel::Lt)]],
            RelOp::Le => vec![vec![mk(&l_minus_r, LinRel::Le)]],
            RelOp::Gt => vec![vec![mk(&r_minus_l, LinRel::Lt)]],
            RelOp::Ge => vec![vec![mk(&r_minus_l, LinRel::Le)]],
            RelOp::Eq => vec![vec![mk(&l_minus_r, LinRel::Eq)]],
            RelOp::Ne => vec![vec![mk(&l_minus_r, LinRel::Lt)], vec![mk(&r_minus_l, LinRel::Lt)]],
            RelOp::Dvd => return None,
        })
    }
}

fn negate(op: RelOp) -> Option<RelOp> {
    Some(match op {
        RelOp::Lt => RelOp::Ge,
        RelOp::Le => RelOp::Gt,
        RelOp::Gt => RelOp::Le,
        RelOp::Ge => RelOp::Lt,
        RelOp::Eq => RelOp::Ne,
        RelOp::Ne => RelOp::Eq,
        RelOp::Dvd => return None,
    })
}

/// Scales to integral coefficients and constant.
fn clear_denominators(c: &Constraint<BigRational>) -> Constraint<BigRational> {
    let l = c
        .coeffs
        .values()
        .chain(std::iter::once(&c.constant))
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    c.scale(&BigRational::from_integer(l))
}

/// The systems whose joint infeasibility proves `hyps ⊢ goal`, and the
/// atoms that their variables stand for.
///
/// Hypotheses that are not linear relations are dropped. Atoms of sort
/// `nat`, and coercions out of `nat`, are constrained to be nonnegative.
/// In integer mode every atom must have an integral sort, and each
/// constraint is scaled to integers and tightened.
pub fn build_cases(
    hyps: &[Term],
    goal: &Term,
    int_mode: bool,
) -> Result<(Vec<Term>, Vec<LinearSystem<BigRational>>), LinError> {
    let Term::Rel { op, lhs, rhs } = goal else {
        return Err(LinError::NotLinear(format_term(goal)));
    };
    let neg = negate(*op).ok_or_else(|| LinError::NotLinear(format_term(goal)))?;
    let mut lin = Linearizer {
        atoms: Vec::new(),
        rational: !int_mode,
    };
    let mut cases: Vec<Vec<Constraint<BigRational>>> = vec![Vec::new()];
    let conj = |alts: Vec<Vec<Constraint<BigRational>>>, cases: &mut Vec<Vec<Constraint<BigRational>>>| {
        let total = cases.len() * alts.len();
        if total > MAX_CASES {
            return Err(LinError::TooManyCases(total));
        }
        *cases = cases
            .iter()
            .flat_map(|base| {
                alts.iter().map(move |alt| {
                    let mut c = base.clone();
                    c.extend(alt.iter().cloned());
                    c
                })
            })
            .collect();
        Ok(())
    };
    for h in hyps {
        if let Term::Rel { op, lhs, rhs } = h {
            if let Some(alts) = lin.relation(*op, lhs, rhs) {
                conj(alts, &mut cases)?;
            }
        }
    }
    let alts = lin
        .relation(neg, lhs, rhs)
        .ok_or_else(|| LinError::NotLinear(format_term(goal)))?;
    conj(alts, &mut cases)?;

    let mut nonneg = Vec::new();
    for (i, a) in lin.atoms.iter().enumerate() {
        if int_mode && !is_integral(&a.sort()) {
            return Err(LinError::NotLinear(format!("{} has non-integral sort", format_term(a))));
        }
        let from_nat = matches!(a, Term::Coerce { from, .. } if *from == Sort::nat());
        if a.sort() == Sort::nat() || from_nat {
            nonneg.push(Constraint::new([(i, -BigRational::one())], BigRational::zero(), LinRel::Le));
        }
    }
    let vars: Vec<String> = lin.atoms.iter().map(format_term).collect();
    let systems = cases
        .into_iter()
        .map(|mut cs| {
            cs.extend(nonneg.iter().cloned());
            let sys = LinearSystem::new(vars.clone(), cs, Domain::Rational);
            if int_mode {
                let scaled = LinearSystem::new(
                    vars.clone(),
                    sys.constraints.iter().map(clear_denominators).collect(),
                    Domain::Int,
                );
                int_tighten(&scaled)
            } else {
                Ok(sys)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((lin.atoms, systems))
}

/// Proves `goal` from `hyps` by refuting every case of the negated goal.
pub fn linarith_goal(hyps: &[Term], goal: &Term, int_mode: bool) -> Result<LinarithOutcome, LinError> {
    let (atoms, systems) = build_cases(hyps, goal, int_mode)?;
    let mut refutations = Vec::new();
    for sys in systems {
        match fm_decide(&sys)? {
            FmOutcome::Infeasible(cert) => {
                debug_assert!(check_cert(&cert, &sys));
                refutations.push((sys, cert));
            }
            FmOutcome::Feasible(point) => {
                let witness = atoms
                    .iter()
                    .zip(point)
                    .map(|(a, v)| (format_term(a), v))
                    .collect();
                return Ok(LinarithOutcome::Unknown { witness });
            }
        }
    }
    let cases = refutations
        .iter()
        .map(|(_, c)| c.multipliers.iter().map(format_rational).collect())
        .collect();
    let trace = ProofTrace::new(
        if int_mode { "omega" } else { "linarith" },
        TraceGoal::Linear {
            hyps: hyps.to_vec(),
            goal: goal.clone(),
            int_mode,
        },
        Vec::new(),
        Terminal::Certificate { cases },
    );
    Ok(LinarithOutcome::Proved { trace, refutations })
}

/// Rebuilds the cases from the goal and checks one certificate per case.
pub fn verify_refutation(hyps: &[Term], goal: &Term, int_mode: bool, cases: &[Vec<String>]) -> Result<(), String> {
    let (_, systems) = build_cases(hyps, goal, int_mode).map_err(|e| e.to_string())?;
    if systems.len() != cases.len() {
        return Err(format!("{} cases expected, {} certificates given", systems.len(), cases.len()));
    }
    for (i, (sys, ms)) in systems.iter().zip(cases).enumerate() {
        let multipliers = ms
            .iter()
            .map(|m| parse_rational(m).ok_or_else(|| format!("case {i}: bad multiplier `{m}`")))
            .collect::<Result<Vec<_>, _>>()?;
        if multipliers.iter().all(|m| m.is_zero()) {
            return Err(format!("case {i}: trivial certificate"));
        }
        if !check_cert(&Certificate { multipliers }, sys) {
            return Err(format!("case {i}: certificate does not refute the system"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Env;
    use crate::prooftrace::verify;
    use crate::syntax::{parse_term, TermCtx};

    fn t(src: &str, sort: Sort) -> Term {
        parse_term(src, &Env::new(), &TermCtx::with_default(sort)).unwrap()
    }

    fn prove(hyps: &[&str], goal: &str, sort: Sort, int_mode: bool) -> LinarithOutcome {
        let hyps: Vec<Term> = hyps.iter().map(|h| t(h, sort.clone())).collect();
        let out = linarith_goal(&hyps, &t(goal, sort), int_mode).unwrap();
        if let LinarithOutcome::Proved { trace, .. } = &out {
            assert!(verify(trace, &Env::new()).is_accepted());
        }
        out
    }

    #[test]
    fn transitivity_uses_unit_multipliers() {
        let LinarithOutcome::Proved { refutations, .. } = prove(&["a ≤ b", "b ≤ c"], "a ≤ c", Sort::named("rat"), false)
        else {
            panic!()
        };
        let one = BigRational::one();
        assert_eq!(refutations[0].1.multipliers, vec![one.clone(), one.clone(), one]);
    }

    #[test]
    fn successor_is_larger() {
        assert!(prove(&[], "x < x + 1", Sort::named("rat"), false).is_proved());
    }

    #[test]
    fn integrality_needs_tightening() {
        assert!(prove(&["2 * x ≥ 1"], "x ≥ 1", Sort::int(), true).is_proved());
        let LinarithOutcome::Unknown { witness } = prove(&["2 * x ≥ 1"], "x ≥ 1", Sort::int(), false) else {
            panic!()
        };
        let x = &witness["x"];
        assert!(x * BigRational::from_integer(2.into()) >= BigRational::one() && *x < BigRational::one());
    }

    #[test]
    fn equality_goal_splits() {
        assert!(prove(&["a ≤ b", "b ≤ a"], "a = b", Sort::named("rat"), false).is_proved());
        assert!(!prove(&["a ≤ b"], "a = b", Sort::named("rat"), false).is_proved());
    }

    #[test]
    fn nat_atoms_are_nonnegative() {
        assert!(prove(&[], "0 ≤ n", Sort::nat(), false).is_proved());
        assert!(prove(&["n - m = 0"], "0 ≤ n", Sort::nat(), false).is_proved());
    }

    #[test]
    fn rational_division_is_linear() {
        assert!(prove(&["x / 2 ≤ 1"], "x ≤ 2", Sort::named("rat"), false).is_proved());
    }

    #[test]
    fn nonlinear_products_are_opaque() {
        assert!(prove(&["x * y ≤ 1"], "x * y < 2", Sort::int(), false).is_proved());
        assert!(!prove(&["x * y ≤ 1"], "x ≤ 1", Sort::int(), false).is_proved());
    }

    #[test]
    fn tampered_certificate_rejected() {
        let LinarithOutcome::Proved { mut trace, .. } = prove(&["a ≤ b", "b ≤ c"], "a ≤ c", Sort::int(), false) else {
            panic!()
        };
        let Terminal::Certificate { cases } = &mut trace.terminal else {
            panic!()
        };
        cases[0][0] = "2".into();
        assert!(!verify(&trace, &Env::new()).is_accepted());
    }

    /// 27 ≤ 11x + 13y ≤ 45 and −10 ≤ 7x − 9y ≤ 4 has no integer solution,
    /// but its real shadow does, so integer mode cannot refute it.
    #[test]
    fn dark_shadow_gap() {
        let hyps = ["27 ≤ 11 * x + 13 * y", "11 * x + 13 * y ≤ 45", "-10 ≤ 7 * x - 9 * y", "7 * x - 9 * y ≤ 4"];
        assert!(!prove(&hyps, "x < x", Sort::int(), true).is_proved());
        for x in -20i64..=20 {
            for y in -20i64..=20 {
                let (s, d) = (11 * x + 13 * y, 7 * x - 9 * y);
                assert!(!((27..=45).contains(&s) && (-10..=4).contains(&d)));
            }
        }
    }
}
