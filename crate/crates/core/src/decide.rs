//! Decidable propositions over literal arithmetic: evaluation with a
//! replayable evidence tree, `ite`, and the `dec_trivial` proof route.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::norm_num::{self, NumError, SignedNum};
use crate::syntax::{Numeral, Sort, Subst, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecProp {
    Lit(bool),
    /// A relation between literal expressions (after substituting bound variables).
    Rel(Term),
    Forall {
        var: String,
        sort: Sort,
        bound: Numeral,
        inclusive: bool,
        body: Box<DecProp>,
    },
    And(Box<DecProp>, Box<DecProp>),
    Or(Box<DecProp>, Box<DecProp>),
    Not(Box<DecProp>),
    Implies(Box<DecProp>, Box<DecProp>),
}

impl DecProp {
    pub fn and(a: DecProp, b: DecProp) -> DecProp {
        DecProp::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: DecProp, b: DecProp) -> DecProp {
        DecProp::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: DecProp) -> DecProp {
        DecProp::Not(Box::new(a))
    }

    pub fn implies(a: DecProp, b: DecProp) -> DecProp {
        DecProp::Implies(Box::new(a), Box::new(b))
    }

    pub fn depth(&self) -> usize {
        match self {
            DecProp::Lit(_) | DecProp::Rel(_) => 1,
            DecProp::Forall { body, .. } | DecProp::Not(body) => 1 + body.depth(),
            DecProp::And(a, b) | DecProp::Or(a, b) | DecProp::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    fn subst_var(&self, var: &str, value: &Term) -> DecProp {
        match self {
            DecProp::Lit(b) => DecProp::Lit(*b),
            DecProp::Rel(t) => {
                let mut s = Subst::new();
                s.terms.insert(var.to_string(), value.clone());
                DecProp::Rel(t.subst(&s))
            }
            DecProp::Forall {
                var: v,
                sort,
                bound,
                inclusive,
                body,
            } => DecProp::Forall {
                var: v.clone(),
                sort: sort.clone(),
                bound: bound.clone(),
                inclusive: *inclusive,
                body: if v == var {
                    body.clone()
                } else {
                    Box::new(body.subst_var(var, value))
                },
            },
            DecProp::And(a, b) => DecProp::and(a.subst_var(var, value), b.subst_var(var, value)),
            DecProp::Or(a, b) => DecProp::or(a.subst_var(var, value), b.subst_var(var, value)),
            DecProp::Not(a) => DecProp::not(a.subst_var(var, value)),
            DecProp::Implies(a, b) => {
                DecProp::implies(a.subst_var(var, value), b.subst_var(var, value))
            }
        }
    }

    /// The instances a bounded quantifier ranges over.
    pub fn instances(bound: &Numeral, inclusive: bool) -> Vec<Numeral> {
        let mut out = Vec::new();
        let mut k = Numeral::zero();
        loop {
            let ok = if inclusive { k <= *bound } else { k < *bound };
            if !ok {
                break;
            }
            out.push(k.clone());
            k = k.add(&Numeral::one());
        }
        out
    }
}

impl fmt::Display for DecProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecProp::Lit(b) => write!(f, "{b}"),
            DecProp::Rel(t) => write!(f, "{t}"),
            DecProp::Forall {
                var,
                bound,
                inclusive,
                body,
                ..
            } => write!(
                f,
                "(∀ {var} {} {bound}, {body})",
                if *inclusive { "≤" } else { "<" }
            ),
            DecProp::And(a, b) => write!(f, "({a} ∧ {b})"),
            DecProp::Or(a, b) => write!(f, "({a} ∨ {b})"),
            DecProp::Not(a) => write!(f, "¬{a}"),
            DecProp::Implies(a, b) => write!(f, "({a} → {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("unbounded quantifier: not decidable in this fragment")]
    Unbounded,
    #[error("noncomputable: {0} (only the classical instance exists)")]
    Noncomputable(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// One node per decision taken: which `ite` branch each decidable instance
/// selected, and for relations the numeral evaluation backing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    Lit(bool),
    Rel {
        rel: Term,
        lhs: SignedNum,
        rhs: SignedNum,
        value: bool,
        trace: norm_num::NumTrace,
    },
    /// Children in evaluation order; stops at the first failing instance.
    Forall {
        value: bool,
        instances: Vec<(Numeral, Evidence)>,
    },
    And {
        value: bool,
        children: Vec<Evidence>,
    },
    Or {
        value: bool,
        children: Vec<Evidence>,
    },
    Not {
        value: bool,
        child: Box<Evidence>,
    },
    Implies {
        value: bool,
        children: Vec<Evidence>,
    },
}

impl Evidence {
    pub fn value(&self) -> bool {
        match self {
            Evidence::Lit(b) => *b,
            Evidence::Rel { value, .. }
            | Evidence::Forall { value, .. }
            | Evidence::And { value, .. }
            | Evidence::Or { value, .. }
            | Evidence::Not { value, .. }
            | Evidence::Implies { value, .. } => *value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub value: bool,
    pub evidence: Evidence,
}

/// Evaluates a decidable proposition, recording the evidence of each branch.
pub fn decide(p: &DecProp) -> Result<Decision, DecideError> {
    let evidence = eval(p)?;
    Ok(Decision {
        value: evidence.value(),
        evidence,
    })
}

fn eval(p: &DecProp) -> Result<Evidence, DecideError> {
    Ok(match p {
        DecProp::Lit(b) => Evidence::Lit(*b),
        DecProp::Rel(t) => {
            let Term::Rel { lhs, .. } = t else {
                return Err(DecideError::Noncomputable(format!("`{t}` is not a relation")));
            };
            if let Some((v, _)) = t.vars().into_iter().next() {
                return Err(DecideError::Noncomputable(format!("free variable `{v}`")));
            }
            let sort = lhs.sort();
            if sort == Sort::named("real") {
                return Err(DecideError::Noncomputable(format!(
                    "`{t}` is a proposition about `real`"
                )));
            }
            let proof = norm_num::prove_rel(t)?;
            Evidence::Rel {
                rel: t.clone(),
                lhs: proof.lhs.clone(),
                rhs: proof.rhs.clone(),
                value: proof.holds,
                trace: proof.trace,
            }
        }
        DecProp::Forall {
            var,
            sort,
            bound,
            inclusive,
            body,
        } => {
            let mut instances = Vec::new();
            let mut value = true;
            for k in DecProp::instances(bound, *inclusive) {
                let inst = body.subst_var(var, &Term::numeral(k.clone(), sort.clone()));
                let ev = eval(&inst)?;
                let ok = ev.value();
                instances.push((k, ev));
                if !ok {
                    value = false;
                    break;
                }
            }
            Evidence::Forall { value, instances }
        }
        DecProp::And(a, b) => {
            let ea = eval(a)?;
            if !ea.value() {
                Evidence::And {
                    value: false,
                    children: vec![ea],
                }
            } else {
                let eb = eval(b)?;
                Evidence::And {
                    value: eb.value(),
                    children: vec![ea, eb],
                }
            }
        }
        DecProp::Or(a, b) => {
            let ea = eval(a)?;
            if ea.value() {
                Evidence::Or {
                    value: true,
                    children: vec![ea],
                }
            } else {
                let eb = eval(b)?;
                Evidence::Or {
                    value: eb.value(),
                    children: vec![ea, eb],
                }
            }
        }
        DecProp::Not(a) => {
            let ea = eval(a)?;
            Evidence::Not {
                value: !ea.value(),
                child: Box::new(ea),
            }
        }
        DecProp::Implies(a, b) => {
            let ea = eval(a)?;
            if !ea.value() {
                Evidence::Implies {
                    value: true,
                    children: vec![ea],
                }
            } else {
                let eb = eval(b)?;
                Evidence::Implies {
                    value: eb.value(),
                    children: vec![ea, eb],
                }
            }
        }
    })
}

/// `if p then a else b`: selects a branch; the proposition never reaches the result.
pub fn ite_eval(p: &DecProp, then_val: &Term, else_val: &Term) -> Result<Term, DecideError> {
    Ok(if decide(p)?.value {
        then_val.clone()
    } else {
        else_val.clone()
    })
}

/// Replays an evidence tree against the proposition it claims to decide.
pub fn replay_evidence(p: &DecProp, ev: &Evidence) -> Result<bool, String> {
    match (p, ev) {
        (DecProp::Lit(a), Evidence::Lit(b)) if a == b => Ok(*a),
        (
            DecProp::Rel(t),
            Evidence::Rel {
                rel,
                lhs,
                rhs,
                value,
                trace,
            },
        ) => {
            if t != rel {
                return Err(format!("evidence decides `{rel}`, expected `{t}`"));
            }
            norm_num::verify_rel(t, lhs, rhs, *value, trace)?;
            Ok(*value)
        }
        (
            DecProp::Forall {
                var,
                sort,
                bound,
                inclusive,
                body,
            },
            Evidence::Forall { value, instances },
        ) => {
            let all = DecProp::instances(bound, *inclusive);
            for (i, (k, child)) in instances.iter().enumerate() {
                if all.get(i) != Some(k) {
                    return Err(format!("instance {i} of ∀ {var} is out of order"));
                }
                let inst = body.subst_var(var, &Term::numeral(k.clone(), sort.clone()));
                let v = replay_evidence(&inst, child)?;
                let last = i + 1 == instances.len();
                if !v && !last {
                    return Err("evaluation continued past a failing instance".into());
                }
            }
            let computed = match instances.last() {
                None => {
                    if !all.is_empty() {
                        return Err("∀ evidence omits instances".into());
                    }
                    true
                }
                Some((_, last)) => {
                    let v = last.value();
                    if v && instances.len() != all.len() {
                        return Err("∀ evidence omits instances".into());
                    }
                    v
                }
            };
            check_value(computed, *value)
        }
        (DecProp::And(a, b), Evidence::And { value, children }) => {
            let va = replay_child(a, children.first())?;
            let computed = if !va {
                if children.len() != 1 {
                    return Err("∧ evaluated its right side after a false left side".into());
                }
                false
            } else {
                replay_child(b, children.get(1))?
            };
            check_value(computed, *value)
        }
        (DecProp::Or(a, b), Evidence::Or { value, children }) => {
            let va = replay_child(a, children.first())?;
            let computed = if va {
                if children.len() != 1 {
                    return Err("∨ evaluated its right side after a true left side".into());
                }
                true
            } else {
                replay_child(b, children.get(1))?
            };
            check_value(computed, *value)
        }
        (DecProp::Implies(a, b), Evidence::Implies { value, children }) => {
            let va = replay_child(a, children.first())?;
            let computed = if !va {
                if children.len() != 1 {
                    return Err("→ evaluated its conclusion after a false premise".into());
                }
                true
            } else {
                replay_child(b, children.get(1))?
            };
            check_value(computed, *value)
        }
        (DecProp::Not(a), Evidence::Not { value, child }) => {
            let v = replay_evidence(a, child)?;
            check_value(!v, *value)
        }
        _ => Err("evidence shape does not match the proposition".into()),
    }
}

fn replay_child(p: &DecProp, ev: Option<&Evidence>) -> Result<bool, String> {
    match ev {
        Some(e) => replay_evidence(p, e),
        None => Err("missing evidence for a subproposition".into()),
    }
}

fn check_value(computed: bool, claimed: bool) -> Result<bool, String> {
    if computed == claimed {
        Ok(computed)
    } else {
        Err(format!("evidence claims {claimed}, replay gives {computed}"))
    }
}
