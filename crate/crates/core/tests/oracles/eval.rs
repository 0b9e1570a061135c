//! Direct evaluation of terms under a variable assignment.

use std::collections::BTreeMap;

use lemmata::syntax::{RelOp, Sort, Term};
use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Num(BigInt),
    Bool(bool),
}

pub type Assignment = BTreeMap<String, BigInt>;

fn num(t: &Term, env: &Assignment) -> Option<BigInt> {
    match eval(t, env)? {
        Value::Num(n) => Some(n),
        Value::Bool(_) => None,
    }
}

/// `None` for symbols outside `+ - * ^`, negation, casts and relations.
pub fn eval(t: &Term, env: &Assignment) -> Option<Value> {
    Some(match t {
        Term::Var { name, .. } => Value::Num(env.get(name)?.clone()),
        Term::Num { value, .. } => Value::Num(BigInt::from(value.to_biguint())),
        Term::Coerce { arg, .. } => Value::Num(num(arg, env)?),
        Term::Op { sym, args, sort } => {
            let vals: Vec<BigInt> = args.iter().map(|a| num(a, env)).collect::<Option<_>>()?;
            let nat = *sort == Sort::nat();
            Value::Num(match (sym.as_str(), vals.as_slice()) {
                ("+", [a, b]) => a + b,
                ("*", [a, b]) => a * b,
                ("-", [a, b]) if nat => (a - b).max(BigInt::zero()),
                ("-", [a, b]) => a - b,
                ("neg", [a]) => -a,
                ("^", [a, e]) => num_traits::pow(a.clone(), usize::try_from(e.magnitude().clone()).ok()?),
                _ => return None,
            })
        }
        Term::Rel { op, lhs, rhs } => match op {
            RelOp::Eq if lhs.sort() == Sort::Prop => Value::Bool(eval(lhs, env)? == eval(rhs, env)?),
            _ => {
                let (a, b) = (num(lhs, env)?, num(rhs, env)?);
                Value::Bool(match op {
                    RelOp::Eq => a == b,
                    RelOp::Ne => a != b,
                    RelOp::Lt => a < b,
                    RelOp::Le => a <= b,
                    RelOp::Gt => a > b,
                    RelOp::Ge => a >= b,
                    RelOp::Dvd => {
                        if a.is_zero() {
                            b.is_zero()
                        } else {
                            (b % a).is_zero()
                        }
                    }
                })
            }
        },
    })
}
