//! Derived declarations: pointwise instances on function sorts and
//! reassociated companions of composition lemmas.

use thiserror::Error;

use crate::env::{ClassAtom, ClassDecl, Env, InstanceRule, RewriteRule, RuleKind, DEFAULT_PRIORITY};
use crate::syntax::{sym, Numeral, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("class `{0}` is not unary")]
    NotUnary(String),
    #[error("base atom `{atom}` is not an instance of class `{class}`")]
    WrongClass { class: String, atom: String },
    #[error("projection `{proj}` of `{class}` mentions a second carrier")]
    SecondCarrier { class: String, proj: String },
    #[error("unknown projection `{0}`")]
    UnknownProjection(String),
    #[error("operator `{0}` is not declared associative")]
    NotAssociative(String),
    #[error("left-hand side of `{0}` is not a composition `a ≫ b`")]
    NotComposition(String),
}

/// The instance `C (β → α) ← C α` and its pointwise definitional rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiInstance {
    pub instance: InstanceRule,
    pub defs: Vec<RewriteRule>,
}

fn proj_slug(p: &str) -> String {
    match p {
        sym::ADD => "add".into(),
        sym::SUB => "sub".into(),
        sym::MUL => "mul".into(),
        sym::DIV => "div".into(),
        sym::POW => "pow".into(),
        sym::SMUL => "smul".into(),
        sym::COMP => "comp".into(),
        "0" => "zero".into(),
        "1" => "one".into(),
        other if other.bytes().all(|b| b.is_ascii_digit()) => format!("num{other}"),
        other => other.to_string(),
    }
}

fn fresh_var(avoid: &[String], base: &str) -> String {
    let mut k = 0;
    loop {
        let name = if k == 0 {
            base.to_string()
        } else {
            format!("{base}{k}")
        };
        if !avoid.contains(&name) {
            return name;
        }
        k += 1;
    }
}

fn app(f: Term, x: Term, cod: Sort) -> Term {
    Term::op(sym::APP, vec![f, x], cod)
}

/// Lifts the unary class `c` from the carrier of `base` to functions from
/// `fn_sort` into it. Every projection becomes a pointwise definition.
pub fn pi_instance(
    c: &ClassDecl,
    base: &ClassAtom,
    fn_sort: &Sort,
    env: &Env,
) -> Result<PiInstance, DeriveError> {
    if c.arity() != 1 {
        return Err(DeriveError::NotUnary(c.name.clone()));
    }
    if base.class != c.name || base.args.len() != 1 {
        return Err(DeriveError::WrongClass {
            class: c.name.clone(),
            atom: base.to_string(),
        });
    }
    let alpha = base.args[0].clone();
    let lifted = Sort::arrow(fn_sort.clone(), alpha.clone());
    let suffix = match alpha.depth() {
        0 => String::new(),
        d => format!("_{}", d + 1),
    };
    let prefix = format!("{}_pi{suffix}", c.name);
    let mut defs = Vec::new();
    let mut names: Vec<String> = Vec::new();
    alpha.vars(&mut names);
    fn_sort.vars(&mut names);
    let x = Term::var(&fresh_var(&names, "x"), fn_sort.clone());
    for p in &c.projections {
        let rule_name = format!("{prefix}_{}_apply", proj_slug(p));
        if let Some(k) = Numeral::parse_decimal(p) {
            defs.push(RewriteRule {
                name: rule_name,
                lhs: app(Term::numeral(k.clone(), lifted.clone()), x.clone(), alpha.clone()),
                rhs: Term::numeral(k, alpha.clone()),
                conditions: vec![],
                kind: RuleKind::Def,
            });
            continue;
        }
        let op = env
            .op(p)
            .ok_or_else(|| DeriveError::UnknownProjection(p.clone()))?;
        let second = || DeriveError::SecondCarrier {
            class: c.name.clone(),
            proj: p.clone(),
        };
        let Sort::Var(carrier) = &op.result else {
            return Err(second());
        };
        let mut args_f = Vec::new();
        let mut args_x = Vec::new();
        let fnames = ["f", "g", "h", "k"];
        for (i, param) in op.params.iter().enumerate() {
            if matches!(param, Sort::Var(v) if v == carrier) {
                let f = Term::var(&fresh_var(&names, fnames.get(i).unwrap_or(&"f")), lifted.clone());
                names.push(f.var_names()[0].clone());
                args_x.push(app(f.clone(), x.clone(), alpha.clone()));
                args_f.push(f);
            } else if param.is_ground() {
                let v = Term::var(&fresh_var(&names, "n"), param.clone());
                names.push(v.var_names()[0].clone());
                args_x.push(v.clone());
                args_f.push(v);
            } else {
                return Err(second());
            }
        }
        defs.push(RewriteRule {
            name: rule_name,
            lhs: app(Term::op(p, args_f, lifted.clone()), x.clone(), alpha.clone()),
            rhs: Term::op(p, args_x, alpha.clone()),
            conditions: vec![],
            kind: RuleKind::Def,
        });
    }
    Ok(PiInstance {
        instance: InstanceRule {
            name: prefix,
            head: ClassAtom::unary(&c.name, lifted),
            body: vec![base.clone()],
            priority: DEFAULT_PRIORITY,
        },
        defs,
    })
}

/// For `a ≫ b = d` under an associative `≫`, the simp lemma
/// `a ≫ (b ≫ X) = d ≫ X` for a fresh `X`.
pub fn reassoc(rule: &RewriteRule, env: &Env) -> Result<RewriteRule, DeriveError> {
    let Term::Op { sym: op, args, sort } = &rule.lhs else {
        return Err(DeriveError::NotComposition(rule.name.clone()));
    };
    if args.len() != 2 {
        return Err(DeriveError::NotComposition(rule.name.clone()));
    }
    if !env.op(op).map_or(false, |o| o.assoc) {
        return Err(DeriveError::NotAssociative(op.clone()));
    }
    let mut used = rule.lhs.var_names();
    used.extend(rule.rhs.var_names());
    let x = Term::var(&fresh_var(&used, "x"), sort.clone());
    let lhs = Term::op(
        op,
        vec![
            args[0].clone(),
            Term::op(op, vec![args[1].clone(), x.clone()], sort.clone()),
        ],
        sort.clone(),
    );
    let rhs = Term::op(op, vec![rule.rhs.clone(), x], sort.clone());
    Ok(RewriteRule {
        name: format!("{}_assoc", rule.name),
        lhs,
        rhs,
        conditions: rule.conditions.clone(),
        kind: RuleKind::Simp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::format_term;

    #[test]
    fn monoid_on_functions() {
        let env = Env::parse("class monoid (a) { *, 1 }").unwrap();
        let c = env.class("monoid").unwrap();
        let base = ClassAtom::unary("monoid", Sort::var("a"));
        let pi = pi_instance(c, &base, &Sort::var("b"), &env).unwrap();
        assert_eq!(pi.instance.head.to_string(), "monoid(b -> a)");
        assert_eq!(pi.defs.len(), 2);
        assert_eq!(format_term(&pi.defs[0].lhs), "(f * g)(x)");
        assert_eq!(format_term(&pi.defs[0].rhs), "f(x) * g(x)");
        assert_eq!(format_term(&pi.defs[1].lhs), "1(x)");

        let twice = pi_instance(c, &pi.instance.head, &Sort::var("c"), &env).unwrap();
        assert_eq!(twice.instance.head.to_string(), "monoid(c -> b -> a)");
        assert_ne!(twice.instance.name, pi.instance.name);
    }

    #[test]
    fn rejects_binary_and_second_carrier() {
        let env = Env::parse("class module (r m)\nclass normed (a) { norm }").unwrap();
        let m = env.class("module").unwrap();
        let base = ClassAtom::new("module", vec![Sort::var("r"), Sort::var("m")]);
        assert!(matches!(
            pi_instance(m, &base, &Sort::var("b"), &env),
            Err(DeriveError::NotUnary(_))
        ));
        let n = env.class("normed").unwrap();
        let base = ClassAtom::unary("normed", Sort::var("a"));
        assert!(matches!(
            pi_instance(n, &base, &Sort::var("b"), &env),
            Err(DeriveError::SecondCarrier { .. })
        ));
    }

    #[test]
    fn reassoc_companion() {
        let env = Env::parse("[assoc] op ≫ : a -> a -> a\nop id : a").unwrap();
        let src = Env::parse(
            "[assoc] op ≫ : a -> a -> a\nop id : a\nsimp lemma comp_id : f ≫ id = f",
        )
        .unwrap();
        let r = reassoc(&src.rules[0], &env).unwrap();
        assert_eq!(format_term(&r.lhs), "f ≫ id ≫ x");
        assert_eq!(format_term(&r.rhs), "f ≫ x");
        let plain = Env::parse("simp lemma m : x * y = y").unwrap();
        assert!(matches!(
            reassoc(&plain.rules[0], &plain),
            Err(DeriveError::NotAssociative(_))
        ));
    }
}
