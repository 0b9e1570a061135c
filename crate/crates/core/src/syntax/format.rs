//! Pretty-printing of terms and declarations back to parseable source.

use std::fmt::Write;

use super::parser::{infix_info, NEG_PREC};
use super::sort::Sort;
use super::term::{sym, RelOp, Term};
use crate::env::{DeclKind, Declaration, Env, Lemma, Statement};

const ATOM_PREC: u8 = 100;

fn infix_symbol(op: &str) -> Option<(u8, bool)> {
    let (p, assoc, _) = infix_info(op)?;
    if p < 65 {
        return None;
    }
    Some((p, matches!(assoc, super::parser::Assoc::Right)))
}

fn prec_of(t: &Term) -> u8 {
    match t {
        Term::Op { sym: s, args, .. } if args.len() == 2 && infix_symbol(s).is_some() => {
            infix_symbol(s).unwrap().0
        }
        Term::Op { sym: s, .. } if s == sym::NEG => NEG_PREC,
        Term::Rel { op: RelOp::Eq, lhs, .. } if lhs.sort() == Sort::Prop => 10,
        Term::Rel { .. } => 50,
        _ => ATOM_PREC,
    }
}

fn write_at(out: &mut String, t: &Term, min: u8) {
    if prec_of(t) < min {
        out.push('(');
        write_term(out, t);
        out.push(')');
    } else {
        write_term(out, t);
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var { name, .. } => out.push_str(name),
        Term::Num { value, .. } => out.push_str(&value.to_decimal()),
        Term::Coerce { arg, .. } => {
            out.push('↑');
            write_at(out, arg, ATOM_PREC);
        }
        Term::Rel { op, lhs, rhs } => {
            let (p, s) = if *op == RelOp::Eq && lhs.sort() == Sort::Prop {
                (10, "↔")
            } else {
                (50, op.symbol())
            };
            write_at(out, lhs, p + 1);
            let _ = write!(out, " {s} ");
            write_at(out, rhs, p + 1);
        }
        Term::Op { sym: s, args, .. } => {
            if args.len() == 2 {
                if let Some((p, right)) = infix_symbol(s) {
                    let (lp, rp) = if right { (p + 1, p) } else { (p, p + 1) };
                    write_at(out, &args[0], lp);
                    let _ = write!(out, " {s} ");
                    write_at(out, &args[1], rp);
                    return;
                }
            }
            match s.as_str() {
                sym::NEG if args.len() == 1 => {
                    out.push('-');
                    write_at(out, &args[0], NEG_PREC);
                }
                sym::NORM if args.len() == 1 => {
                    out.push('∥');
                    write_term(out, &args[0]);
                    out.push('∥');
                }
                sym::APP if args.len() == 2 => {
                    write_at(out, &args[0], ATOM_PREC);
                    out.push('(');
                    write_term(out, &args[1]);
                    out.push(')');
                }
                _ if args.is_empty() => out.push_str(s),
                _ => {
                    out.push_str(s);
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_term(out, a);
                    }
                    out.push(')');
                }
            }
        }
    }
}

/// Renders a term in the surface syntax. Sorts are not printed.
pub fn format_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

fn scheme(params: &[Sort], result: &Sort) -> String {
    params
        .iter()
        .chain(std::iter::once(result))
        .map(Sort::atom_arg)
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn atom(a: &crate::env::ClassAtom) -> String {
    let mut s = a.class.clone();
    for arg in &a.args {
        s.push(' ');
        s.push_str(&arg.atom_arg());
    }
    s
}

/// Groups `(x y : S)` binders, keeping first-occurrence order.
fn binders(vars: &[(String, Sort)]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < vars.len() {
        let sort = &vars[i].1;
        let mut names = vec![vars[i].0.clone()];
        let mut j = i + 1;
        while j < vars.len() && &vars[j].1 == sort {
            names.push(vars[j].0.clone());
            j += 1;
        }
        let _ = write!(out, " ({} : {sort})", names.join(" "));
        i = j;
    }
    out
}

fn rule_vars(lhs: &Term, rhs: &Term) -> Vec<(String, Sort)> {
    let mut vars = lhs.vars();
    for v in rhs.vars() {
        if !vars.iter().any(|(n, _)| *n == v.0) {
            vars.push(v);
        }
    }
    vars
}

fn lemma_text(l: &Lemma) -> String {
    let mut out = l.name.clone();
    out.push_str(&binders(&l.vars));
    for h in &l.hyps {
        let _ = write!(out, " ({} : {})", h.name, format_term(&h.stmt));
    }
    for c in &l.conditions {
        let _ = write!(out, " [{}]", atom(c));
    }
    out.push_str(" : ");
    match &l.stmt {
        Statement::Term(t) => out.push_str(&format_term(t)),
        Statement::Class(a) => out.push_str(&atom(a)),
        Statement::Decidable(p) => out.push_str(&p.to_string()),
    }
    if let Some(t) = &l.tactic {
        let _ = write!(out, " by {}", t.kind.name());
        if let Some(u) = &t.using {
            let _ = write!(out, " using {}", u.join(", "));
        }
    }
    out
}

/// Renders one declaration (with its doc comment and attributes) as source text.
pub fn format_decl(d: &Declaration) -> String {
    let mut out = String::new();
    if let Some(doc) = &d.doc {
        let _ = writeln!(out, "/-- {doc} -/");
    }
    let attrs: Vec<String> = d
        .attrs
        .iter()
        .filter(|a| !(a.as_str() == "simp" && d.keyword() == "simp lemma"))
        .map(|a| match (&d.kind, a.as_str()) {
            (DeclKind::Instance(r), "priority") => format!("priority {}", r.priority),
            _ => a.clone(),
        })
        .collect();
    if !attrs.is_empty() {
        let _ = write!(out, "[{}] ", attrs.join(", "));
    }
    match &d.kind {
        DeclKind::Sort => {
            let _ = write!(out, "sort {}", d.name);
        }
        DeclKind::Coe(c) => {
            let _ = write!(out, "coe {} {}", c.from.atom_arg(), c.to.atom_arg());
        }
        DeclKind::Op(o) => {
            let _ = write!(out, "op {} : {}", o.name, scheme(&o.params, &o.result));
        }
        DeclKind::Class(c) => {
            let _ = write!(out, "class {} ({})", c.name, c.params.join(" "));
            if !c.projections.is_empty() {
                let _ = write!(out, " {{ {} }}", c.projections.join(", "));
            }
        }
        DeclKind::Instance(r) => {
            let _ = write!(out, "instance {} : {}", r.name, atom(&r.head));
            if !r.body.is_empty() {
                let body: Vec<String> = r.body.iter().map(atom).collect();
                let _ = write!(out, " <- {}", body.join(", "));
            }
        }
        DeclKind::Rewrite(r) => {
            let kw = d.keyword();
            let _ = write!(out, "{kw} {}", r.name);
            out.push_str(&binders(&rule_vars(&r.lhs, &r.rhs)));
            for c in &r.conditions {
                let _ = write!(out, " [{}]", atom(c));
            }
            let eq = Term::rel(RelOp::Eq, r.lhs.clone(), r.rhs.clone());
            let _ = write!(out, " : {}", format_term(&eq));
        }
        DeclKind::Lemma(l) => {
            let _ = write!(out, "lemma {}", lemma_text(l));
        }
        DeclKind::Goal(g) => {
            let _ = write!(out, "goal {}", lemma_text(g));
        }
    }
    out
}

/// Renders every user declaration of `env`, one per line. Declarations that
/// the parser generates itself (reassoc companions, class projection
/// operators) are left out so the output re-parses to the same environment.
pub fn format_env(env: &Env) -> String {
    let mut out = String::new();
    let mut skip: Vec<String> = Vec::new();
    for d in &env.decls {
        if d.attrs.iter().any(|a| a == "reassoc") {
            skip.push(format!("{}_assoc", d.name));
        }
    }
    for d in &env.decls {
        if skip.contains(&d.name) {
            continue;
        }
        out.push_str(&format_decl(d));
        out.push('\n');
    }
    out
}
