//! Declaration and term parser for `.hl` sources.
//!
//! Parsing is two-staged: tokens are read into an untyped expression tree,
//! which is then elaborated against the environment (operator signatures,
//! coercions, binders) by a small sort unifier.

use std::collections::BTreeMap;

use super::error::{ParseError, Pos};
use super::lexer::{lex, Tok, Token};
use super::numeral::Numeral;
use super::sort::Sort;
use super::term::{sym, RelOp, Term};
use crate::decide::DecProp;
use crate::env::{
    ClassAtom, ClassDecl, CoeDecl, DeclKind, Declaration, Env, Hypothesis, InstanceRule, Lemma,
    OpDecl, RewriteRule, RuleKind, Statement, Tactic, TacticKind, DEFAULT_PRIORITY,
};

/// How free identifiers and unresolved sorts are treated while elaborating a term.
#[derive(Debug, Clone, Default)]
pub struct TermCtx {
    /// Variables with known sorts (binders).
    pub vars: Vec<(String, Sort)>,
    /// Sort used for anything inference leaves open.
    pub default_sort: Option<Sort>,
    /// Allow unbound identifiers to become variables.
    pub implicit_vars: bool,
    /// Leave open sorts as schematic sort variables instead of defaulting them.
    pub pattern: bool,
}

impl TermCtx {
    /// Implicit variables, open sorts defaulting to `sort`.
    pub fn with_default(sort: Sort) -> Self {
        TermCtx {
            vars: Vec::new(),
            default_sort: Some(sort),
            implicit_vars: true,
            pattern: false,
        }
    }

    /// Pattern mode, as used for lemma statements.
    pub fn pattern() -> Self {
        TermCtx {
            vars: Vec::new(),
            default_sort: None,
            implicit_vars: true,
            pattern: true,
        }
    }

    /// Every variable must be bound in `vars`.
    pub fn strict(vars: Vec<(String, Sort)>, default_sort: Sort) -> Self {
        TermCtx {
            vars,
            default_sort: Some(default_sort),
            implicit_vars: false,
            pattern: false,
        }
    }

    pub fn bind(mut self, name: &str, sort: Sort) -> Self {
        self.vars.push((name.to_string(), sort));
        self
    }
}

// ---------------------------------------------------------------------------
// Untyped expression trees

#[derive(Debug, Clone)]
enum Raw {
    Ident(String, Pos),
    Num(String, Pos),
    Call(String, Vec<Raw>, Pos),
    App(Box<Raw>, Vec<Raw>, Pos),
    Bin(&'static str, Box<Raw>, Box<Raw>, Pos),
    Neg(Box<Raw>, Pos),
    Coe(Box<Raw>, Pos),
    Norm(Box<Raw>, Pos),
    Rel(RelOp, Box<Raw>, Box<Raw>, Pos),
    Iff(Box<Raw>, Box<Raw>, Pos),
    Ascribe(Box<Raw>, Sort, Pos),
}

impl Raw {
    fn pos(&self) -> Pos {
        match self {
            Raw::Ident(_, p)
            | Raw::Num(_, p)
            | Raw::Call(_, _, p)
            | Raw::App(_, _, p)
            | Raw::Bin(_, _, _, p)
            | Raw::Neg(_, p)
            | Raw::Coe(_, p)
            | Raw::Norm(_, p)
            | Raw::Rel(_, _, _, p)
            | Raw::Iff(_, _, p)
            | Raw::Ascribe(_, _, p) => *p,
        }
    }
}

#[derive(Debug, Clone)]
enum RawProp {
    Lit(bool),
    Rel(Raw),
    Forall {
        var: String,
        bound: Numeral,
        inclusive: bool,
        body: Box<RawProp>,
    },
    And(Box<RawProp>, Box<RawProp>),
    Or(Box<RawProp>, Box<RawProp>),
    Not(Box<RawProp>),
    Implies(Box<RawProp>, Box<RawProp>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Left,
    Right,
    Non,
}

#[derive(Clone, Copy)]
enum Infix {
    Op(&'static str),
    Rel(RelOp),
    Iff,
}

/// Binding power of infix symbols. Relations are non-associative.
pub(crate) fn infix_info(sym_tok: &str) -> Option<(u8, Assoc, &'static str)> {
    Some(match sym_tok {
        "↔" => (10, Assoc::Non, "↔"),
        "=" => (50, Assoc::Non, "="),
        "≠" => (50, Assoc::Non, "≠"),
        "<" => (50, Assoc::Non, "<"),
        "≤" => (50, Assoc::Non, "≤"),
        ">" => (50, Assoc::Non, ">"),
        "≥" => (50, Assoc::Non, "≥"),
        "∣" => (50, Assoc::Non, "∣"),
        "+" => (65, Assoc::Left, sym::ADD),
        "-" => (65, Assoc::Left, sym::SUB),
        "*" => (70, Assoc::Left, sym::MUL),
        "/" => (70, Assoc::Left, sym::DIV),
        "•" => (73, Assoc::Right, sym::SMUL),
        "^" => (75, Assoc::Right, sym::POW),
        "≫" => (80, Assoc::Right, sym::COMP),
        _ => return None,
    })
}

pub(crate) const NEG_PREC: u8 = 75;

fn classify(s: &'static str) -> Infix {
    match s {
        "↔" => Infix::Iff,
        "=" => Infix::Rel(RelOp::Eq),
        "≠" => Infix::Rel(RelOp::Ne),
        "<" => Infix::Rel(RelOp::Lt),
        "≤" => Infix::Rel(RelOp::Le),
        ">" => Infix::Rel(RelOp::Gt),
        "≥" => Infix::Rel(RelOp::Ge),
        "∣" => Infix::Rel(RelOp::Dvd),
        other => Infix::Op(other),
    }
}

// ---------------------------------------------------------------------------
// Token cursor

struct Cursor<'t> {
    toks: &'t [Token],
    i: usize,
    end: Pos,
}

impl<'t> Cursor<'t> {
    fn new(toks: &'t [Token], end: Pos) -> Self {
        Cursor { toks, i: 0, end }
    }

    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&'t Tok> {
        self.toks.get(self.i + k).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.i);
        self.i += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok((s, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            None => "end of declaration".to_string(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Number(s)) => format!("`{s}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
            Some(Tok::Doc(_)) => "doc comment".to_string(),
            Some(Tok::Newline) => "line break".to_string(),
        };
        ParseError::syntax(self.pos(), format!("expected {wanted}, found {found}"))
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of declaration"))
        }
    }
}

// ---------------------------------------------------------------------------
// Expression grammar

fn parse_expr(c: &mut Cursor, min_prec: u8) -> Result<Raw, ParseError> {
    let mut lhs = parse_prefix(c)?;
    loop {
        let Some(Tok::Sym(s)) = c.peek() else { break };
        let Some((prec, assoc, canon)) = infix_info(s) else {
            break;
        };
        if prec < min_prec {
            break;
        }
        let pos = c.pos();
        c.bump();
        let next_min = match assoc {
            Assoc::Left | Assoc::Non => prec + 1,
            Assoc::Right => prec,
        };
        let rhs = parse_expr(c, next_min)?;
        lhs = match classify(canon) {
            Infix::Op(op) => Raw::Bin(op, Box::new(lhs), Box::new(rhs), pos),
            Infix::Rel(r) => Raw::Rel(r, Box::new(lhs), Box::new(rhs), pos),
            Infix::Iff => Raw::Iff(Box::new(lhs), Box::new(rhs), pos),
        };
        if assoc == Assoc::Non {
            if let Some(Tok::Sym(s2)) = c.peek() {
                if let Some((p2, _, _)) = infix_info(s2) {
                    if p2 == prec {
                        return Err(ParseError::syntax(
                            c.pos(),
                            "relations do not chain; add parentheses",
                        ));
                    }
                }
            }
        }
    }
    Ok(lhs)
}

fn parse_prefix(c: &mut Cursor) -> Result<Raw, ParseError> {
    let pos = c.pos();
    if c.eat_sym("-") {
        let e = parse_expr(c, NEG_PREC)?;
        return Ok(Raw::Neg(Box::new(e), pos));
    }
    if c.eat_sym("↑") {
        let e = parse_postfix(c)?;
        return Ok(Raw::Coe(Box::new(e), pos));
    }
    parse_postfix(c)
}

fn parse_postfix(c: &mut Cursor) -> Result<Raw, ParseError> {
    let mut e = parse_primary(c)?;
    while c.is_sym("(") {
        let pos = c.pos();
        c.bump();
        let args = parse_args(c)?;
        e = match e {
            Raw::Ident(name, p) if is_call_head(&name) => Raw::Call(name, args, p),
            other => Raw::App(Box::new(other), args, pos),
        };
    }
    Ok(e)
}

/// Identifiers written with call syntax are resolved during elaboration;
/// here every identifier followed by `(` is provisionally a call.
fn is_call_head(_name: &str) -> bool {
    true
}

fn parse_args(c: &mut Cursor) -> Result<Vec<Raw>, ParseError> {
    let mut args = Vec::new();
    if c.eat_sym(")") {
        return Ok(args);
    }
    loop {
        args.push(parse_expr(c, 0)?);
        if c.eat_sym(")") {
            return Ok(args);
        }
        c.expect_sym(",")?;
    }
}

fn parse_primary(c: &mut Cursor) -> Result<Raw, ParseError> {
    let pos = c.pos();
    match c.peek() {
        Some(Tok::Ident(name)) => {
            let name = name.clone();
            c.bump();
            Ok(Raw::Ident(name, pos))
        }
        Some(Tok::Number(n)) => {
            let n = n.clone();
            c.bump();
            Ok(Raw::Num(n, pos))
        }
        Some(Tok::Sym("(")) => {
            c.bump();
            let e = parse_expr(c, 0)?;
            if c.eat_sym(":") {
                let s = parse_sort_raw(c)?;
                c.expect_sym(")")?;
                return Ok(Raw::Ascribe(Box::new(e), s, pos));
            }
            c.expect_sym(")")?;
            Ok(e)
        }
        Some(Tok::Sym("∥")) => {
            c.bump();
            let e = parse_expr(c, 0)?;
            c.expect_sym("∥")?;
            Ok(Raw::Norm(Box::new(e), pos))
        }
        _ => Err(c.unexpected("a term")),
    }
}

/// Sort expressions; identifiers are resolved later, so they stay `Var` here.
fn parse_sort_raw(c: &mut Cursor) -> Result<Sort, ParseError> {
    let dom = parse_sort_primary(c)?;
    if c.eat_sym("→") {
        let cod = parse_sort_raw(c)?;
        return Ok(Sort::arrow(dom, cod));
    }
    Ok(dom)
}

fn parse_sort_primary(c: &mut Cursor) -> Result<Sort, ParseError> {
    if c.eat_sym("(") {
        let s = parse_sort_raw(c)?;
        c.expect_sym(")")?;
        return Ok(s);
    }
    let (name, _) = c.ident()?;
    Ok(if name == "Prop" {
        Sort::Prop
    } else {
        Sort::Var(name)
    })
}

/// Turns identifiers of a raw sort into declared sorts or schematic variables.
fn resolve_sort(env: &Env, s: &Sort, allow_vars: bool, pos: Pos) -> Result<Sort, ParseError> {
    Ok(match s {
        Sort::Var(n) => {
            if env.has_sort(n) {
                Sort::Named(n.clone())
            } else if allow_vars {
                Sort::Var(n.clone())
            } else {
                return Err(ParseError::UnknownSymbol {
                    pos,
                    name: n.clone(),
                });
            }
        }
        Sort::Arrow(d, c) => Sort::arrow(
            resolve_sort(env, d, allow_vars, pos)?,
            resolve_sort(env, c, allow_vars, pos)?,
        ),
        other => other.clone(),
    })
}

fn resolve_raw_sorts(env: &Env, raw: &mut Raw, allow_vars: bool) -> Result<(), ParseError> {
    match raw {
        Raw::Ascribe(e, s, p) => {
            *s = resolve_sort(env, s, allow_vars, *p)?;
            resolve_raw_sorts(env, e, allow_vars)
        }
        Raw::Call(_, args, _) => args
            .iter_mut()
            .try_for_each(|a| resolve_raw_sorts(env, a, allow_vars)),
        Raw::App(f, args, _) => {
            resolve_raw_sorts(env, f, allow_vars)?;
            args.iter_mut()
                .try_for_each(|a| resolve_raw_sorts(env, a, allow_vars))
        }
        Raw::Bin(_, a, b, _) | Raw::Rel(_, a, b, _) | Raw::Iff(a, b, _) => {
            resolve_raw_sorts(env, a, allow_vars)?;
            resolve_raw_sorts(env, b, allow_vars)
        }
        Raw::Neg(e, _) | Raw::Coe(e, _) | Raw::Norm(e, _) => resolve_raw_sorts(env, e, allow_vars),
        Raw::Ident(..) | Raw::Num(..) => Ok(()),
    }
}

// Class atoms: `C a b`, `C (b -> a)` or `C(a, b)`.
fn parse_atom_raw(c: &mut Cursor) -> Result<(String, Vec<Sort>, Pos), ParseError> {
    let (class, pos) = c.ident()?;
    let mut args = Vec::new();
    if c.is_sym("(") && !looks_like_arrow_group(c) {
        c.bump();
        loop {
            args.push(parse_sort_raw(c)?);
            if c.eat_sym(")") {
                break;
            }
            c.expect_sym(",")?;
        }
        return Ok((class, args, pos));
    }
    loop {
        match c.peek() {
            Some(Tok::Ident(_)) | Some(Tok::Sym("(")) => args.push(parse_sort_primary(c)?),
            _ => break,
        }
    }
    Ok((class, args, pos))
}

/// `C (b -> a)` juxtaposes one parenthesized arrow; `C(a, b)` is call syntax.
fn looks_like_arrow_group(c: &Cursor) -> bool {
    let mut depth = 0i32;
    let mut k = 0;
    while let Some(t) = c.peek_at(k) {
        match t {
            Tok::Sym("(") => depth += 1,
            Tok::Sym(")") => {
                depth -= 1;
                if depth == 0 {
                    return false;
                }
            }
            Tok::Sym("→") if depth == 1 => {
                // An arrow at depth one followed by a comma would be call syntax with arrow args.
                let mut j = k + 1;
                let mut d = depth;
                while let Some(t2) = c.peek_at(j) {
                    match t2 {
                        Tok::Sym("(") => d += 1,
                        Tok::Sym(")") => {
                            d -= 1;
                            if d == 0 {
                                return true;
                            }
                        }
                        Tok::Sym(",") if d == 1 => return false,
                        _ => {}
                    }
                    j += 1;
                }
                return true;
            }
            Tok::Sym(",") if depth == 1 => return false,
            _ => {}
        }
        k += 1;
    }
    false
}

fn resolve_atom(
    env: &Env,
    (class, args, pos): (String, Vec<Sort>, Pos),
    allow_vars: bool,
) -> Result<ClassAtom, ParseError> {
    if env.class(&class).is_none() {
        return Err(ParseError::UnknownSymbol { pos, name: class });
    }
    let args = args
        .iter()
        .map(|a| resolve_sort(env, a, allow_vars, pos))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassAtom { class, args })
}

// ---------------------------------------------------------------------------
// Elaboration

struct Elab<'e> {
    env: &'e Env,
    metas: Vec<Option<Sort>>,
    vars: Vec<(String, Sort)>,
    implicit: bool,
}

fn is_meta(s: &Sort) -> Option<usize> {
    match s {
        Sort::Var(n) => n.strip_prefix('?').and_then(|k| k.parse().ok()),
        _ => None,
    }
}

impl<'e> Elab<'e> {
    fn new(env: &'e Env, ctx: &TermCtx) -> Self {
        Elab {
            env,
            metas: Vec::new(),
            vars: ctx.vars.clone(),
            implicit: ctx.implicit_vars,
        }
    }

    fn fresh(&mut self) -> Sort {
        self.metas.push(None);
        Sort::Var(format!("?{}", self.metas.len() - 1))
    }

    fn walk(&self, s: &Sort) -> Sort {
        let mut cur = s.clone();
        while let Some(k) = is_meta(&cur) {
            match &self.metas[k] {
                Some(b) => cur = b.clone(),
                None => break,
            }
        }
        cur
    }

    fn zonk(&self, s: &Sort) -> Sort {
        match self.walk(s) {
            Sort::Arrow(d, c) => Sort::arrow(self.zonk(&d), self.zonk(&c)),
            other => other,
        }
    }

    fn occurs(&self, k: usize, s: &Sort) -> bool {
        match self.walk(s) {
            Sort::Arrow(d, c) => self.occurs(k, &d) || self.occurs(k, &c),
            other => is_meta(&other) == Some(k),
        }
    }

    fn unify(&mut self, a: &Sort, b: &Sort, pos: Pos) -> Result<(), ParseError> {
        let (a, b) = (self.walk(a), self.walk(b));
        if a == b {
            return Ok(());
        }
        if let Some(k) = is_meta(&a) {
            if self.occurs(k, &b) {
                return Err(self.mismatch(&a, &b, pos));
            }
            self.metas[k] = Some(b);
            return Ok(());
        }
        if let Some(k) = is_meta(&b) {
            return self.unify(&b, &a, pos).or_else(|_| {
                if self.occurs(k, &a) {
                    Err(self.mismatch(&a, &b, pos))
                } else {
                    self.metas[k] = Some(a.clone());
                    Ok(())
                }
            });
        }
        match (&a, &b) {
            (Sort::Arrow(d1, c1), Sort::Arrow(d2, c2)) => {
                self.unify(d1, d2, pos)?;
                self.unify(c1, c2, pos)
            }
            _ => Err(self.mismatch(&a, &b, pos)),
        }
    }

    fn mismatch(&self, a: &Sort, b: &Sort, pos: Pos) -> ParseError {
        ParseError::SortMismatch {
            pos,
            msg: format!("cannot unify `{}` with `{}`", self.show(a), self.show(b)),
        }
    }

    fn show(&self, s: &Sort) -> String {
        let z = self.zonk(s);
        match is_meta(&z) {
            Some(_) => "_".to_string(),
            None => z.to_string(),
        }
    }

    fn instantiate(&mut self, op: &OpDecl) -> (Vec<Sort>, Sort) {
        let mut vars = Vec::new();
        for p in &op.params {
            p.vars(&mut vars);
        }
        op.result.vars(&mut vars);
        let mut s = BTreeMap::new();
        for v in vars {
            let m = self.fresh();
            s.insert(v, m);
        }
        (
            op.params.iter().map(|p| p.subst(&s)).collect(),
            op.result.subst(&s),
        )
    }

    fn apply_op(&mut self, name: &str, args: &[Raw], pos: Pos) -> Result<Term, ParseError> {
        let name = if name == "smul" { sym::SMUL } else { name };
        let Some(op) = self.env.op(name).cloned() else {
            return Err(ParseError::UnknownSymbol {
                pos,
                name: name.to_string(),
            });
        };
        if op.params.len() != args.len() {
            return Err(ParseError::SortMismatch {
                pos,
                msg: format!(
                    "`{name}` takes {} argument(s), got {}",
                    op.params.len(),
                    args.len()
                ),
            });
        }
        let (params, result) = self.instantiate(&op);
        let mut targs = Vec::with_capacity(args.len());
        for (a, p) in args.iter().zip(&params) {
            let t = self.elab(a)?;
            self.unify(&t.sort(), p, a.pos())?;
            targs.push(t);
        }
        Ok(Term::op(name, targs, result))
    }

    fn elab(&mut self, raw: &Raw) -> Result<Term, ParseError> {
        match raw {
            Raw::Ident(name, pos) => {
                if let Some((_, s)) = self.vars.iter().rev().find(|(n, _)| n == name) {
                    return Ok(Term::var(name, s.clone()));
                }
                if let Some(op) = self.env.op(name) {
                    if op.params.is_empty() {
                        return self.apply_op(name, &[], *pos);
                    }
                }
                if self.implicit {
                    let s = self.fresh();
                    self.vars.push((name.clone(), s.clone()));
                    Ok(Term::var(name, s))
                } else {
                    Err(ParseError::UnboundVariable {
                        pos: *pos,
                        name: name.clone(),
                    })
                }
            }
            Raw::Num(digits, pos) => {
                let value = Numeral::parse_decimal(digits)
                    .ok_or_else(|| ParseError::syntax(*pos, "bad numeral"))?;
                let s = self.fresh();
                Ok(Term::numeral(value, s))
            }
            Raw::Call(name, args, pos) => {
                let is_var = self.vars.iter().any(|(n, _)| n == name);
                if !is_var && (self.env.op(name).is_some() || name == "smul") {
                    return self.apply_op(name, args, *pos);
                }
                let head = Raw::Ident(name.clone(), *pos);
                self.elab(&Raw::App(Box::new(head), args.clone(), *pos))
            }
            Raw::App(f, args, pos) => {
                let mut t = self.elab(f)?;
                for a in args {
                    let (d, c) = (self.fresh(), self.fresh());
                    self.unify(&t.sort(), &Sort::arrow(d.clone(), c.clone()), *pos)?;
                    let x = self.elab(a)?;
                    self.unify(&x.sort(), &d, a.pos())?;
                    t = Term::op(sym::APP, vec![t, x], c);
                }
                Ok(t)
            }
            Raw::Bin(op, a, b, pos) => self.apply_op(op, &[(**a).clone(), (**b).clone()], *pos),
            Raw::Neg(e, pos) => self.apply_op(sym::NEG, &[(**e).clone()], *pos),
            Raw::Norm(e, pos) => self.apply_op(sym::NORM, &[(**e).clone()], *pos),
            Raw::Coe(e, _) => {
                let t = self.elab(e)?;
                let to = self.fresh();
                Ok(Term::coerce(t.sort(), to, t))
            }
            Raw::Rel(op, a, b, pos) => {
                let (l, r) = (self.elab(a)?, self.elab(b)?);
                self.unify(&l.sort(), &r.sort(), *pos)?;
                Ok(Term::rel(*op, l, r))
            }
            Raw::Iff(a, b, pos) => {
                let (l, r) = (self.elab(a)?, self.elab(b)?);
                self.unify(&l.sort(), &Sort::Prop, *pos)?;
                self.unify(&r.sort(), &Sort::Prop, *pos)?;
                Ok(Term::rel(RelOp::Eq, l, r))
            }
            Raw::Ascribe(e, s, pos) => {
                let t = self.elab(e)?;
                self.unify(&t.sort(), s, *pos)?;
                Ok(t)
            }
        }
    }

    fn coercion_pairs(t: &Term, out: &mut Vec<(Sort, Sort)>) {
        if let Term::Coerce { from, to, .. } = t {
            out.push((from.clone(), to.clone()));
        }
        for c in t.children() {
            Self::coercion_pairs(c, out);
        }
    }

    /// Fills in coercion endpoints determined by the declared coercion table.
    fn resolve_coercions(&mut self, terms: &[&Term], pos: Pos) -> Result<(), ParseError> {
        loop {
            let mut pairs = Vec::new();
            for t in terms {
                Self::coercion_pairs(t, &mut pairs);
            }
            let mut changed = false;
            for (from, to) in pairs {
                let (f, t) = (self.zonk(&from), self.zonk(&to));
                let (fm, tm) = (is_meta(&f).is_some(), is_meta(&t).is_some());
                if fm && !tm {
                    let cands: Vec<_> = self.env.coercions.iter().filter(|c| c.to == t).collect();
                    if cands.len() == 1 {
                        let src = cands[0].from.clone();
                        self.unify(&f, &src, pos)?;
                        changed = true;
                    }
                } else if tm && !fm {
                    let cands: Vec<_> = self.env.coercions.iter().filter(|c| c.from == f).collect();
                    if cands.len() == 1 {
                        let dst = cands[0].to.clone();
                        self.unify(&t, &dst, pos)?;
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn finish(&mut self, terms: Vec<Term>, ctx: &TermCtx, pos: Pos) -> Result<Vec<Term>, ParseError> {
        let refs: Vec<&Term> = terms.iter().collect();
        self.resolve_coercions(&refs, pos)?;
        // Anything still open defaults (or becomes schematic in pattern mode).
        let mut used: Vec<String> = Vec::new();
        for t in &terms {
            for v in t.sort_vars() {
                let z = self.zonk(&Sort::Var(v));
                z.vars(&mut used);
            }
        }
        for (_, s) in &self.vars {
            self.zonk(s).vars(&mut used);
        }
        let mut names = ["a", "b", "c", "d", "e"]
            .iter()
            .map(|s| s.to_string())
            .chain((0..).map(|i| format!("s{i}")))
            .filter(|n| !used.contains(n));
        for k in 0..self.metas.len() {
            if self.metas[k].is_none() {
                let root = Sort::Var(format!("?{k}"));
                if self.walk(&root) != root {
                    continue;
                }
                let fill = match (&ctx.default_sort, ctx.pattern) {
                    (Some(d), _) => d.clone(),
                    (None, true) => Sort::Var(names.next().unwrap()),
                    (None, false) => Sort::nat(),
                };
                self.metas[k] = Some(fill);
            }
        }
        let out: Vec<Term> = terms.iter().map(|t| self.zonk_term(t)).collect();
        for t in &out {
            self.check_coercions(t, pos)?;
        }
        Ok(out)
    }

    fn zonk_term(&self, t: &Term) -> Term {
        match t {
            Term::Var { name, sort } => Term::var(name, self.zonk(sort)),
            Term::Op { sym, args, sort } => Term::Op {
                sym: sym.clone(),
                args: args.iter().map(|a| self.zonk_term(a)).collect(),
                sort: self.zonk(sort),
            },
            Term::Num { value, sort } => Term::numeral(value.clone(), self.zonk(sort)),
            Term::Coerce { from, to, arg } => {
                Term::coerce(self.zonk(from), self.zonk(to), self.zonk_term(arg))
            }
            Term::Rel { op, lhs, rhs } => Term::rel(*op, self.zonk_term(lhs), self.zonk_term(rhs)),
        }
    }

    fn check_coercions(&self, t: &Term, pos: Pos) -> Result<(), ParseError> {
        if let Term::Coerce { from, to, .. } = t {
            if from == to {
                return Err(ParseError::SortMismatch {
                    pos,
                    msg: format!("coercion from `{from}` to itself"),
                });
            }
            if from.is_ground() && to.is_ground() && self.env.coercion(from, to).is_none() {
                return Err(ParseError::SortMismatch {
                    pos,
                    msg: format!("no coercion from `{from}` to `{to}`"),
                });
            }
        }
        for c in t.children() {
            self.check_coercions(c, pos)?;
        }
        Ok(())
    }

    fn var_sorts(&self) -> Vec<(String, Sort)> {
        self.vars
            .iter()
            .map(|(n, s)| (n.clone(), self.zonk(s)))
            .collect()
    }
}

fn elaborate(env: &Env, raws: &[Raw], ctx: &TermCtx) -> Result<(Vec<Term>, Vec<(String, Sort)>), ParseError> {
    let mut el = Elab::new(env, ctx);
    let pos = raws.first().map(Raw::pos).unwrap_or(Pos { line: 1, col: 1 });
    let mut terms = Vec::new();
    for r in raws {
        let mut r = r.clone();
        resolve_raw_sorts(env, &mut r, ctx.pattern)?;
        terms.push(el.elab(&r)?);
    }
    let terms = el.finish(terms, ctx, pos)?;
    let vars = el.var_sorts();
    Ok((terms, vars))
}

// ---------------------------------------------------------------------------
// Public term-level entry points

fn tokens_of(src: &str) -> Result<Vec<Token>, ParseError> {
    Ok(lex(src)?
        .into_iter()
        .filter(|t| t.tok != Tok::Newline)
        .collect())
}

fn end_pos(src: &str) -> Pos {
    let line = src.lines().count().max(1);
    let col = src.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    Pos { line, col }
}

/// Parses and elaborates a single term.
pub fn parse_term(src: &str, env: &Env, ctx: &TermCtx) -> Result<Term, ParseError> {
    let toks = tokens_of(src)?;
    let mut c = Cursor::new(&toks, end_pos(src));
    let raw = parse_expr(&mut c, 0)?;
    c.expect_end()?;
    let (mut ts, _) = elaborate(env, &[raw], ctx)?;
    Ok(ts.remove(0))
}

/// Parses a ground class atom such as `monoid(Z)` or `monoid Z`.
pub fn parse_atom(src: &str, env: &Env) -> Result<ClassAtom, ParseError> {
    let toks = tokens_of(src)?;
    let mut c = Cursor::new(&toks, end_pos(src));
    let raw = parse_atom_raw(&mut c)?;
    c.expect_end()?;
    resolve_atom(env, raw, true)
}

/// Parses a decidable proposition (`forall x < 3, x * x < 9`).
pub fn parse_decprop(src: &str, env: &Env, ctx: &TermCtx) -> Result<DecProp, ParseError> {
    let toks = tokens_of(src)?;
    let mut c = Cursor::new(&toks, end_pos(src));
    let raw = parse_prop(&mut c)?;
    c.expect_end()?;
    elab_prop(env, &raw, ctx)
}

// ---------------------------------------------------------------------------
// Propositions

fn parse_prop(c: &mut Cursor) -> Result<RawProp, ParseError> {
    let lhs = parse_prop_or(c)?;
    if c.eat_sym("→") {
        let rhs = parse_prop(c)?;
        return Ok(RawProp::Implies(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_prop_or(c: &mut Cursor) -> Result<RawProp, ParseError> {
    let lhs = parse_prop_and(c)?;
    if c.eat_sym("∨") {
        let rhs = parse_prop_or(c)?;
        return Ok(RawProp::Or(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_prop_and(c: &mut Cursor) -> Result<RawProp, ParseError> {
    let lhs = parse_prop_not(c)?;
    if c.eat_sym("∧") {
        let rhs = parse_prop_and(c)?;
        return Ok(RawProp::And(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_prop_not(c: &mut Cursor) -> Result<RawProp, ParseError> {
    if c.eat_sym("¬") || (c.is_ident("not") && c.peek_at(1) != Some(&Tok::Sym("("))) {
        if c.is_ident("not") {
            c.bump();
        }
        let p = parse_prop_not(c)?;
        return Ok(RawProp::Not(Box::new(p)));
    }
    parse_prop_atom(c)
}

fn parse_prop_atom(c: &mut Cursor) -> Result<RawProp, ParseError> {
    let pos = c.pos();
    if c.eat_sym("∀") || (c.is_ident("forall") && { c.bump(); true }) {
        let (var, _) = c.ident()?;
        let inclusive = if c.eat_sym("<") {
            false
        } else if c.eat_sym("≤") {
            true
        } else if c.is_sym(",") {
            return Err(ParseError::Invalid {
                pos,
                msg: "unbounded quantifier: not decidable in this fragment".into(),
            });
        } else {
            return Err(c.unexpected("`<` or `≤` and a numeral bound"));
        };
        let bound = match c.peek() {
            Some(Tok::Number(n)) => {
                let b = Numeral::parse_decimal(n).unwrap();
                c.bump();
                b
            }
            _ => {
                return Err(ParseError::Invalid {
                    pos: c.pos(),
                    msg: "quantifier bound must be a numeral literal".into(),
                })
            }
        };
        c.expect_sym(",")?;
        let body = parse_prop(c)?;
        return Ok(RawProp::Forall {
            var,
            bound,
            inclusive,
            body: Box::new(body),
        });
    }
    if c.is_ident("true") {
        c.bump();
        return Ok(RawProp::Lit(true));
    }
    if c.is_ident("false") {
        c.bump();
        return Ok(RawProp::Lit(false));
    }
    if c.is_sym("(") {
        let save = c.i;
        c.bump();
        if let Ok(p) = parse_prop(c) {
            if c.eat_sym(")") {
                let continues_term = matches!(c.peek(), Some(Tok::Sym(s)) if infix_info(s).is_some());
                if !continues_term {
                    return Ok(p);
                }
            }
        }
        c.i = save;
    }
    let e = parse_expr(c, 0)?;
    match e {
        Raw::Rel(..) => Ok(RawProp::Rel(e)),
        other => Err(ParseError::syntax(other.pos(), "expected a relation")),
    }
}

fn elab_prop(env: &Env, p: &RawProp, ctx: &TermCtx) -> Result<DecProp, ParseError> {
    Ok(match p {
        RawProp::Lit(b) => DecProp::Lit(*b),
        RawProp::Rel(r) => {
            let (mut ts, _) = elaborate(env, &[r.clone()], ctx)?;
            DecProp::Rel(ts.remove(0))
        }
        RawProp::Forall {
            var,
            bound,
            inclusive,
            body,
        } => {
            let sort = ctx.default_sort.clone().unwrap_or_else(Sort::nat);
            let inner = ctx.clone().bind(var, sort.clone());
            DecProp::Forall {
                var: var.clone(),
                sort,
                bound: bound.clone(),
                inclusive: *inclusive,
                body: Box::new(elab_prop(env, body, &inner)?),
            }
        }
        RawProp::And(a, b) => DecProp::and(elab_prop(env, a, ctx)?, elab_prop(env, b, ctx)?),
        RawProp::Or(a, b) => DecProp::or(elab_prop(env, a, ctx)?, elab_prop(env, b, ctx)?),
        RawProp::Not(a) => DecProp::not(elab_prop(env, a, ctx)?),
        RawProp::Implies(a, b) => {
            DecProp::implies(elab_prop(env, a, ctx)?, elab_prop(env, b, ctx)?)
        }
    })
}

// ---------------------------------------------------------------------------
// Declarations

struct Group {
    toks: Vec<Token>,
    doc: Option<String>,
}

/// Splits a token stream into declarations: a newline at bracket depth zero ends one.
fn split_groups(toks: Vec<Token>) -> Result<Vec<Group>, ParseError> {
    let mut groups = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    let mut doc: Option<String> = None;
    let mut depth: i32 = 0;
    for t in toks {
        match &t.tok {
            Tok::Newline if depth == 0 => {
                if !cur.is_empty() {
                    groups.push(Group {
                        toks: std::mem::take(&mut cur),
                        doc: doc.take(),
                    });
                }
            }
            Tok::Newline => {}
            Tok::Doc(text) if cur.is_empty() => {
                doc = Some(match doc.take() {
                    Some(prev) => format!("{prev}\n{text}"),
                    None => text.clone(),
                });
            }
            Tok::Doc(_) => return Err(ParseError::syntax(t.pos, "doc comment inside a declaration")),
            Tok::Sym(s) => {
                match *s {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth -= 1;
                        if depth < 0 {
                            return Err(ParseError::syntax(t.pos, format!("unbalanced `{s}`")));
                        }
                    }
                    _ => {}
                }
                cur.push(t);
            }
            _ => cur.push(t),
        }
    }
    if depth != 0 {
        let pos = cur.last().map(|t| t.pos).unwrap_or(Pos { line: 1, col: 1 });
        return Err(ParseError::syntax(pos, "unclosed bracket at end of input"));
    }
    if !cur.is_empty() {
        groups.push(Group { toks: cur, doc });
    } else if let Some(_) = doc {
        // trailing doc comment with nothing to attach to is ignored
    }
    Ok(groups)
}

/// Parses `src` into declarations, adding each to `env` as it goes.
pub fn parse_into(env: &mut Env, src: &str) -> Result<(), ParseError> {
    let groups = split_groups(lex(src)?)?;
    for g in groups {
        let end = g.toks.last().map(|t| t.pos).unwrap_or(Pos { line: 1, col: 1 });
        let decls = parse_decl(env, &g.toks, g.doc, end)?;
        for d in decls {
            env.add(d)?;
        }
    }
    Ok(())
}

/// Parses declarations in source order (against a fresh environment).
pub fn parse_decls(src: &str) -> Result<Vec<Declaration>, ParseError> {
    Ok(Env::parse(src)?.decls)
}

fn parse_attrs(c: &mut Cursor) -> Result<(Vec<String>, Option<i64>), ParseError> {
    let mut attrs = Vec::new();
    let mut priority = None;
    if !c.eat_sym("[") {
        return Ok((attrs, priority));
    }
    loop {
        let (a, pos) = c.ident()?;
        if a == "priority" {
            match c.peek() {
                Some(Tok::Number(n)) => {
                    priority = Some(n.parse::<i64>().map_err(|_| {
                        ParseError::syntax(pos, "priority out of range")
                    })?);
                    c.bump();
                }
                _ => return Err(c.unexpected("a priority number")),
            }
        }
        attrs.push(a);
        if c.eat_sym("]") {
            return Ok((attrs, priority));
        }
        c.expect_sym(",")?;
    }
}

fn op_name(c: &mut Cursor) -> Result<(String, Pos), ParseError> {
    let pos = c.pos();
    match c.peek() {
        Some(Tok::Ident(s)) => {
            let s = s.clone();
            c.bump();
            Ok((s, pos))
        }
        Some(Tok::Number(n)) => {
            let n = n.clone();
            c.bump();
            Ok((n, pos))
        }
        Some(Tok::Sym(s)) if infix_info(s).map(|(p, _, _)| p >= 65).unwrap_or(false) => {
            let s = s.to_string();
            c.bump();
            Ok((s, pos))
        }
        _ => Err(c.unexpected("an operator name")),
    }
}

fn sort_scheme(env: &Env, c: &mut Cursor, pos: Pos) -> Result<(Vec<Sort>, Sort), ParseError> {
    let mut parts = vec![parse_sort_primary(c)?];
    while c.eat_sym("→") {
        parts.push(parse_sort_primary(c)?);
    }
    let mut parts = parts
        .iter()
        .map(|s| resolve_sort(env, s, true, pos))
        .collect::<Result<Vec<_>, _>>()?;
    let result = parts.pop().unwrap();
    Ok((parts, result))
}

struct Header {
    vars: Vec<(String, Sort)>,
    hyps: Vec<(String, Vec<Token>)>,
    conditions: Vec<ClassAtom>,
    default_sort: Option<Sort>,
}

fn parse_header(env: &Env, c: &mut Cursor, pattern: bool) -> Result<Header, ParseError> {
    let mut h = Header {
        vars: Vec::new(),
        hyps: Vec::new(),
        conditions: Vec::new(),
        default_sort: None,
    };
    loop {
        let pos = c.pos();
        if c.eat_sym("(") {
            let mut names = Vec::new();
            while let Some(Tok::Ident(n)) = c.peek() {
                names.push(n.clone());
                c.bump();
            }
            if names.is_empty() {
                return Err(c.unexpected("binder names"));
            }
            c.expect_sym(":")?;
            // A closing paren right after a sort means a variable binder.
            let save = c.i;
            if let Ok(s) = parse_sort_raw(c) {
                if c.eat_sym(")") {
                    let s = resolve_sort(env, &s, pattern, pos)?;
                    for n in names {
                        h.vars.push((n, s.clone()));
                    }
                    continue;
                }
            }
            c.i = save;
            if names.len() != 1 {
                return Err(ParseError::syntax(pos, "a hypothesis binder names exactly one hypothesis"));
            }
            let start = c.i;
            let mut depth = 1;
            while depth > 0 {
                match c.bump().map(|t| &t.tok) {
                    Some(Tok::Sym("(")) => depth += 1,
                    Some(Tok::Sym(")")) => depth -= 1,
                    Some(_) => {}
                    None => return Err(ParseError::syntax(pos, "unclosed hypothesis binder")),
                }
            }
            let toks = c.toks[start..c.i - 1].to_vec();
            h.hyps.push((names.remove(0), toks));
        } else if c.eat_sym("[") {
            if matches!(c.peek_at(1), Some(Tok::Sym(":"))) {
                c.bump();
                c.bump();
            }
            let raw = parse_atom_raw(c)?;
            h.conditions.push(resolve_atom(env, raw, true)?);
            c.expect_sym("]")?;
        } else if c.eat_sym("{") {
            let s = parse_sort_raw(c)?;
            h.default_sort = Some(resolve_sort(env, &s, pattern, pos)?);
            c.expect_sym("}")?;
        } else {
            return Ok(h);
        }
    }
}

fn find_by(toks: &[Token]) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate() {
        match &t.tok {
            Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("{") => depth += 1,
            Tok::Sym(")") | Tok::Sym("]") | Tok::Sym("}") => depth -= 1,
            Tok::Ident(s) if s == "by" && depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn parse_tactic(c: &mut Cursor) -> Result<Tactic, ParseError> {
    let (name, pos) = c.ident()?;
    let kind = TacticKind::from_name(&name).ok_or(ParseError::UnknownSymbol {
        pos,
        name: name.clone(),
    })?;
    let mut using = None;
    if c.is_ident("using") || c.is_sym("[") {
        let bracket = c.eat_sym("[");
        if !bracket {
            c.bump();
        }
        let mut names = Vec::new();
        loop {
            let (n, _) = c.ident()?;
            names.push(n);
            if !c.eat_sym(",") {
                break;
            }
        }
        if bracket {
            c.expect_sym("]")?;
        }
        using = Some(names);
    }
    c.expect_end()?;
    Ok(Tactic { kind, using })
}

fn parse_decl(env: &Env, toks: &[Token], doc: Option<String>, end: Pos) -> Result<Vec<Declaration>, ParseError> {
    let mut c = Cursor::new(toks, end);
    let pos = c.pos();
    let (mut attrs, priority) = parse_attrs(&mut c)?;
    let (kw, kw_pos) = c.ident()?;
    let decl = |name: String, attrs: Vec<String>, kind: DeclKind| Declaration {
        name,
        doc: doc.clone(),
        attrs,
        pos,
        kind,
    };
    match kw.as_str() {
        "sort" => {
            let (name, _) = c.ident()?;
            c.expect_end()?;
            Ok(vec![decl(name, attrs, DeclKind::Sort)])
        }
        "coe" => {
            let from = parse_sort_primary(&mut c)?;
            let to = parse_sort_primary(&mut c)?;
            c.expect_end()?;
            let from = resolve_sort(env, &from, false, kw_pos)?;
            let to = resolve_sort(env, &to, false, kw_pos)?;
            let injective = attrs.iter().any(|a| a == "injective");
            let name = format!("coe_{from}_{to}");
            Ok(vec![decl(
                name,
                attrs,
                DeclKind::Coe(CoeDecl {
                    from,
                    to,
                    injective,
                }),
            )])
        }
        "op" => {
            let (name, npos) = op_name(&mut c)?;
            c.expect_sym(":")?;
            let (params, result) = sort_scheme(env, &mut c, npos)?;
            c.expect_end()?;
            let assoc = attrs.iter().any(|a| a == "assoc");
            if assoc && (params.len() != 2 || params[0] != result || params[1] != result) {
                return Err(ParseError::Invalid {
                    pos: npos,
                    msg: format!("`{name}` cannot be associative: it is not a binary operation on one sort"),
                });
            }
            Ok(vec![decl(
                name.clone(),
                attrs,
                DeclKind::Op(OpDecl {
                    name,
                    params,
                    result,
                    assoc,
                    builtin: false,
                }),
            )])
        }
        "class" => parse_class(env, &mut c, attrs, doc.clone(), pos),
        "instance" => {
            let (name, _) = c.ident()?;
            c.expect_sym(":")?;
            let head = resolve_atom(env, parse_atom_raw(&mut c)?, true)?;
            let mut body = Vec::new();
            if c.eat_sym("←") {
                loop {
                    body.push(resolve_atom(env, parse_atom_raw(&mut c)?, true)?);
                    if !c.eat_sym(",") {
                        break;
                    }
                }
            }
            c.expect_end()?;
            Ok(vec![decl(
                name.clone(),
                attrs,
                DeclKind::Instance(InstanceRule {
                    name,
                    head,
                    body,
                    priority: priority.unwrap_or(DEFAULT_PRIORITY),
                }),
            )])
        }
        "simp" | "def" => {
            let (lemma_kw, _) = c.ident()?;
            if lemma_kw != "lemma" {
                return Err(ParseError::syntax(kw_pos, format!("expected `{kw} lemma`")));
            }
            let (name, _) = c.ident()?;
            let header = parse_header(env, &mut c, true)?;
            c.expect_sym(":")?;
            let stmt_pos = c.pos();
            let raw = parse_expr(&mut c, 0)?;
            c.expect_end()?;
            let ctx = TermCtx {
                vars: header.vars.clone(),
                default_sort: header.default_sort.clone(),
                implicit_vars: true,
                pattern: true,
            };
            let (mut ts, _) = elaborate(env, &[raw], &ctx)?;
            let Term::Rel {
                op: RelOp::Eq,
                lhs,
                rhs,
            } = ts.remove(0)
            else {
                return Err(ParseError::Invalid {
                    pos: stmt_pos,
                    msg: "a rewrite lemma must be an equation or biconditional".into(),
                });
            };
            let kind = if kw == "def" {
                RuleKind::Def
            } else if attrs.iter().any(|a| a == "norm_cast_move") {
                RuleKind::CastMove
            } else if attrs.iter().any(|a| a == "norm_cast_elim") {
                RuleKind::CastElim
            } else {
                RuleKind::Simp
            };
            if kw == "simp" && !attrs.iter().any(|a| a == "simp") {
                attrs.insert(0, "simp".into());
            }
            let rule = RewriteRule {
                name: name.clone(),
                lhs: *lhs,
                rhs: *rhs,
                conditions: header.conditions,
                kind,
            };
            let mut out = vec![];
            if attrs.iter().any(|a| a == "reassoc") {
                let companion = crate::hierarchy::reassoc(&rule, env).map_err(|e| ParseError::Invalid {
                    pos,
                    msg: e.to_string(),
                })?;
                out.push(decl(name, attrs, DeclKind::Rewrite(rule)));
                out.push(decl(
                    companion.name.clone(),
                    vec!["simp".into()],
                    DeclKind::Rewrite(companion),
                ));
            } else {
                out.push(decl(name, attrs, DeclKind::Rewrite(rule)));
            }
            Ok(out)
        }
        "lemma" | "goal" => {
            let (name, _) = c.ident()?;
            let header = parse_header(env, &mut c, true)?;
            c.expect_sym(":")?;
            let rest = &c.toks[c.i..];
            let by = find_by(rest);
            let (stmt_toks, tactic) = match by {
                Some(k) => {
                    let mut tc = Cursor::new(&rest[k + 1..], end);
                    (&rest[..k], Some(parse_tactic(&mut tc)?))
                }
                None => (rest, None),
            };
            if kw == "goal" && tactic.is_none() {
                return Err(ParseError::syntax(end, "a goal needs `by <tactic>`"));
            }
            let lemma = elab_lemma(env, name.clone(), header, stmt_toks, tactic, kw == "goal", end)?;
            let kind = if kw == "goal" {
                DeclKind::Goal(lemma)
            } else {
                DeclKind::Lemma(lemma)
            };
            Ok(vec![decl(name, attrs, kind)])
        }
        other => Err(ParseError::syntax(kw_pos, format!("unknown declaration keyword `{other}`"))),
    }
}

fn parse_class(
    env: &Env,
    c: &mut Cursor,
    attrs: Vec<String>,
    doc: Option<String>,
    pos: Pos,
) -> Result<Vec<Declaration>, ParseError> {
    let (name, _) = c.ident()?;
    c.expect_sym("(")?;
    let mut params = Vec::new();
    while let Some(Tok::Ident(p)) = c.peek() {
        params.push(p.clone());
        c.bump();
    }
    c.expect_sym(")")?;
    let mut projections = Vec::new();
    let mut new_ops = Vec::new();
    if c.eat_sym("{") {
        if !c.eat_sym("}") {
            loop {
                let (p, ppos) = op_name(c)?;
                if c.eat_sym(":") {
                    let (ps, r) = sort_scheme(env, c, ppos)?;
                    if env.op(&p).is_some() {
                        return Err(ParseError::Redeclaration { pos: ppos, name: p });
                    }
                    new_ops.push(OpDecl {
                        name: p.clone(),
                        params: ps,
                        result: r,
                        assoc: false,
                        builtin: false,
                    });
                } else if env.op(&p).is_none() && Numeral::parse_decimal(&p).is_none() {
                    return Err(ParseError::UnknownSymbol { pos: ppos, name: p });
                }
                projections.push(p);
                if c.eat_sym("}") {
                    break;
                }
                c.expect_sym(",")?;
            }
        }
    }
    c.expect_end()?;
    let mut out: Vec<Declaration> = new_ops
        .into_iter()
        .map(|o| Declaration {
            name: o.name.clone(),
            doc: None,
            attrs: vec![],
            pos,
            kind: DeclKind::Op(o),
        })
        .collect();
    out.push(Declaration {
        name: name.clone(),
        doc,
        attrs,
        pos,
        kind: DeclKind::Class(ClassDecl {
            name,
            params,
            projections,
        }),
    });
    Ok(out)
}

fn elab_lemma(
    env: &Env,
    name: String,
    header: Header,
    stmt_toks: &[Token],
    tactic: Option<Tactic>,
    is_goal: bool,
    end: Pos,
) -> Result<Lemma, ParseError> {
    let default_sort = header
        .default_sort
        .clone()
        .or_else(|| is_goal.then(Sort::nat));
    let ctx = TermCtx {
        vars: header.vars.clone(),
        default_sort: default_sort.clone(),
        implicit_vars: true,
        pattern: !is_goal,
    };
    let kind = tactic.as_ref().map(|t| t.kind);
    let mut c = Cursor::new(stmt_toks, end);
    if matches!(kind, Some(TacticKind::Infer) | Some(TacticKind::InferBidir)) {
        let atom = resolve_atom(env, parse_atom_raw(&mut c)?, !is_goal)?;
        c.expect_end()?;
        return Ok(Lemma {
            name,
            vars: header.vars,
            hyps: vec![],
            conditions: header.conditions,
            stmt: Statement::Class(atom),
            tactic,
        });
    }
    if kind == Some(TacticKind::DecTrivial) {
        let raw = parse_prop(&mut c)?;
        c.expect_end()?;
        let p = elab_prop(env, &raw, &ctx)?;
        return Ok(Lemma {
            name,
            vars: header.vars,
            hyps: vec![],
            conditions: header.conditions,
            stmt: Statement::Decidable(p),
            tactic,
        });
    }
    // Hypotheses and the statement are elaborated together so they share variables.
    let mut raws = Vec::new();
    for (_, toks) in &header.hyps {
        let mut hc = Cursor::new(toks, end);
        raws.push(parse_expr(&mut hc, 0)?);
        hc.expect_end()?;
    }
    raws.push(parse_expr(&mut c, 0)?);
    c.expect_end()?;
    let (mut terms, vars) = elaborate(env, &raws, &ctx)?;
    let stmt = terms.pop().unwrap();
    let hyps = header
        .hyps
        .iter()
        .zip(terms)
        .map(|((n, _), t)| Hypothesis {
            name: n.clone(),
            stmt: t,
        })
        .collect();
    let declared: Vec<String> = header.vars.iter().map(|(n, _)| n.clone()).collect();
    let vars = vars
        .into_iter()
        .filter(|(n, _)| declared.contains(n))
        .collect();
    Ok(Lemma {
        name,
        vars,
        hyps,
        conditions: header.conditions,
        stmt: Statement::Term(stmt),
        tactic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        Env::parse("sort Z\n[injective] coe nat int\n[assoc] op ≫ : a -> a -> a\n").unwrap()
    }

    #[test]
    fn smallest_class_declaration() {
        let ds = parse_decls("class monoid (a)").unwrap();
        assert_eq!(ds.len(), 1);
        match &ds[0].kind {
            DeclKind::Class(c) => {
                assert_eq!(c.name, "monoid");
                assert_eq!(c.arity(), 1);
            }
            k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn simp_lemma_gets_attribute() {
        let ds = parse_decls("simp lemma mul_one : x * 1 = x").unwrap();
        assert_eq!(ds[0].attrs, vec!["simp".to_string()]);
        let DeclKind::Rewrite(r) = &ds[0].kind else { panic!() };
        assert_eq!(r.kind, RuleKind::Simp);
        let a = Sort::var("a");
        assert_eq!(
            r.lhs,
            Term::op("*", vec![Term::var("x", a.clone()), Term::num(1, a.clone())], a.clone())
        );
        assert_eq!(r.rhs, Term::var("x", a));
    }

    #[test]
    fn literal_relation_over_nat() {
        let t = parse_term("1 + 2 < 4", &Env::new(), &TermCtx::with_default(Sort::nat())).unwrap();
        let n = Sort::nat();
        assert_eq!(
            t,
            Term::rel(
                RelOp::Lt,
                Term::op("+", vec![Term::num(1, n.clone()), Term::num(2, n.clone())], n.clone()),
                Term::num(4, n)
            )
        );
    }

    #[test]
    fn zero_is_canonical() {
        let t = parse_term("0", &Env::new(), &TermCtx::default()).unwrap();
        let Term::Num { value, .. } = t else { panic!() };
        assert_eq!(value.bits(), &[false]);
    }

    #[test]
    fn coercions_infer_their_target() {
        let env = env();
        let ctx = TermCtx::with_default(Sort::int())
            .bind("m", Sort::nat())
            .bind("n", Sort::nat());
        let t = parse_term("↑m + ↑n > 5", &env, &ctx).unwrap();
        let Term::Rel { op, lhs, rhs } = &t else { panic!() };
        assert_eq!(*op, RelOp::Gt);
        assert_eq!(rhs.sort(), Sort::int());
        let kids = lhs.children();
        assert!(kids
            .iter()
            .all(|k| matches!(k, Term::Coerce { from, to, .. } if *from == Sort::nat() && *to == Sort::int())));
        let ascii = parse_term("^^m + ^^n > 5", &env, &ctx).unwrap();
        assert_eq!(ascii, t);
    }

    #[test]
    fn sort_mismatch_is_reported() {
        let env = env();
        let ctx = TermCtx::strict(vec![("m".into(), Sort::nat()), ("z".into(), Sort::int())], Sort::nat());
        let e = parse_term("m + z", &env, &ctx).unwrap_err();
        assert_eq!(e.kind(), "sort_mismatch");
    }

    #[test]
    fn unbound_variable_outside_pattern_mode() {
        let ctx = TermCtx::strict(vec![], Sort::nat());
        let e = parse_term("x + 1", &Env::new(), &ctx).unwrap_err();
        assert!(matches!(e, ParseError::UnboundVariable { ref name, .. } if name == "x"));
    }

    #[test]
    fn syntax_error_has_line_and_column() {
        let e = Env::parse("class a (x)\nclass b (y) extra )").unwrap_err();
        assert_eq!(e.pos().unwrap().line, 2);
    }

    #[test]
    fn redeclaration_and_unknown_symbol() {
        assert_eq!(
            Env::parse("class a (x)\nclass a (x)").unwrap_err().kind(),
            "redeclaration"
        );
        assert_eq!(
            Env::parse("instance i : monoid Z").unwrap_err().kind(),
            "unknown_symbol"
        );
    }

    #[test]
    fn instances_and_atoms() {
        let env = Env::parse(
            "sort Z\nclass semiring (a)\nclass monoid (a)\n[priority 10] instance s : monoid a <- semiring a\ninstance f : semiring Z\n",
        )
        .unwrap();
        assert_eq!(env.instances[0].priority, 10);
        assert_eq!(env.instances[0].body.len(), 1);
        assert!(env.instances[1].is_fact());
        assert_eq!(parse_atom("monoid(Z)", &env).unwrap(), parse_atom("monoid Z", &env).unwrap());
        let arrow = parse_atom("monoid (b -> a)", &env).unwrap();
        assert_eq!(arrow.args, vec![Sort::arrow(Sort::var("b"), Sort::var("a"))]);
    }

    #[test]
    fn body_variables_must_occur_in_head() {
        let e = Env::parse("class c (a)\nclass d (a)\ninstance bad : c a <- d b").unwrap_err();
        assert_eq!(e.kind(), "invalid");
    }

    #[test]
    fn goals_lemmas_and_blocks() {
        let env = Env::parse(
            "class c (a)\n/-- doc -/\nlemma trans (x y z : int) (h1 : x <= y) (h2 : y <= z) : x <= z by linarith\n\
             goal g : forall x < 3, x * x < 9 by dec_trivial\n\
             goal h {int} (m n : nat) : ↑m + ↑n > 5 ↔ m + n > 5 by norm_cast\n",
        );
        assert!(env.is_err(), "no coercion declared yet");
        let env = Env::parse(
            "coe nat int\nclass c (a) {\n  one : a\n}\n/-- doc -/\nlemma trans (x y z : int) (h1 : x <= y) (h2 : y <= z) : x <= z by linarith\n\
             goal g : forall x < 3, x * x < 9 by dec_trivial\n\
             goal h {int} (m n : nat) : ↑m + ↑n > 5 ↔ m + n > 5 by norm_cast\n",
        )
        .unwrap();
        assert_eq!(env.lemmas[0].hyps.len(), 2);
        assert_eq!(env.lemmas[0].vars.len(), 3);
        assert_eq!(env.decls.iter().find(|d| d.name == "trans").unwrap().doc.as_deref(), Some("doc"));
        assert!(matches!(env.goals[0].stmt, Statement::Decidable(_)));
        assert_eq!(env.goals.len(), 2);
        assert!(env.op("one").is_some());
    }

    #[test]
    fn unbounded_quantifier_rejected() {
        let e = parse_decprop("forall x, x < 3", &Env::new(), &TermCtx::with_default(Sort::nat())).unwrap_err();
        assert!(e.to_string().contains("unbounded"));
    }

    #[test]
    fn parenthesized_props_and_terms() {
        let env = Env::new();
        let ctx = TermCtx::with_default(Sort::nat());
        let p = parse_decprop("(1 < 2) ∧ ¬(2 < 1)", &env, &ctx).unwrap();
        assert!(matches!(p, DecProp::And(..)));
        let q = parse_decprop("(1 + 1) * 2 < 5 -> true", &env, &ctx).unwrap();
        assert!(matches!(q, DecProp::Implies(..)));
    }
}
