//! Declarations and the environment they populate.
//!
//! An [`Env`] is built by [`Env::parse`] (or incrementally through
//! [`Env::add`]) and is immutable afterwards; every query and tactic takes
//! `&Env`, so a loaded environment can be shared freely across threads.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decide::DecProp;
use crate::syntax::{ParseError, Pos, Sort, Term};

pub const DEFAULT_PRIORITY: i64 = 1000;

/// Carrier sorts every environment starts with.
pub const BUILTIN_SORTS: [&str; 4] = ["nat", "int", "rat", "real"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpDecl {
    pub name: String,
    pub params: Vec<Sort>,
    pub result: Sort,
    pub assoc: bool,
    pub builtin: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeDecl {
    pub from: Sort,
    pub to: Sort,
    pub injective: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDecl {
    pub name: String,
    /// Carrier parameter names, e.g. `["a"]` or `["r", "m"]`.
    pub params: Vec<String>,
    /// Operator symbols bundled by this class.
    pub projections: Vec<String>,
}

impl ClassDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// `C τ₁ … τₙ` where the τ are carrier sorts (possibly schematic).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassAtom {
    pub class: String,
    pub args: Vec<Sort>,
}

impl ClassAtom {
    pub fn new(class: &str, args: Vec<Sort>) -> Self {
        ClassAtom {
            class: class.to_string(),
            args,
        }
    }

    pub fn unary(class: &str, carrier: Sort) -> Self {
        Self::new(class, vec![carrier])
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Sort::is_ground)
    }

    pub fn sort_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for a in &self.args {
            a.vars(&mut out);
        }
        out
    }

    pub fn subst(&self, s: &crate::syntax::SortSubst) -> ClassAtom {
        ClassAtom {
            class: self.class.clone(),
            args: self.args.iter().map(|a| a.subst(s)).collect(),
        }
    }

    pub fn match_into(&self, target: &ClassAtom, s: &mut crate::syntax::SortSubst) -> bool {
        self.class == target.class
            && self.args.len() == target.args.len()
            && self
                .args
                .iter()
                .zip(&target.args)
                .all(|(p, t)| p.match_into(t, s))
    }
}

impl fmt::Display for ClassAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.class)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A Horn clause `head ← body₁, …, bodyₙ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRule {
    pub name: String,
    pub head: ClassAtom,
    pub body: Vec<ClassAtom>,
    pub priority: i64,
}

impl InstanceRule {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Simp,
    Def,
    CastMove,
    CastElim,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    pub conditions: Vec<ClassAtom>,
    pub kind: RuleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TacticKind {
    Infer,
    InferBidir,
    Simp,
    Dsimp,
    NormCast,
    Ring,
    Abel,
    NormNum,
    Linarith,
    Omega,
    DecTrivial,
}

impl TacticKind {
    pub fn from_name(s: &str) -> Option<TacticKind> {
        Some(match s {
            "infer" | "infer_instance" => TacticKind::Infer,
            "infer_bidir" => TacticKind::InferBidir,
            "simp" => TacticKind::Simp,
            "dsimp" => TacticKind::Dsimp,
            "norm_cast" => TacticKind::NormCast,
            "ring" => TacticKind::Ring,
            "abel" => TacticKind::Abel,
            "norm_num" => TacticKind::NormNum,
            "linarith" => TacticKind::Linarith,
            "omega" => TacticKind::Omega,
            "dec_trivial" | "decide" => TacticKind::DecTrivial,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TacticKind::Infer => "infer",
            TacticKind::InferBidir => "infer_bidir",
            TacticKind::Simp => "simp",
            TacticKind::Dsimp => "dsimp",
            TacticKind::NormCast => "norm_cast",
            TacticKind::Ring => "ring",
            TacticKind::Abel => "abel",
            TacticKind::NormNum => "norm_num",
            TacticKind::Linarith => "linarith",
            TacticKind::Omega => "omega",
            TacticKind::DecTrivial => "dec_trivial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tactic {
    pub kind: TacticKind,
    /// Hypotheses named in a `using` clause; `None` means all of them.
    pub using: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub stmt: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statement {
    Term(Term),
    Class(ClassAtom),
    Decidable(DecProp),
}

/// A lemma or goal: binders, hypotheses, a statement and an optional tactic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma {
    pub name: String,
    pub vars: Vec<(String, Sort)>,
    pub hyps: Vec<Hypothesis>,
    pub conditions: Vec<ClassAtom>,
    pub stmt: Statement,
    pub tactic: Option<Tactic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeclKind {
    Sort,
    Coe(CoeDecl),
    Op(OpDecl),
    Class(ClassDecl),
    Instance(InstanceRule),
    Rewrite(RewriteRule),
    Lemma(Lemma),
    Goal(Lemma),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub doc: Option<String>,
    pub attrs: Vec<String>,
    pub pos: Pos,
    pub kind: DeclKind,
}

impl Declaration {
    pub fn keyword(&self) -> &'static str {
        match &self.kind {
            DeclKind::Sort => "sort",
            DeclKind::Coe(_) => "coe",
            DeclKind::Op(_) => "op",
            DeclKind::Class(_) => "class",
            DeclKind::Instance(_) => "instance",
            DeclKind::Rewrite(r) if r.kind == RuleKind::Def => "def lemma",
            DeclKind::Rewrite(_) => "simp lemma",
            DeclKind::Lemma(_) => "lemma",
            DeclKind::Goal(_) => "goal",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Env {
    pub sorts: Vec<String>,
    pub coercions: Vec<CoeDecl>,
    pub ops: BTreeMap<String, OpDecl>,
    pub classes: Vec<ClassDecl>,
    class_index: HashMap<String, usize>,
    pub instances: Vec<InstanceRule>,
    pub rules: Vec<RewriteRule>,
    pub lemmas: Vec<Lemma>,
    pub goals: Vec<Lemma>,
    pub decls: Vec<Declaration>,
}

impl Env {
    /// An environment holding only the builtin sorts and operators.
    pub fn new() -> Env {
        let mut env = Env {
            sorts: BUILTIN_SORTS.iter().map(|s| s.to_string()).collect(),
            ..Env::default()
        };
        let a = || Sort::var("a");
        let b = || Sort::var("b");
        let mut builtin = |name: &str, params: Vec<Sort>, result: Sort| {
            env.ops.insert(
                name.to_string(),
                OpDecl {
                    name: name.to_string(),
                    params,
                    result,
                    assoc: false,
                    builtin: true,
                },
            );
        };
        for s in ["+", "-", "*", "/"] {
            builtin(s, vec![a(), a()], a());
        }
        builtin("^", vec![a(), Sort::nat()], a());
        builtin("neg", vec![a()], a());
        builtin("•", vec![b(), a()], a());
        builtin("norm", vec![a()], Sort::named("real"));
        env
    }

    /// Parses a source file into a fresh environment.
    pub fn parse(src: &str) -> Result<Env, ParseError> {
        let mut env = Env::new();
        crate::syntax::parser::parse_into(&mut env, src)?;
        Ok(env)
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s == name)
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.class_index.get(name).map(|&i| &self.classes[i])
    }

    pub fn class_idx(&self, name: &str) -> Option<usize> {
        self.class_index.get(name).copied()
    }

    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.ops.get(name)
    }

    pub fn rule(&self, name: &str) -> Option<&RewriteRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&InstanceRule> {
        self.instances.iter().find(|r| r.name == name)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.decls.iter().any(|d| d.name == name)
    }

    pub fn coercion(&self, from: &Sort, to: &Sort) -> Option<&CoeDecl> {
        self.coercions.iter().find(|c| &c.from == from && &c.to == to)
    }

    /// Adds a declaration, enforcing name uniqueness and referential integrity.
    pub fn add(&mut self, decl: Declaration) -> Result<(), ParseError> {
        let pos = decl.pos;
        let redeclared = match &decl.kind {
            DeclKind::Sort => self.has_sort(&decl.name),
            DeclKind::Op(_) => self.ops.contains_key(&decl.name),
            DeclKind::Coe(c) => self.coercion(&c.from, &c.to).is_some(),
            _ => self.is_declared(&decl.name),
        };
        if redeclared {
            return Err(ParseError::Redeclaration {
                pos,
                name: decl.name.clone(),
            });
        }
        match &decl.kind {
            DeclKind::Sort => self.sorts.push(decl.name.clone()),
            DeclKind::Coe(c) => {
                if c.from == c.to {
                    return Err(ParseError::Invalid {
                        pos,
                        msg: "coercion source and target must differ".into(),
                    });
                }
                self.coercions.push(c.clone())
            }
            DeclKind::Op(o) => {
                self.ops.insert(o.name.clone(), o.clone());
            }
            DeclKind::Class(c) => {
                if !(1..=2).contains(&c.arity()) {
                    return Err(ParseError::Invalid {
                        pos,
                        msg: format!("class `{}` must have one or two carrier parameters", c.name),
                    });
                }
                for p in &c.projections {
                    if let Some(other) = self.classes.iter().find(|k| k.projections.contains(p)) {
                        return Err(ParseError::Invalid {
                            pos,
                            msg: format!("projection `{p}` already belongs to class `{}`", other.name),
                        });
                    }
                }
                self.class_index.insert(c.name.clone(), self.classes.len());
                self.classes.push(c.clone());
            }
            DeclKind::Instance(r) => {
                self.check_atom(&r.head, pos)?;
                for b in &r.body {
                    self.check_atom(b, pos)?;
                }
                let head_vars = r.head.sort_vars();
                for b in &r.body {
                    for v in b.sort_vars() {
                        if !head_vars.contains(&v) {
                            return Err(ParseError::Invalid {
                                pos,
                                msg: format!(
                                    "instance `{}`: body variable `{v}` does not occur in the head",
                                    r.name
                                ),
                            });
                        }
                    }
                }
                self.instances.push(r.clone());
            }
            DeclKind::Rewrite(r) => {
                for c in &r.conditions {
                    self.check_atom(c, pos)?;
                }
                self.rules.push(r.clone());
            }
            DeclKind::Lemma(l) => self.lemmas.push(l.clone()),
            DeclKind::Goal(g) => self.goals.push(g.clone()),
        }
        self.decls.push(decl);
        Ok(())
    }

    fn check_atom(&self, atom: &ClassAtom, pos: Pos) -> Result<(), ParseError> {
        let Some(c) = self.class(&atom.class) else {
            return Err(ParseError::UnknownSymbol {
                pos,
                name: atom.class.clone(),
            });
        };
        if c.arity() != atom.args.len() {
            return Err(ParseError::Invalid {
                pos,
                msg: format!(
                    "class `{}` takes {} argument(s), got {}",
                    c.name,
                    c.arity(),
                    atom.args.len()
                ),
            });
        }
        Ok(())
    }

    /// Class, instance, rule and lemma declarations (what `#lint` inspects).
    pub fn public_decls(&self) -> impl Iterator<Item = &Declaration> {
        self.decls.iter().filter(|d| {
            matches!(
                d.kind,
                DeclKind::Class(_) | DeclKind::Instance(_) | DeclKind::Rewrite(_) | DeclKind::Lemma(_)
            )
        })
    }

    pub fn simp_rules(&self) -> Vec<&RewriteRule> {
        self.rules.iter().filter(|r| r.kind == RuleKind::Simp).collect()
    }

    pub fn def_rules(&self) -> Vec<&RewriteRule> {
        self.rules.iter().filter(|r| r.kind == RuleKind::Def).collect()
    }

    pub fn cast_rules(&self) -> Vec<&RewriteRule> {
        self.rules
            .iter()
            .filter(|r| matches!(r.kind, RuleKind::CastMove | RuleKind::CastElim))
            .collect()
    }
}
