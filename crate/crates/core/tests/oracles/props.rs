//! Bounded propositions over `nat`, decided by enumerating every instance.

use rand::Rng;

#[derive(Debug, Clone)]
pub enum NExpr {
    Lit(u32),
    Var(usize),
    Add(Box<NExpr>, Box<NExpr>),
    Sub(Box<NExpr>, Box<NExpr>),
    Mul(Box<NExpr>, Box<NExpr>),
}

#[derive(Debug, Clone, Copy)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
    Dvd,
}

#[derive(Debug, Clone)]
pub enum Prop {
    Lit(bool),
    Rel(Cmp, NExpr, NExpr),
    Forall { var: usize, bound: u32, inclusive: bool, body: Box<Prop> },
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Not(Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
}

fn var_name(i: usize) -> String {
    format!("v{i}")
}

pub fn render_expr(e: &NExpr) -> String {
    match e {
        NExpr::Lit(n) => n.to_string(),
        NExpr::Var(i) => var_name(*i),
        NExpr::Add(a, b) => format!("({} + {})", render_expr(a), render_expr(b)),
        NExpr::Sub(a, b) => format!("({} - {})", render_expr(a), render_expr(b)),
        NExpr::Mul(a, b) => format!("({} * {})", render_expr(a), render_expr(b)),
    }
}

pub fn render(p: &Prop) -> String {
    match p {
        Prop::Lit(b) => b.to_string(),
        Prop::Rel(c, a, b) => {
            let sym = match c {
                Cmp::Lt => "<",
                Cmp::Le => "≤",
                Cmp::Eq => "=",
                Cmp::Ne => "≠",
                Cmp::Gt => ">",
                Cmp::Ge => "≥",
                Cmp::Dvd => "∣",
            };
            format!("{} {sym} {}", render_expr(a), render_expr(b))
        }
        Prop::Forall { var, bound, inclusive, body } => format!(
            "(∀ {} {} {bound}, {})",
            var_name(*var),
            if *inclusive { "≤" } else { "<" },
            render(body)
        ),
        Prop::And(a, b) => format!("({} ∧ {})", render(a), render(b)),
        Prop::Or(a, b) => format!("({} ∨ {})", render(a), render(b)),
        Prop::Not(a) => format!("¬({})", render(a)),
        Prop::Implies(a, b) => format!("({} → {})", render(a), render(b)),
    }
}

fn value(e: &NExpr, env: &[u64]) -> u64 {
    match e {
        NExpr::Lit(n) => *n as u64,
        NExpr::Var(i) => env[*i],
        NExpr::Add(a, b) => value(a, env) + value(b, env),
        NExpr::Sub(a, b) => value(a, env).saturating_sub(value(b, env)),
        NExpr::Mul(a, b) => value(a, env) * value(b, env),
    }
}

/// Truth by enumeration; `env[i]` is the value of the `i`-th bound variable.
pub fn truth(p: &Prop, env: &mut Vec<u64>) -> bool {
    match p {
        Prop::Lit(b) => *b,
        Prop::Rel(c, a, b) => {
            let (x, y) = (value(a, env), value(b, env));
            match c {
                Cmp::Lt => x < y,
                Cmp::Le => x <= y,
                Cmp::Eq => x == y,
                Cmp::Ne => x != y,
                Cmp::Gt => x > y,
                Cmp::Ge => x >= y,
                Cmp::Dvd => {
                    if x == 0 {
                        y == 0
                    } else {
                        y % x == 0
                    }
                }
            }
        }
        Prop::Forall { var, bound, inclusive, body } => {
            let top = if *inclusive { *bound as u64 + 1 } else { *bound as u64 };
            (0..top).all(|k| {
                debug_assert_eq!(env.len(), *var);
                env.push(k);
                let r = truth(body, env);
                env.pop();
                r
            })
        }
        Prop::And(a, b) => truth(a, env) && truth(b, env),
        Prop::Or(a, b) => truth(a, env) || truth(b, env),
        Prop::Not(a) => !truth(a, env),
        Prop::Implies(a, b) => !truth(a, env) || truth(b, env),
    }
}

fn random_nexpr(rng: &mut impl Rng, bound_vars: usize, depth: u32) -> NExpr {
    if depth == 0 || rng.gen_bool(0.4) {
        return if bound_vars > 0 && rng.gen_bool(0.6) {
            NExpr::Var(rng.gen_range(0..bound_vars))
        } else {
            NExpr::Lit(rng.gen_range(0..=9))
        };
    }
    let (a, b) = (
        Box::new(random_nexpr(rng, bound_vars, depth - 1)),
        Box::new(random_nexpr(rng, bound_vars, depth - 1)),
    );
    match rng.gen_range(0..4) {
        0 | 1 => NExpr::Add(a, b),
        2 => NExpr::Sub(a, b),
        _ => NExpr::Mul(a, b),
    }
}

/// A random proposition of depth at most `depth` (a relation has depth 1),
/// with quantifier bounds at most `max_bound`.
pub fn random_prop(rng: &mut impl Rng, bound_vars: usize, depth: u32, max_bound: u32) -> Prop {
    if depth <= 1 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.1) {
            Prop::Lit(rng.gen_bool(0.5))
        } else {
            let cmp = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ne, Cmp::Gt, Cmp::Ge, Cmp::Dvd][rng.gen_range(0..7)];
            Prop::Rel(cmp, random_nexpr(rng, bound_vars, 2), random_nexpr(rng, bound_vars, 2))
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..6) {
        0 | 1 if bound_vars < 3 => Prop::Forall {
            var: bound_vars,
            bound: rng.gen_range(0..=max_bound),
            inclusive: rng.gen_bool(0.5),
            body: Box::new(random_prop(rng, bound_vars + 1, d, max_bound)),
        },
        2 => Prop::And(
            Box::new(random_prop(rng, bound_vars, d, max_bound)),
            Box::new(random_prop(rng, bound_vars, d, max_bound)),
        ),
        3 => Prop::Or(
            Box::new(random_prop(rng, bound_vars, d, max_bound)),
            Box::new(random_prop(rng, bound_vars, d, max_bound)),
        ),
        4 => Prop::Not(Box::new(random_prop(rng, bound_vars, d, max_bound))),
        _ => Prop::Implies(
            Box::new(random_prop(rng, bound_vars, d, max_bound)),
            Box::new(random_prop(rng, bound_vars, d, max_bound)),
        ),
    }
}

pub fn depth(p: &Prop) -> u32 {
    match p {
        Prop::Lit(_) | Prop::Rel(..) => 1,
        Prop::Forall { body, .. } | Prop::Not(body) => 1 + depth(body),
        Prop::And(a, b) | Prop::Or(a, b) | Prop::Implies(a, b) => 1 + depth(a).max(depth(b)),
    }
}
