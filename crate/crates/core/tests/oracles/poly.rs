//! Integer ring expressions with two independent meanings: a sparse
//! polynomial with exact coefficients, and evaluation modulo a prime.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(usize),
    Num(i64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

use Expr::*;

pub fn add(a: Expr, b: Expr) -> Expr {
    Add(Box::new(a), Box::new(b))
}
pub fn sub(a: Expr, b: Expr) -> Expr {
    Sub(Box::new(a), Box::new(b))
}
pub fn mul(a: Expr, b: Expr) -> Expr {
    Mul(Box::new(a), Box::new(b))
}

pub fn var_name(i: usize) -> String {
    format!("x{i}")
}

/// Fully parenthesized source text.
pub fn render(e: &Expr) -> String {
    match e {
        Var(i) => var_name(*i),
        Num(n) if *n < 0 => format!("(-{})", n.unsigned_abs()),
        Num(n) => n.to_string(),
        Add(a, b) => format!("({} + {})", render(a), render(b)),
        Sub(a, b) => format!("({} - {})", render(a), render(b)),
        Mul(a, b) => format!("({} * {})", render(a), render(b)),
        Neg(a) => format!("(-{})", render(a)),
        Pow(a, k) => format!("({} ^ {k})", render(a)),
    }
}

pub fn vars(e: &Expr, out: &mut Vec<usize>) {
    match e {
        Var(i) => {
            if !out.contains(i) {
                out.push(*i)
            }
        }
        Num(_) => {}
        Add(a, b) | Sub(a, b) | Mul(a, b) => {
            vars(a, out);
            vars(b, out)
        }
        Neg(a) | Pow(a, _) => vars(a, out),
    }
}

/// Syntactic upper bound on the total degree.
pub fn degree_bound(e: &Expr) -> u32 {
    match e {
        Var(_) => 1,
        Num(_) => 0,
        Add(a, b) | Sub(a, b) => degree_bound(a).max(degree_bound(b)),
        Mul(a, b) => degree_bound(a) + degree_bound(b),
        Neg(a) => degree_bound(a),
        Pow(a, k) => degree_bound(a) * k,
    }
}

/// Monomial exponents indexed by variable, trailing zeros trimmed.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly(pub BTreeMap<Monomial, BigInt>);

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

impl Poly {
    pub fn constant(c: BigInt) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.0.insert(vec![], c);
        }
        p
    }

    pub fn var(i: usize) -> Poly {
        let mut m = vec![0; i + 1];
        m[i] = 1;
        let mut p = Poly::default();
        p.0.insert(m, BigInt::one());
        p
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &o.0 {
            let e = out.entry(m.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                out.remove(m);
            }
        }
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                let len = m1.len().max(m2.len());
                let m: Monomial = (0..len)
                    .map(|i| m1.get(i).copied().unwrap_or(0) + m2.get(i).copied().unwrap_or(0))
                    .collect();
                let mut single = BTreeMap::new();
                single.insert(trim(m), c1 * c2);
                out = out.add(&Poly(single));
            }
        }
        out
    }

    pub fn of(e: &Expr) -> Poly {
        match e {
            Var(i) => Poly::var(*i),
            Num(n) => Poly::constant(BigInt::from(*n)),
            Add(a, b) => Poly::of(a).add(&Poly::of(b)),
            Sub(a, b) => Poly::of(a).add(&Poly::of(b).neg()),
            Mul(a, b) => Poly::of(a).mul(&Poly::of(b)),
            Neg(a) => Poly::of(a).neg(),
            Pow(a, k) => {
                let base = Poly::of(a);
                (0..*k).fold(Poly::constant(BigInt::one()), |acc, _| acc.mul(&base))
            }
        }
    }

    /// Source text of the expanded sum of monomials.
    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .map(|(m, c)| {
                let mut factors = vec![if c.is_negative() {
                    format!("(-{})", c.abs())
                } else {
                    c.to_string()
                }];
                for (i, &k) in m.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => factors.push(var_name(i)),
                        _ => factors.push(format!("{} ^ {k}", var_name(i))),
                    }
                }
                factors.join(" * ")
            })
            .collect();
        terms.join(" + ")
    }
}

pub const P: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

pub fn eval_mod(e: &Expr, point: &[u64]) -> u64 {
    match e {
        Var(i) => point[*i],
        Num(n) => {
            let r = n.unsigned_abs() % P;
            if *n < 0 {
                (P - r) % P
            } else {
                r
            }
        }
        Add(a, b) => (eval_mod(a, point) + eval_mod(b, point)) % P,
        Sub(a, b) => (eval_mod(a, point) + P - eval_mod(b, point)) % P,
        Mul(a, b) => mulmod(eval_mod(a, point), eval_mod(b, point)),
        Neg(a) => (P - eval_mod(a, point)) % P,
        Pow(a, k) => {
            let base = eval_mod(a, point);
            (0..*k).fold(1, |acc, _| mulmod(acc, base))
        }
    }
}

/// Equality by evaluation at `trials` random points modulo `P`.
pub fn equal_mod_p(a: &Expr, b: &Expr, nvars: usize, trials: usize, rng: &mut impl Rng) -> bool {
    (0..trials).all(|_| {
        let point: Vec<u64> = (0..nvars).map(|_| rng.gen_range(0..P)).collect();
        eval_mod(a, &point) == eval_mod(b, &point)
    })
}

pub fn random_expr(rng: &mut impl Rng, nvars: usize, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            Var(rng.gen_range(0..nvars))
        } else {
            Num(rng.gen_range(-4..=6))
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..10) {
        0..=2 => add(random_expr(rng, nvars, d), random_expr(rng, nvars, d)),
        3 => sub(random_expr(rng, nvars, d), random_expr(rng, nvars, d)),
        4..=6 => mul(random_expr(rng, nvars, d), random_expr(rng, nvars, d)),
        7 => Neg(Box::new(random_expr(rng, nvars, d))),
        _ => Pow(Box::new(random_expr(rng, nvars, d.min(1))), rng.gen_range(0..=3)),
    }
}

/// A random rewrite that preserves the value in every commutative ring.
pub fn scramble(e: &Expr, rng: &mut impl Rng) -> Expr {
    let rec = |x: &Expr, rng: &mut _| scramble(x, rng);
    let out = match e {
        Var(_) | Num(_) => e.clone(),
        Add(a, b) => {
            let (a, b) = (rec(a, rng), rec(b, rng));
            match rng.gen_range(0..3) {
                0 => add(b, a),
                1 => sub(a, Neg(Box::new(b))),
                _ => add(a, b),
            }
        }
        Sub(a, b) => {
            let (a, b) = (rec(a, rng), rec(b, rng));
            if rng.gen_bool(0.5) {
                add(a, mul(Num(-1), b))
            } else {
                sub(a, b)
            }
        }
        Mul(a, b) => {
            let (a, b) = (rec(a, rng), rec(b, rng));
            match (&b, rng.gen_range(0..3)) {
                (Add(c, d), 0) => add(mul(a.clone(), (**c).clone()), mul(a, (**d).clone())),
                (_, 1) => mul(b, a),
                _ => mul(a, b),
            }
        }
        Neg(a) => {
            let a = rec(a, rng);
            if rng.gen_bool(0.5) {
                mul(Num(-1), a)
            } else {
                Neg(Box::new(a))
            }
        }
        Pow(a, k) => {
            let a = rec(a, rng);
            match k {
                0 if rng.gen_bool(0.5) => Num(1),
                2 if rng.gen_bool(0.5) => mul(a.clone(), a),
                k if *k >= 1 && rng.gen_bool(0.3) => mul(a.clone(), Pow(Box::new(a), k - 1)),
                _ => Pow(Box::new(a), *k),
            }
        }
    };
    match rng.gen_range(0..12) {
        0 => add(out, Num(0)),
        1 => mul(Num(1), out),
        _ => out,
    }
}

/// A small change that usually alters the value.
pub fn perturb(e: &Expr, nvars: usize, rng: &mut impl Rng) -> Expr {
    match rng.gen_range(0..3) {
        0 => add(e.clone(), Num(rng.gen_range(1..=3))),
        1 => add(e.clone(), Var(rng.gen_range(0..nvars))),
        _ => mul(e.clone(), Num(rng.gen_range(2..=3))),
    }
}
