//! The acceptance oracles checked against hand-computed values.

mod oracles;

use lemmata::env::Env;
use lemmata::syntax::{parse_term, Sort, TermCtx};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oracles::eval::{eval, Assignment, Value};
use oracles::linear::{feasible, null_space, Rel, Row};
use oracles::poly::{self, Expr, Poly};
use oracles::props::{self, Cmp, NExpr, Prop};

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn row(coeffs: &[i64], constant: i64, rel: Rel) -> Row {
    Row {
        coeffs: coeffs.iter().map(|&c| q(c)).collect(),
        constant: q(constant),
        rel,
    }
}

#[test]
fn linear_oracle_on_known_systems() {
    // x < 0 ∧ -x < 0
    assert!(!feasible(1, &[row(&[1], 0, Rel::Lt), row(&[-1], 0, Rel::Lt)]));
    // x ≤ 0 ∧ -x ≤ 0 has the single point x = 0.
    assert!(feasible(1, &[row(&[1], 0, Rel::Le), row(&[-1], 0, Rel::Le)]));
    // 2x - 1 ≥ 0 ∧ x - 1 < 0 over ℚ: x = 3/4.
    assert!(feasible(1, &[row(&[-2], 1, Rel::Le), row(&[1], -1, Rel::Lt)]));
    // x + y = 1 ∧ x + y = 2
    assert!(!feasible(2, &[row(&[1, 1], -1, Rel::Eq), row(&[1, 1], -2, Rel::Eq)]));
    // a ≤ b ∧ b ≤ c ∧ c < a
    assert!(!feasible(
        3,
        &[row(&[1, -1, 0], 0, Rel::Le), row(&[0, 1, -1], 0, Rel::Le), row(&[-1, 0, 1], 0, Rel::Lt)]
    ));
    // An unbounded region with a line: x - y < 5 only.
    assert!(feasible(2, &[row(&[1, -1], -5, Rel::Lt)]));
    assert!(feasible(3, &[]));
}

#[test]
fn null_space_dimension() {
    let a = vec![vec![q(1), q(1), q(0)], vec![q(2), q(2), q(0)]];
    assert_eq!(null_space(&a, 3).len(), 2);
}

#[test]
fn polynomial_expansion_is_frozen() {
    let x = Expr::Var(0);
    let e = Expr::Pow(Box::new(poly::add(x, Expr::Num(1))), 2);
    assert_eq!(Poly::of(&e).render(), "1 + 2 * x0 + 1 * x0 ^ 2");
    let diff = poly::sub(poly::mul(Expr::Var(0), Expr::Var(1)), poly::mul(Expr::Var(1), Expr::Var(0)));
    assert_eq!(Poly::of(&diff).render(), "0");
    assert_eq!(poly::render(&Expr::Num(-3)), "(-3)");
}

#[test]
fn scramble_preserves_and_perturb_changes_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut changed = 0;
    for _ in 0..200 {
        let e = poly::random_expr(&mut rng, 3, 3);
        let s = poly::scramble(&e, &mut rng);
        assert_eq!(Poly::of(&e), Poly::of(&s));
        let p = poly::perturb(&e, 3, &mut rng);
        changed += (Poly::of(&e) != Poly::of(&p)) as u32;
        assert_eq!(Poly::of(&e) == Poly::of(&p), poly::equal_mod_p(&e, &p, 3, 4, &mut rng));
    }
    assert!(changed > 150);
}

#[test]
fn mod_p_evaluation_is_frozen() {
    // (x0 - 2)^3 at x0 = 5 is 27; at x0 = 0 it is P - 8.
    let e = Expr::Pow(Box::new(poly::sub(Expr::Var(0), Expr::Num(2))), 3);
    assert_eq!(poly::eval_mod(&e, &[5]), 27);
    assert_eq!(poly::eval_mod(&e, &[0]), poly::P - 8);
}

#[test]
fn proposition_truth_is_frozen() {
    // ∀ v0 < 3, v0 * v0 < 9
    let sq = Prop::Forall {
        var: 0,
        bound: 3,
        inclusive: false,
        body: Box::new(Prop::Rel(
            Cmp::Lt,
            NExpr::Mul(Box::new(NExpr::Var(0)), Box::new(NExpr::Var(0))),
            NExpr::Lit(9),
        )),
    };
    assert!(props::truth(&sq, &mut Vec::new()));
    assert_eq!(props::render(&sq), "(∀ v0 < 3, (v0 * v0) < 9)");
    // The inclusive bound reaches 3 * 3 = 9.
    let Prop::Forall { var, bound, body, .. } = sq else { unreachable!() };
    let inclusive = Prop::Forall { var, bound, inclusive: true, body };
    assert!(!props::truth(&inclusive, &mut Vec::new()));
    // Truncated subtraction and the zero-divisor convention.
    let trunc = Prop::Rel(Cmp::Eq, NExpr::Sub(Box::new(NExpr::Lit(2)), Box::new(NExpr::Lit(5))), NExpr::Lit(0));
    assert!(props::truth(&trunc, &mut Vec::new()));
    assert!(props::truth(&Prop::Rel(Cmp::Dvd, NExpr::Lit(0), NExpr::Lit(0)), &mut Vec::new()));
    assert!(!props::truth(&Prop::Rel(Cmp::Dvd, NExpr::Lit(0), NExpr::Lit(4)), &mut Vec::new()));
}

#[test]
fn term_evaluation_is_frozen() {
    let env = Env::parse("coe nat int\n").unwrap();
    let ctx = TermCtx::with_default(Sort::int()).bind("m", Sort::nat()).bind("i", Sort::int());
    let mut a = Assignment::new();
    a.insert("m".into(), BigInt::from(4));
    a.insert("i".into(), BigInt::from(-7));
    let t = parse_term("↑m * i + 3", &env, &ctx).unwrap();
    assert_eq!(eval(&t, &a), Some(Value::Num(BigInt::from(-25))));
    let r = parse_term("↑m > i", &env, &ctx).unwrap();
    assert_eq!(eval(&r, &a), Some(Value::Bool(true)));
    let nat = parse_term("m - 9", &env, &ctx).unwrap();
    assert_eq!(eval(&nat, &a), Some(Value::Num(BigInt::from(0))));
}
