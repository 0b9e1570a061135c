//! The algebraic axioms cited by ring and abel traces.

use std::sync::OnceLock;

use crate::env::Env;

/// Commutative (semi)ring and abelian-group axioms, in declaration syntax.
pub const PRELUDE: &str = r#"
/-- Associativity of addition. -/
simp lemma add_assoc : x + y + z = x + (y + z)
/-- Commutativity of addition. -/
simp lemma add_comm : x + y = y + x
/-- Right commutativity of addition. -/
simp lemma add_right_comm : x + y + z = x + z + y
/-- Left identity of addition. -/
simp lemma zero_add : 0 + x = x
/-- Right identity of addition. -/
simp lemma add_zero : x + 0 = x
/-- Associativity of multiplication. -/
simp lemma mul_assoc : x * y * z = x * (y * z)
/-- Commutativity of multiplication. -/
simp lemma mul_comm : x * y = y * x
/-- Right commutativity of multiplication. -/
simp lemma mul_right_comm : x * y * z = x * z * y
/-- Left commutativity of multiplication. -/
simp lemma mul_left_comm : x * (y * z) = y * (x * z)
/-- Left identity of multiplication. -/
simp lemma one_mul : 1 * x = x
/-- Right identity of multiplication. -/
simp lemma mul_one : x * 1 = x
/-- Zero absorbs on the left. -/
simp lemma zero_mul : 0 * x = 0
/-- Zero absorbs on the right. -/
simp lemma mul_zero : x * 0 = 0
/-- Multiplication distributes over addition on the left. -/
simp lemma left_distrib : x * (y + z) = x * y + x * z
/-- Multiplication distributes over addition on the right. -/
simp lemma right_distrib : (x + y) * z = x * z + y * z
/-- Zeroth power. -/
simp lemma pow_zero : x ^ 0 = 1
/-- First power. -/
simp lemma pow_one : x ^ 1 = x
/-- Sum of exponents. -/
simp lemma pow_add : x ^ (m + n) = x ^ m * x ^ n
/-- Product of exponents. -/
simp lemma pow_mul : x ^ (m * n) = (x ^ m) ^ n
/-- Power of a product. -/
simp lemma mul_pow : (x * y) ^ n = x ^ n * y ^ n
/-- Subtraction is addition of the negation. -/
simp lemma sub_eq_add_neg : x - y = x + -y
/-- Negation is multiplication by minus one. -/
simp lemma neg_eq_neg_one_mul : -x = -1 * x
/-- Unit scalar. -/
simp lemma one_smul : (1 : int) • x = x
/-- Zero scalar. -/
simp lemma zero_smul : (0 : int) • x = 0
/-- Scalars distribute over scalar addition. -/
simp lemma add_smul : (k + l : int) • x = k • x + l • x
/-- Scalars distribute over vector addition. -/
simp lemma smul_add : (k : int) • (x + y) = k • x + k • y
/-- Compatibility of scalar multiplication. -/
simp lemma mul_smul : (k * l : int) • x = k • l • x
/-- Negation is the scalar minus one. -/
simp lemma neg_eq_neg_one_smul : -x = (-1 : int) • x
/-- Scaling zero. -/
simp lemma smul_zero : (k : int) • (0 : a) = 0
"#;

/// Axioms that need additive inverses and so are invalid in `nat`.
pub const RING_ONLY: [&str; 3] = ["sub_eq_add_neg", "neg_eq_neg_one_mul", "neg_eq_neg_one_smul"];

/// Literal arithmetic: both sides are literal expressions of equal value.
pub const NUM_FOLD: &str = "num_fold";
/// A numeral commutes with a coercion: `↑n = n`.
pub const CAST_NUMERAL: &str = "cast_numeral";

pub fn prelude() -> &'static Env {
    static PRELUDE_ENV: OnceLock<Env> = OnceLock::new();
    PRELUDE_ENV.get_or_init(|| Env::parse(PRELUDE).expect("axiom prelude parses"))
}
