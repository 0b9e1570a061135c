//! A small tactic engine: sorted terms, type-class resolution over Horn
//! clauses, directional rewriting, arithmetic normalization and decision
//! procedures, all producing independently checkable proof traces.

pub mod arith;
pub mod bench;
pub mod decide;
pub mod env;
pub mod hierarchy;
pub mod linarith;
pub mod lint;
pub mod prooftrace;
pub mod resolver;
pub mod rewriter;
pub mod scalar;
pub mod syntax;
pub mod tactic;

/// Exact rationals, the default coefficient field.
pub type Rational = num_rational::BigRational;
/// Polynomials in Horner form over the rationals.
pub type Poly = arith::horner::HornerPoly<Rational>;
pub type LinearSystem = linarith::LinearSystem<Rational>;
pub type Certificate = linarith::Certificate<Rational>;
