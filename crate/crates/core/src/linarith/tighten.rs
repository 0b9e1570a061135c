use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Constraint, Domain, LinError, LinRel, LinearSystem};
use crate::scalar::format_rational;

/// Integer normalization of each constraint: strict bounds become non-strict
/// by one, coefficients are divided by their gcd and the bound is rounded
/// toward the feasible side. An equality whose gcd does not divide its
/// constant becomes `1 = 0`.
pub fn int_tighten(sys: &LinearSystem<BigRational>) -> Result<LinearSystem<BigRational>, LinError> {
    let constraints = sys
        .constraints
        .iter()
        .map(tighten_one)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LinearSystem::new(sys.vars.clone(), constraints, Domain::Int))
}

fn tighten_one(c: &Constraint<BigRational>) -> Result<Constraint<BigRational>, LinError> {
    let mut g = BigInt::zero();
    for a in c.coeffs.values() {
        if !a.is_integer() {
            return Err(LinError::NonIntegral(format_rational(a)));
        }
        g = g.gcd(a.numer());
    }
    if g.is_zero() {
        return Ok(c.clone());
    }
    let gq = BigRational::from_integer(g.clone());
    // Σ a·x  rel  bound
    let bound = -c.constant.clone();
    let (rel, bound) = match c.rel {
        LinRel::Lt => (LinRel::Le, BigRational::from_integer(bound.ceil().to_integer() - BigInt::one())),
        LinRel::Le => (LinRel::Le, bound),
        LinRel::Eq => {
            let scaled = bound.clone() / gq.clone();
            if !scaled.is_integer() {
                return Ok(Constraint::new([], BigRational::one(), LinRel::Eq));
            }
            (LinRel::Eq, bound)
        }
    };
    let bound = (bound / gq.clone()).floor();
    Ok(Constraint::new(
        c.coeffs.iter().map(|(v, a)| (*v, a.clone() / gq.clone())),
        -bound,
        rel,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn one(cs: &[i64], k: i64, rel: LinRel) -> LinearSystem<BigRational> {
        LinearSystem::new(
            (0..cs.len()).map(|i| format!("x{i}")).collect(),
            vec![Constraint::new(cs.iter().enumerate().map(|(i, c)| (i, q(*c))), q(k), rel)],
            Domain::Int,
        )
    }

    #[test]
    fn floor_is_forced() {
        // 2x ≤ 3
        let t = int_tighten(&one(&[2], -3, LinRel::Le)).unwrap();
        assert_eq!(t.constraints, vec![Constraint::new([(0, q(1))], q(-1), LinRel::Le)]);
    }

    #[test]
    fn strict_bound_drops_by_one() {
        // x < 1
        let t = int_tighten(&one(&[1], -1, LinRel::Lt)).unwrap();
        assert_eq!(t.constraints, vec![Constraint::new([(0, q(1))], q(0), LinRel::Le)]);
    }

    #[test]
    fn indivisible_equality_is_absurd() {
        // 2x + 4y = 3
        let t = int_tighten(&one(&[2, 4], -3, LinRel::Eq)).unwrap();
        assert!(t.constraints[0].is_absurd());
    }

    #[test]
    fn fractional_coefficient_rejected() {
        let mut s = one(&[1], 0, LinRel::Le);
        s.constraints[0].coeffs.insert(0, BigRational::new(1.into(), 2.into()));
        assert!(matches!(int_tighten(&s), Err(LinError::NonIntegral(_))));
    }

    fn points(n: usize) -> Vec<Vec<BigRational>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-10..=10).map(move |v| {
                        let mut p = p.clone();
                        p.push(q(v));
                        p
                    })
                })
                .collect();
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn integer_points_unchanged_over_box(
            rows in prop::collection::vec(
                (prop::collection::vec(-6i64..=6, 2), -20i64..=20, 0usize..3),
                1..4,
            )
        ) {
            let rels = [LinRel::Lt, LinRel::Le, LinRel::Eq];
            let sys = LinearSystem::new(
                vec!["x".into(), "y".into()],
                rows.iter()
                    .map(|(cs, k, r)| Constraint::new(cs.iter().enumerate().map(|(i, c)| (i, q(*c))), q(*k), rels[*r]))
                    .collect(),
                Domain::Int,
            );
            let t = int_tighten(&sys).unwrap();
            for c in &t.constraints {
                let g = c.coeffs.values().fold(BigInt::zero(), |g, a| g.gcd(a.numer()));
                prop_assert!(c.coeffs.is_empty() || g.is_one());
            }
            for p in points(2) {
                prop_assert_eq!(sys.satisfied_by(&p), t.satisfied_by(&p));
            }
        }
    }
}
