//! Exact feasibility over ℚ by vertex enumeration.
//!
//! A system `Σ aᵢ·xᵢ + c  rel  0` gets an extra slack `t` added to its strict
//! rows and the bound `t ≤ 1`. Restricting `x` to the orthogonal complement
//! of the null space of the coefficient matrix makes the polyhedron pointed,
//! so it is nonempty iff it has a vertex, and `max t` is attained at one.
//! The system is feasible iff some vertex exists and, when strict rows are
//! present, the largest `t` over the vertices is positive.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<Q>,
    pub constant: Q,
    pub rel: Rel,
}

/// `Σ coeffs·y = rhs` or `Σ coeffs·y ≤ rhs` over the extended variables.
#[derive(Debug, Clone)]
struct Half {
    coeffs: Vec<Q>,
    rhs: Q,
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<Q>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (v, p) in m[i].iter_mut().zip(&pivot_row) {
                    *v = &*v - &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

/// Basis of `{ v : A·v = 0 }`.
pub fn null_space(a: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let pivots = rref(&mut m, n);
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); n];
        v[free] = Q::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// The unique solution of the equations, if they have exactly one.
fn unique_solution(eqs: &[&Half], dim: usize) -> Option<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = eqs
        .iter()
        .map(|h| {
            let mut row = h.coeffs.clone();
            row.push(h.rhs.clone());
            row
        })
        .collect();
    let pivots = rref(&mut m, dim + 1);
    if pivots.contains(&dim) || pivots.len() != dim {
        return None;
    }
    Some((0..dim).map(|i| m[i][dim].clone()).collect())
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Exact rational feasibility of `rows` over `n` variables.
pub fn feasible(n: usize, rows: &[Row]) -> bool {
    let dim = n + 1;
    let t = n;
    let mut eqs: Vec<Half> = Vec::new();
    let mut ineqs: Vec<Half> = Vec::new();
    for r in rows {
        let mut coeffs = r.coeffs.clone();
        coeffs.push(Q::zero());
        let rhs = -r.constant.clone();
        match r.rel {
            Rel::Eq => eqs.push(Half { coeffs, rhs }),
            Rel::Le => ineqs.push(Half { coeffs, rhs }),
            Rel::Lt => {
                coeffs[t] = Q::one();
                ineqs.push(Half { coeffs, rhs });
            }
        }
    }
    let mut bound = vec![Q::zero(); dim];
    bound[t] = Q::one();
    ineqs.push(Half {
        coeffs: bound,
        rhs: Q::one(),
    });
    let a: Vec<Vec<Q>> = rows.iter().map(|r| r.coeffs.clone()).collect();
    for v in null_space(&a, n) {
        let mut coeffs = v;
        coeffs.push(Q::zero());
        eqs.push(Half { coeffs, rhs: Q::zero() });
    }
    let any_strict = rows.iter().any(|r| r.rel == Rel::Lt);
    let mut best: Option<Q> = None;
    for k in 0..=dim.min(ineqs.len()) {
        let mut combos = Vec::new();
        subsets(ineqs.len(), k, 0, &mut Vec::new(), &mut combos);
        for combo in combos {
            let mut active: Vec<&Half> = eqs.iter().collect();
            active.extend(combo.iter().map(|&i| &ineqs[i]));
            let Some(y) = unique_solution(&active, dim) else { continue };
            if ineqs.iter().all(|h| dot(&h.coeffs, &y) <= h.rhs) {
                if best.as_ref().map_or(true, |b| y[t] > *b) {
                    best = Some(y[t].clone());
                }
            }
        }
    }
    match best {
        None => false,
        Some(tmax) => !any_strict || tmax.is_positive(),
    }
}
