//! Algebraic degrees of iterates and the first dynamical degree.

use super::{Preimage, RationalSelfMap};
use crate::error::{LabError, LabResult, PolyError};
use crate::poly::compose_and_reduce;

pub const DEGREE_GROWTH_MAX_ITERATES: usize = 8;
/// Upper bound on (terms of f^(n-1)) × (dense size of the raw composite).
const COMPOSE_COST_LIMIT: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeGrowth {
    /// deg(f^n) for n = 1..=n_max.
    pub degrees: Vec<u32>,
    /// deg(f^n)^(1/n).
    pub roots: Vec<f64>,
    /// deg(f^(n+m)) ≤ deg(f^n)·deg(f^m) for every n + m ≤ n_max.
    pub submultiplicative: bool,
    /// Last n-th root, the estimate of the first dynamical degree.
    pub d1_estimate: f64,
    pub d_top: u32,
    /// Whether the data supports d_1 < d_top.
    pub d1_below_top: bool,
}

/// Exact degree sequence of the iterates of a map of P^2.
pub fn degree_growth(f: &RationalSelfMap, n_max: usize) -> LabResult<DegreeGrowth> {
    if f.dim() != 2 {
        return Err(LabError::Unsupported("degree growth is computed for maps of P^2".into()));
    }
    if n_max == 0 || n_max > DEGREE_GROWTH_MAX_ITERATES {
        return Err(PolyError::CostGuard(format!("n_max = {n_max} outside 1..={DEGREE_GROWTH_MAX_ITERATES}")).into());
    }
    let base = f.exact();
    let mut iterate = base.clone();
    let mut degrees = vec![iterate.degree()];
    for _ in 1..n_max {
        let terms: u64 = iterate.components().iter().map(|c| c.poly().num_terms() as u64).sum();
        let raw = iterate.degree() as u64 * base.degree() as u64;
        let dense = (raw + 1) * (raw + 2) / 2;
        if terms.saturating_mul(dense) > COMPOSE_COST_LIMIT {
            return Err(PolyError::CostGuard(format!("composite of raw degree {raw} from {terms} terms")).into());
        }
        iterate = compose_and_reduce(&iterate, base)?;
        degrees.push(iterate.degree());
    }
    let roots: Vec<f64> = degrees.iter().enumerate().map(|(i, &d)| (d as f64).powf(1.0 / (i + 1) as f64)).collect();
    let mut submultiplicative = true;
    for n in 1..=n_max {
        for m in 1..=(n_max - n) {
            if degrees[n + m - 1] as u64 > degrees[n - 1] as u64 * degrees[m - 1] as u64 {
                submultiplicative = false;
            }
        }
    }
    let d1_estimate = *roots.last().unwrap();
    let d_top = f.topological_degree()?;
    Ok(DegreeGrowth { degrees, roots, submultiplicative, d1_estimate, d_top, d1_below_top: d1_estimate < d_top as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cremona_alternates() {
        let s = RationalSelfMap::parse(&["x1*x2", "x0*x2", "x0*x1"]).unwrap();
        let g = degree_growth(&s, 6).unwrap();
        assert_eq!(g.degrees, vec![2, 1, 2, 1, 2, 1]);
        assert!(g.submultiplicative);
        assert!(!g.d1_below_top);
    }

    #[test]
    fn holomorphic_squares_double() {
        let f = RationalSelfMap::parse(&["x0^2", "x1^2", "x2^2"]).unwrap();
        let g = degree_growth(&f, 4).unwrap();
        assert_eq!(g.degrees, vec![2, 4, 8, 16]);
        assert_eq!(g.d_top, 4);
        assert!(g.d1_below_top);
    }

    #[test]
    fn guard_rejects_deep_iterates() {
        let f = RationalSelfMap::parse(&["x0^2", "x1^2", "x2^2"]).unwrap();
        assert!(matches!(degree_growth(&f, 9), Err(LabError::Poly(PolyError::CostGuard(_)))));
    }
}
