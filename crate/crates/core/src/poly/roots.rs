//! Roots of binary forms on P^1.
//!
//! Roots at [0:1] and [1:0] are split off exactly from the zero pattern of
//! the coefficients. The remaining dehomogenized polynomial is solved with
//! Aberth–Ehrlich iterations started on the circles given by the Newton
//! polygon of the coefficient moduli; points outside the unit disc are
//! evaluated through the reversed polynomial, so every iterate is computed in
//! the chart where it is well scaled. Exact inputs are first split into
//! square-free factors so that multiplicities are exact.

use num_complex::Complex64;

use super::coeff::Coefficient;
use super::gcd::{dense_degree, squarefree_decomposition};
use super::homogeneous::HomogeneousPoly;
use crate::error::PolyError;
use crate::projective::ProjectivePoint;

/// Radius (chordal) within which numerical roots are merged.
pub const CLUSTER_RADIUS: f64 = 1e-6;

const MAX_ITERATIONS: usize = 600;

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub point: ProjectivePoint,
    pub multiplicity: u32,
}

/// Roots of a binary form with multiplicities; multiplicities sum to the
/// degree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Each root repeated according to its multiplicity.
    pub fn points_with_multiplicity(&self) -> Vec<ProjectivePoint> {
        let mut out = Vec::new();
        for r in &self.roots {
            for _ in 0..r.multiplicity {
                out.push(r.point.clone());
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    fn push(&mut self, point: ProjectivePoint, multiplicity: u32) {
        if multiplicity > 0 {
            self.roots.push(Root { point, multiplicity });
        }
    }

    /// Merge roots closer than `radius` in the chordal metric.
    pub fn clustered(self, radius: f64) -> RootSet {
        let mut out: Vec<Root> = Vec::with_capacity(self.roots.len());
        for r in self.roots {
            match out.iter_mut().find(|o| o.point.chordal(&r.point) < radius) {
                Some(o) => o.multiplicity += r.multiplicity,
                None => out.push(r),
            }
        }
        RootSet { roots: out }
    }
}

/// Roots of a binary form p(x0, x1) = sum_j c_j x0^j x1^(n-j) as points of P^1.
pub fn univariate_roots<C: Coefficient>(p: &HomogeneousPoly<C>) -> Result<RootSet, PolyError> {
    if p.nvars() != 2 {
        return Err(PolyError::DimensionMismatch { expected: 2, found: p.nvars() });
    }
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let coeffs = p.binary_coeffs();
    let n = coeffs.len() - 1;
    let top = dense_degree(&coeffs).unwrap();
    let low = coeffs.iter().position(|c| !c.is_zero()).unwrap();
    let mut set = RootSet::default();
    set.push(ProjectivePoint::infinity(), (n - top) as u32);
    set.push(ProjectivePoint::from_affine(Complex64::new(0.0, 0.0)), low as u32);
    let core = &coeffs[low..=top];
    if core.len() <= 1 {
        return Ok(set);
    }
    if C::EXACT {
        for (factor, mult) in squarefree_decomposition(core) {
            let f: Vec<Complex64> = factor.iter().map(|c| c.to_c64()).collect();
            for z in dense_roots(&f) {
                set.push(ProjectivePoint::from_affine(z), mult);
            }
        }
        Ok(set)
    } else {
        let f: Vec<Complex64> = core.iter().map(|c| c.to_c64()).collect();
        for z in dense_roots(&f) {
            set.push(ProjectivePoint::from_affine(z), 1);
        }
        Ok(set.clustered(CLUSTER_RADIUS))
    }
}

/// Relative residual |p(u)| / ‖coeffs‖ at the unit representative u.
pub fn relative_residual(p: &HomogeneousPoly<Complex64>, root: &ProjectivePoint) -> f64 {
    let norm = p.poly().terms().values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    p.poly().eval_c64(root.coords()).norm() / norm
}

/// All complex roots of a dense polynomial with nonzero constant and leading
/// coefficients (coefficients low degree first).
pub fn dense_roots(a: &[Complex64]) -> Vec<Complex64> {
    let m = a.len() - 1;
    match m {
        0 => Vec::new(),
        1 => vec![-a[0] / a[1]],
        2 => quadratic_roots(a[2], a[1], a[0]).to_vec(),
        _ => aberth(a),
    }
}

/// Principal square root by the half-angle formulas, without trigonometry.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let n2 = z.norm_sqr();
    let r = if n2.is_normal() { n2.sqrt() } else { z.norm() };
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let t = ((r + z.re.abs()) * 0.5).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// Roots of a z^2 + b z + c without cancellation.
pub fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = principal_sqrt(b * b - 4.0 * a * c);
    // Choose the sign that avoids subtracting nearly equal numbers.
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    if q == Complex64::new(0.0, 0.0) {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// Initial approximations from the upper convex hull of (j, log|a_j|).
fn initial_guesses(a: &[Complex64]) -> Vec<Complex64> {
    let m = a.len() - 1;
    let pts: Vec<(f64, f64)> = a
        .iter()
        .enumerate()
        .map(|(j, c)| (j as f64, if c.norm() > 0.0 { c.norm().ln() } else { f64::NEG_INFINITY }))
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..=m {
        if pts[j].1 == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let (o, p) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
            let cross = (p.0 - o.0) * (pts[j].1 - o.1) - (p.1 - o.1) * (pts[j].0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut out = Vec::with_capacity(m);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        let k = j - i;
        let r = ((pts[i].1 - pts[j].1) / k as f64).exp();
        for t in 0..k {
            let theta = std::f64::consts::TAU * (t as f64 / k as f64 + i as f64 / m as f64) + sigma;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

/// Newton correction p(z)/p'(z) and a flag telling whether |p(z)| is within
/// the rounding error of its evaluation.
fn newton_ratio(a: &[Complex64], abs_a: &[f64], z: Complex64) -> (Complex64, bool) {
    let m = a.len() - 1;
    let eps = f64::EPSILON;
    if z.norm() <= 1.0 {
        let mut p = a[m];
        let mut dp = Complex64::new(0.0, 0.0);
        let mut bound = abs_a[m];
        let r = z.norm();
        for j in (0..m).rev() {
            dp = dp * z + p;
            p = p * z + a[j];
            bound = bound * r + abs_a[j];
        }
        let converged = p.norm() <= 4.0 * eps * bound * (m as f64);
        (p / dp, converged)
    } else {
        // Reversed polynomial q(w) = w^m p(1/w).
        let w = z.inv();
        let mut q = a[0];
        let mut dq = Complex64::new(0.0, 0.0);
        let mut bound = abs_a[0];
        let r = w.norm();
        for j in 1..=m {
            dq = dq * w + q;
            q = q * w + a[j];
            bound = bound * r + abs_a[j];
        }
        let converged = q.norm() <= 4.0 * eps * bound * (m as f64);
        (z / (m as f64 - w * dq / q), converged)
    }
}

fn aberth(a: &[Complex64]) -> Vec<Complex64> {
    let m = a.len() - 1;
    let abs_a: Vec<f64> = a.iter().map(|c| c.norm()).collect();
    let mut z = initial_guesses(a);
    debug_assert_eq!(z.len(), m);
    let mut done = vec![false; m];
    for _ in 0..MAX_ITERATIONS {
        let mut all = true;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (ratio, converged) = newton_ratio(a, &abs_a, z[i]);
            if converged || !ratio.is_finite() {
                done[i] = true;
                continue;
            }
            all = false;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
            }
        }
        if all {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    #[test]
    fn principal_sqrt_matches_polar_form() {
        for (re, im) in [(4.0, 0.0), (-4.0, 0.0), (-4.0, -0.0), (0.0, 2.0), (-3.0, -1e-300), (1e-300, 7.0), (-2.5, 3.5)] {
            let z = Complex64::new(re, im);
            let a = principal_sqrt(z);
            let b = z.sqrt();
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1e-300), "{z} {a} {b}");
        }
    }

    use super::*;
    use crate::poly::parse::parse_poly;
    use crate::rng::SeedStream;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn simple_examples() {
        let r = univariate_roots(&parse_poly("x0^2 + x1^2", 2).unwrap()).unwrap();
        assert_eq!(r.total_multiplicity(), 2);
        for z in [c(0.0, 1.0), c(0.0, -1.0)] {
            assert!(r.roots.iter().any(|x| x.point == ProjectivePoint::from_affine(z)));
        }
        let r = univariate_roots(&parse_poly("x0*x1", 2).unwrap()).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.roots.iter().any(|x| x.point == ProjectivePoint::infinity()));
        assert!(r.roots.iter().any(|x| x.point == ProjectivePoint::from_affine(c(0.0, 0.0))));
        let zero = HomogeneousPoly::<Complex64>::zero(2, 3);
        assert_eq!(univariate_roots(&zero).unwrap_err(), PolyError::ZeroPolynomial);
    }

    #[test]
    fn exact_multiplicities() {
        let r = univariate_roots(&parse_poly("(x0 - x1)^3*(x0 + 2*x1)*x1^2", 2).unwrap()).unwrap();
        assert_eq!(r.total_multiplicity(), 6);
        let one = r.roots.iter().find(|x| x.point == ProjectivePoint::from_affine(c(1.0, 0.0))).unwrap();
        assert_eq!(one.multiplicity, 3);
        let inf = r.roots.iter().find(|x| x.point == ProjectivePoint::infinity()).unwrap();
        assert_eq!(inf.multiplicity, 2);
    }

    #[test]
    fn float_double_root_is_clustered() {
        let p = parse_poly("(x0 - 3/7*x1)^2*(x0 + i*x1)", 2).unwrap().to_float();
        let r = univariate_roots(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.total_multiplicity(), 3);
    }

    #[test]
    fn random_high_degree_counts_and_residuals() {
        let s = SeedStream::new(7);
        for (i, n) in [50u32, 120, 200].into_iter().enumerate() {
            let p = HomogeneousPoly::random_kostlan(2, n, false, &mut s.rng(i as u64));
            let r = univariate_roots(&p).unwrap();
            assert_eq!(r.total_multiplicity(), n);
            for root in &r.roots {
                assert!(relative_residual(&p, &root.point) < 1e-8);
            }
        }
    }

    /// Eigenvalues of the companion matrix, used as an independent oracle.
    fn companion_roots(a: &[Complex64]) -> Vec<Complex64> {
        let m = a.len() - 1;
        let mut mat = DMatrix::<Complex64>::zeros(m, m);
        for i in 1..m {
            mat[(i, i - 1)] = c(1.0, 0.0);
        }
        for i in 0..m {
            mat[(i, m - 1)] = -a[i] / a[m];
        }
        mat.schur().eigenvalues().expect("triangular Schur form").iter().copied().collect()
    }

    #[test]
    fn agrees_with_companion_matrix() {
        let s = SeedStream::new(11);
        for t in 0..20u64 {
            let p = HomogeneousPoly::random_kostlan(2, 12, t % 2 == 0, &mut s.rng(t));
            let a = p.binary_coeffs();
            let ours = dense_roots(&a);
            let theirs = companion_roots(&a);
            for z in &theirs {
                let pz = ProjectivePoint::from_affine(*z);
                let d = ours.iter().map(|w| ProjectivePoint::from_affine(*w).chordal(&pz)).fold(1.0, f64::min);
                assert!(d < 1e-8, "companion root {z} unmatched (distance {d})");
            }
        }
    }

    #[test]
    fn quadratic_is_stable() {
        let [r1, r2] = quadratic_roots(c(1.0, 0.0), c(-1e8, 0.0), c(1.0, 0.0));
        let (big, small) = if r1.norm() > r2.norm() { (r1, r2) } else { (r2, r1) };
        assert!((big.re - 1e8).abs() / 1e8 < 1e-15);
        assert!((small.re - 1e-8).abs() / 1e-8 < 1e-12);
    }
}
