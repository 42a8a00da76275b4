//! Closed-form smooth test functions on P^k.
//!
//! Every built-in function is a ratio of a hermitian quadratic form and
//! ‖z‖², so its Fubini–Study integral is known exactly and it pairs against
//! the first nontrivial spherical harmonics.

use std::fmt;

use num_complex::Complex64;

use crate::projective::ProjectivePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunctionId {
    /// Constant function (value stored separately).
    Constant,
    /// |z_j|² / ‖z‖²
    Coordinate(usize),
    /// Re(z_i z̄_j) / ‖z‖²
    RealCross(usize, usize),
    /// Im(z_i z̄_j) / ‖z‖²
    ImagCross(usize, usize),
    /// |z_j|⁴ / ‖z‖⁴ (not in the built-in set: its mean against real
    /// zero ensembles is biased).
    QuarticCoordinate(usize),
}

impl fmt::Display for TestFunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunctionId::Constant => write!(f, "const"),
            TestFunctionId::Coordinate(j) => write!(f, "coord{j}"),
            TestFunctionId::RealCross(i, j) => write!(f, "re{i}{j}"),
            TestFunctionId::ImagCross(i, j) => write!(f, "im{i}{j}"),
            TestFunctionId::QuarticCoordinate(j) => write!(f, "quartic{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: TestFunctionId,
    pub dim: usize,
    /// A priori bound on the C² norm with respect to the Fubini–Study metric.
    pub c2_norm_bound: f64,
    constant: f64,
}

impl TestFunction {
    pub fn constant(dim: usize, value: f64) -> Self {
        TestFunction { id: TestFunctionId::Constant, dim, c2_norm_bound: value.abs(), constant: value }
    }

    pub fn coordinate(dim: usize, j: usize) -> Self {
        assert!(j <= dim);
        TestFunction { id: TestFunctionId::Coordinate(j), dim, c2_norm_bound: 4.0, constant: 0.0 }
    }

    pub fn real_cross(dim: usize, i: usize, j: usize) -> Self {
        assert!(i < j && j <= dim);
        TestFunction { id: TestFunctionId::RealCross(i, j), dim, c2_norm_bound: 4.0, constant: 0.0 }
    }

    pub fn imag_cross(dim: usize, i: usize, j: usize) -> Self {
        assert!(i < j && j <= dim);
        TestFunction { id: TestFunctionId::ImagCross(i, j), dim, c2_norm_bound: 4.0, constant: 0.0 }
    }

    pub fn quartic(dim: usize, j: usize) -> Self {
        assert!(j <= dim);
        TestFunction { id: TestFunctionId::QuarticCoordinate(j), dim, c2_norm_bound: 16.0, constant: 0.0 }
    }

    /// The built-in family: coordinate weights and the real and imaginary
    /// cross terms.
    pub fn builtin_set(dim: usize) -> Vec<TestFunction> {
        let mut out: Vec<TestFunction> = (0..=dim).map(|j| Self::coordinate(dim, j)).collect();
        for i in 0..=dim {
            for j in (i + 1)..=dim {
                out.push(Self::real_cross(dim, i, j));
                out.push(Self::imag_cross(dim, i, j));
            }
        }
        out
    }

    pub fn eval(&self, p: &ProjectivePoint) -> f64 {
        debug_assert_eq!(p.dim(), self.dim);
        // Stored points have unit norm.
        self.eval_unit(p.coords())
    }

    /// Value at a unit-norm representative.
    pub fn eval_unit(&self, z: &[Complex64]) -> f64 {
        self.eval_scaled(z, 1.0)
    }

    /// Value at any representative z, given 1/‖z‖².
    pub fn eval_scaled(&self, z: &[Complex64], inv_norm_sq: f64) -> f64 {
        let s = inv_norm_sq;
        match self.id {
            TestFunctionId::Constant => self.constant,
            TestFunctionId::Coordinate(j) => z[j].norm_sqr() * s,
            TestFunctionId::RealCross(i, j) => (z[i] * z[j].conj()).re * s,
            TestFunctionId::ImagCross(i, j) => (z[i] * z[j].conj()).im * s,
            TestFunctionId::QuarticCoordinate(j) => (z[j].norm_sqr() * s).powi(2),
        }
    }

    /// Integral against the Fubini–Study probability measure on P^k.
    pub fn fs_integral(&self) -> f64 {
        let k = self.dim as f64;
        match self.id {
            TestFunctionId::Constant => self.constant,
            TestFunctionId::Coordinate(_) => 1.0 / (k + 1.0),
            TestFunctionId::RealCross(..) | TestFunctionId::ImagCross(..) => 0.0,
            TestFunctionId::QuarticCoordinate(_) => 2.0 / ((k + 1.0) * (k + 2.0)),
        }
    }

    /// Integral against the orthogonally invariant probability on RP^k.
    pub fn real_fs_integral(&self) -> f64 {
        let k = self.dim as f64;
        match self.id {
            TestFunctionId::QuarticCoordinate(_) => 3.0 / ((k + 1.0) * (k + 3.0)),
            _ => self.fs_integral(),
        }
    }

    pub fn name(&self) -> String {
        match self.id {
            TestFunctionId::Constant => format!("const({})", self.constant),
            id => id.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{random_unitary, sample_point_fs, sample_point_real};
    use crate::rng::SeedStream;

    #[test]
    fn coordinate_weights_sum_to_one() {
        let mut rng = SeedStream::new(1).rng(0);
        for k in 1..=3 {
            let fs: Vec<TestFunction> = (0..=k).map(|j| TestFunction::coordinate(k, j)).collect();
            for _ in 0..10_000 {
                let p = sample_point_fs(k, &mut rng);
                let s: f64 = fs.iter().map(|f| f.eval(&p)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_matches_closed_forms() {
        let mut rng = SeedStream::new(2).rng(0);
        let k = 2;
        let n = 200_000;
        let pts: Vec<_> = (0..n).map(|_| sample_point_fs(k, &mut rng)).collect();
        let real: Vec<_> = (0..n).map(|_| sample_point_real(k, &mut rng)).collect();
        let mut all = TestFunction::builtin_set(k);
        all.push(TestFunction::quartic(k, 0));
        for f in &all {
            let m = pts.iter().map(|p| f.eval(p)).sum::<f64>() / n as f64;
            assert!((m - f.fs_integral()).abs() < 0.005, "{} {m}", f.name());
            let r = real.iter().map(|p| f.eval(p)).sum::<f64>() / n as f64;
            assert!((r - f.real_fs_integral()).abs() < 0.005, "{} real {r}", f.name());
        }
    }

    #[test]
    fn fs_sampling_is_unitarily_invariant() {
        let s = SeedStream::new(77);
        let k = 2;
        let n = 40_000;
        let u = random_unitary(k + 1, &mut s.rng(999));
        let mut rng = s.rng(0);
        let pts: Vec<_> = (0..n).map(|_| sample_point_fs(k, &mut rng)).collect();
        let mut rng2 = s.rng(1);
        let pts2: Vec<_> = (0..n).map(|_| sample_point_fs(k, &mut rng2)).collect();
        for f in TestFunction::builtin_set(k) {
            let a = pts.iter().map(|p| f.eval(p)).sum::<f64>() / n as f64;
            let b = pts2.iter().map(|p| f.eval(&p.transform(&u))).sum::<f64>() / n as f64;
            assert!((a - b).abs() < 4.0 / (n as f64).sqrt(), "{}", f.name());
        }
    }
}
