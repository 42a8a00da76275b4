//! Points of P^k, the chordal metric, invariant samplers and closed-form
//! constants.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::GeometryError;
use crate::rng::SeedStream;
use crate::stats::Estimate;

/// Chordal distance below which two points are considered equal.
pub const POINT_TOLERANCE: f64 = 1e-12;

/// A point of P^k stored as a unit vector whose first nonzero coordinate is
/// real and positive.
#[derive(Debug, Clone)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::BadDimension);
        }
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeometryError::ZeroVector);
        }
        Ok(Self::normalize(coords, norm))
    }

    pub fn from_real(coords: &[f64]) -> Result<Self, GeometryError> {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    fn normalize(mut coords: Vec<Complex64>, norm: f64) -> Self {
        let lead = coords.iter().find(|c| **c != Complex64::new(0.0, 0.0)).copied().unwrap();
        let phase = lead.conj() / lead.norm();
        let scale = phase / norm;
        for c in coords.iter_mut() {
            *c *= scale;
        }
        // The leading coordinate is real by construction; scrub rounding.
        if let Some(c) = coords.iter_mut().find(|c| c.norm() > 0.0) {
            *c = Complex64::new(c.norm(), 0.0);
        }
        ProjectivePoint { coords }
    }

    /// Projective dimension k.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Affine coordinate z0/z1 on P^1 (None at infinity).
    pub fn affine(&self) -> Option<Complex64> {
        let d = self.coords[self.coords.len() - 1];
        if d == Complex64::new(0.0, 0.0) {
            None
        } else if self.coords.len() == 2 {
            Some(self.coords[0] / d)
        } else {
            None
        }
    }

    /// The point [z : 1] of P^1.
    pub fn from_affine(z: Complex64) -> Self {
        ProjectivePoint::new(vec![z, Complex64::new(1.0, 0.0)]).unwrap()
    }

    pub fn infinity() -> Self {
        ProjectivePoint::from_real(&[1.0, 0.0]).unwrap()
    }

    /// Chordal distance sqrt(1 - |<p,q>|^2), evaluated through the wedge
    /// product so that nearby points keep full relative precision.
    pub fn chordal(&self, other: &ProjectivePoint) -> f64 {
        chordal_distance(&self.coords, &other.coords)
    }

    pub fn same_point(&self, other: &ProjectivePoint) -> bool {
        self.coords.len() == other.coords.len() && self.chordal(other) < POINT_TOLERANCE
    }

    /// True when the normalized representative is real.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coords.iter().all(|c| c.im.abs() <= tol)
    }

    /// Chordal distance to RP^k: the smallest distance to a real point.
    pub fn distance_to_real_locus(&self) -> f64 {
        // For a unit vector z = x + i y the closest real line is spanned by
        // the top singular vector of [x y]; the distance is the smaller
        // singular value.
        let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
        for c in &self.coords {
            xx += c.re * c.re;
            yy += c.im * c.im;
            xy += c.re * c.im;
        }
        let tr = xx + yy;
        let det = (xx * yy - xy * xy).max(0.0);
        let small = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
        small.max(0.0).sqrt()
    }

    /// Apply a unitary (or any invertible) matrix given by rows.
    pub fn transform(&self, matrix: &[Vec<Complex64>]) -> ProjectivePoint {
        let v: Vec<Complex64> = matrix
            .iter()
            .map(|row| row.iter().zip(&self.coords).map(|(a, b)| a * b).sum())
            .collect();
        ProjectivePoint::new(v).expect("invertible transform")
    }
}

impl PartialEq for ProjectivePoint {
    fn eq(&self, other: &Self) -> bool {
        self.same_point(other)
    }
}

pub(crate) fn chordal_distance(p: &[Complex64], q: &[Complex64]) -> f64 {
    let np: f64 = p.iter().map(|c| c.norm_sqr()).sum();
    let nq: f64 = q.iter().map(|c| c.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            wedge += (p[i] * q[j] - p[j] * q[i]).norm_sqr();
        }
    }
    (wedge / (np * nq)).sqrt().min(1.0)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Fubini–Study distributed point of P^k.
pub fn sample_point_fs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ProjectivePoint {
    assert!(k >= 1, "projective dimension must be at least 1");
    loop {
        let v: Vec<Complex64> = (0..=k).map(|_| complex_gaussian(rng)).collect();
        if let Ok(p) = ProjectivePoint::new(v) {
            return p;
        }
    }
}

/// Point of RP^k distributed by the orthogonally invariant measure.
pub fn sample_point_real<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ProjectivePoint {
    assert!(k >= 1, "projective dimension must be at least 1");
    loop {
        let v: Vec<f64> = (0..=k).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(p) = ProjectivePoint::from_real(&v) {
            return p;
        }
    }
}

/// Haar-distributed unitary matrix of size n (rows).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    // Gram–Schmidt on a complex Ginibre matrix is Haar distributed.
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        for r in &rows {
            let dot: Complex64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ri) in v.iter_mut().zip(r) {
                *vi -= dot * ri;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            rows.push(v);
        }
    }
    rows
}

/// Conjugate transpose of a square matrix.
pub fn adjoint(m: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i].conj()).collect()).collect()
}

/// Harmonic number H_k.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|n| 1.0 / n as f64).sum()
}

/// Exact value of the sphere integral of log|z_1| over S^{2k+1}: -H_k / 2.
pub fn sphere_log_modulus_exact(k: usize) -> f64 {
    -0.5 * harmonic(k)
}

const SPHERE_CHUNK: usize = 16_384;

/// Monte Carlo estimate of the integral of log|z_1| against the invariant
/// probability on the unit sphere of C^{k+1}.
pub fn sphere_log_modulus_integral(k: usize, n_samples: usize, seed: SeedStream) -> Estimate {
    assert!(k >= 1);
    let chunks = n_samples.div_ceil(SPHERE_CHUNK);
    let partial: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.rng(c as u64);
            let count = SPHERE_CHUNK.min(n_samples - c * SPHERE_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let v: Vec<Complex64> = (0..=k).map(|_| complex_gaussian(&mut rng)).collect();
                let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                let x = 0.5 * (v[1].norm_sqr() / norm2).ln();
                s += x;
                s2 += x * x;
            }
            (s, s2, count)
        })
        .collect();
    let (mut s, mut s2, mut n) = (0.0, 0.0, 0usize);
    for (a, b, c) in partial {
        s += a;
        s2 += b;
        n += c;
    }
    Estimate::from_sums(s, s2, n)
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 60;
        (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Normalization constant c_{k,l} of the product metric on (P^k)^l, defined
/// by c^{-kl} = C(kl,k) C(kl-k,k) ... C(2k,k).
pub fn multiproj_normalization(k: u64, l: u64) -> f64 {
    assert!(k >= 1 && l >= 1);
    let mut product = BigUint::one();
    for j in 2..=l {
        product *= binomial(j * k, k);
    }
    (-ln_biguint(&product) / (k * l) as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalization_fixes_phase_and_norm() {
        let p = ProjectivePoint::new(vec![c(0.0, 2.0), c(1.0, 1.0)]).unwrap();
        assert!((p.coords()[0].im).abs() < 1e-15);
        assert!(p.coords()[0].re > 0.0);
        let n: f64 = p.coords().iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
        let q = ProjectivePoint::new(vec![c(0.0, 6.0), c(3.0, 3.0)]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(
            ProjectivePoint::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap_err(),
            GeometryError::ZeroVector
        );
    }

    #[test]
    fn chordal_extremes() {
        let a = ProjectivePoint::from_real(&[1.0, 0.0]).unwrap();
        let b = ProjectivePoint::from_real(&[0.0, 1.0]).unwrap();
        assert!((a.chordal(&b) - 1.0).abs() < 1e-15);
        assert_eq!(a.chordal(&a), 0.0);
        let near = ProjectivePoint::new(vec![c(1.0, 0.0), c(1e-13, 0.0)]).unwrap();
        assert!(a.chordal(&near) > 5e-14 && a.chordal(&near) < 2e-13);
    }

    #[test]
    fn seeded_sampler_is_deterministic() {
        let s = SeedStream::new(42);
        let p = sample_point_fs(3, &mut s.rng(0));
        let q = sample_point_fs(3, &mut s.rng(0));
        assert_eq!(p.coords(), q.coords());
    }

    #[test]
    fn real_samples_lie_on_real_locus() {
        let s = SeedStream::new(3);
        let mut rng = s.rng(0);
        for k in 1..4 {
            for _ in 0..200 {
                let p = sample_point_real(k, &mut rng);
                assert!(p.is_real(0.0));
                assert!(p.distance_to_real_locus() < 1e-15);
            }
        }
        let p = ProjectivePoint::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!((p.distance_to_real_locus() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fs_coordinate_means() {
        let s = SeedStream::new(11);
        for (k, expect) in [(1usize, 0.5), (2, 1.0 / 3.0)] {
            let n = 1_000_000;
            let mut rng = s.child(k as u64).rng(0);
            let mut acc = 0.0;
            for _ in 0..n {
                let p = sample_point_fs(k, &mut rng);
                acc += p.coords()[0].norm_sqr();
            }
            assert!((acc / n as f64 - expect).abs() < 0.002, "k={k}");
        }
    }

    #[test]
    fn real_coordinate_mean_k2() {
        let mut rng = SeedStream::new(12).rng(0);
        let n = 1_000_000;
        let acc: f64 = (0..n).map(|_| sample_point_real(2, &mut rng).coords()[0].norm_sqr()).sum();
        assert!((acc / n as f64 - 1.0 / 3.0).abs() < 0.002);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = SeedStream::new(5).rng(0);
        let u = random_unitary(4, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let dot: Complex64 = (0..4).map(|t| u[i][t].conj() * u[j][t]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_integral_within_four_stderr() {
        for k in 1..=3 {
            let e = sphere_log_modulus_integral(k, 200_000, SeedStream::new(9).child(k as u64));
            let exact = sphere_log_modulus_exact(k);
            assert!((e.mean - exact).abs() < 4.0 * e.stderr, "k={k} {e:?} vs {exact}");
        }
        assert_eq!(sphere_log_modulus_exact(1), -0.5);
        assert_eq!(sphere_log_modulus_exact(2), -0.75);
        assert!((sphere_log_modulus_exact(3) + 11.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn multiproj_constants() {
        assert_eq!(multiproj_normalization(1, 1), 1.0);
        assert!((multiproj_normalization(1, 2) - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!((multiproj_normalization(2, 2) - 6f64.powf(-0.25)).abs() < 1e-12);
        for k in 1..=8 {
            for l in 1..=8 {
                assert!(multiproj_normalization(k, l) <= 1.0);
            }
        }
    }
}
