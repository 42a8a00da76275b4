use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::coeff::{Coefficient, QComplex};
use super::sparse::{Monomial, Poly};
use crate::error::PolyError;
use crate::projective::ProjectivePoint;

/// Homogeneous polynomial of fixed degree in `nvars >= 2` variables.
///
/// The zero polynomial is allowed and keeps its nominal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly<C> {
    poly: Poly<C>,
    degree: u32,
}

pub type ExactPoly = HomogeneousPoly<QComplex>;
pub type FloatPoly = HomogeneousPoly<Complex64>;

impl<C: Coefficient> HomogeneousPoly<C> {
    pub fn new(poly: Poly<C>, degree: u32) -> Result<Self, PolyError> {
        if poly.nvars() < 2 {
            return Err(PolyError::Invalid("homogeneous polynomials need at least two variables".into()));
        }
        match poly.homogeneity() {
            Ok(None) => {}
            Ok(Some(d)) if d == degree => {}
            Ok(Some(d)) => return Err(PolyError::Inhomogeneous { first: d, second: degree }),
            Err((first, second)) => return Err(PolyError::Inhomogeneous { first, second }),
        }
        Ok(HomogeneousPoly { poly, degree })
    }

    /// Homogeneous polynomial from a nonzero polynomial, degree inferred.
    pub fn from_poly(poly: Poly<C>) -> Result<Self, PolyError> {
        match poly.homogeneity() {
            Ok(Some(d)) => Self::new(poly, d),
            Ok(None) => Err(PolyError::ZeroPolynomial),
            Err((first, second)) => Err(PolyError::Inhomogeneous { first, second }),
        }
    }

    pub fn zero(nvars: usize, degree: u32) -> Self {
        HomogeneousPoly { poly: Poly::zero(nvars), degree }
    }

    /// Binary form sum_j coeffs[j] x0^j x1^(n-j).
    pub fn from_binary_coeffs(coeffs: &[C]) -> Self {
        let n = coeffs.len() as u32 - 1;
        let poly = Poly::from_terms(
            2,
            coeffs.iter().enumerate().map(|(j, c)| (Monomial(vec![j as u32, n - j as u32]), c.clone())),
        );
        HomogeneousPoly { poly, degree: n }
    }

    pub fn poly(&self) -> &Poly<C> {
        &self.poly
    }

    pub fn into_poly(self) -> Poly<C> {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn to_float(&self) -> FloatPoly {
        HomogeneousPoly { poly: self.poly.to_float(), degree: self.degree }
    }

    pub fn mul(&self, other: &Self) -> Self {
        HomogeneousPoly { poly: &self.poly * &other.poly, degree: self.degree + other.degree }
    }

    pub fn scale(&self, c: &C) -> Self {
        HomogeneousPoly { poly: self.poly.scale(c), degree: self.degree }
    }

    /// Dense coefficients of a binary form: entry j multiplies x0^j x1^(n-j).
    pub fn binary_coeffs(&self) -> Vec<C> {
        assert_eq!(self.nvars(), 2, "binary form expected");
        let n = self.degree;
        (0..=n).map(|j| self.poly.coeff(&Monomial(vec![j, n - j]))).collect()
    }

    fn check_point(&self, p: &ProjectivePoint) -> Result<(), PolyError> {
        if p.dim() + 1 != self.nvars() {
            return Err(PolyError::DimensionMismatch { expected: self.nvars(), found: p.dim() + 1 });
        }
        Ok(())
    }

    /// Value at the stored unit representative of `p`.
    pub fn evaluate(&self, p: &ProjectivePoint) -> Result<Complex64, PolyError> {
        self.check_point(p)?;
        Ok(self.poly.eval_c64(p.coords()))
    }

    /// log|p(z)| - n log‖z‖, independent of the representative.
    pub fn log_scaled(&self, p: &ProjectivePoint) -> Result<f64, PolyError> {
        self.check_point(p)?;
        Ok(self.log_scaled_coords(p.coords()))
    }

    /// Scale-invariant log modulus at an arbitrary representative.
    pub fn log_scaled_coords(&self, z: &[Complex64]) -> f64 {
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let unit: Vec<Complex64> = z.iter().map(|c| c / norm).collect();
        self.poly.eval_c64(&unit).norm().ln()
    }
}

impl FloatPoly {
    /// Gaussian section in the invariant orthonormal monomial basis: the
    /// coefficient of z^α is sqrt(multinomial(n; α)) times an independent
    /// standard (complex or real) Gaussian.
    pub fn random_kostlan<R: Rng + ?Sized>(nvars: usize, degree: u32, real: bool, rng: &mut R) -> Self {
        let mut terms = Vec::new();
        for alpha in monomials_of_degree(nvars, degree) {
            let w = multinomial_sqrt(degree, &alpha.0);
            let g = if real {
                Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0)
            } else {
                Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                    * std::f64::consts::FRAC_1_SQRT_2
            };
            terms.push((alpha, g * w));
        }
        HomogeneousPoly { poly: Poly::from_terms(nvars, terms), degree }
    }
}

/// All exponent vectors of the given total degree, in ascending lex order.
pub fn monomials_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
    fn rec(prefix: &mut Vec<u32>, left: u32, slots: usize, out: &mut Vec<Monomial>) {
        if slots == 1 {
            prefix.push(left);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(prefix, left - e, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), degree, nvars, &mut out);
    out
}

/// sqrt(n! / prod α_i!) evaluated through logarithms.
pub fn multinomial_sqrt(n: u32, alpha: &[u32]) -> f64 {
    let lf = |m: u32| -> f64 { (1..=m).map(|i| (i as f64).ln()).sum() };
    (0.5 * (lf(n) - alpha.iter().map(|&a| lf(a)).sum::<f64>())).exp()
}

impl<C: Coefficient> fmt::Display for HomogeneousPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}
