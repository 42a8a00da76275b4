use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Gaussian rational: exact complex coefficient with big-integer parts.
pub type QComplex = Complex<BigRational>;

/// Scalar field the polynomial engine works over.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn to_c64(&self) -> Complex64;
    fn from_rational(q: &BigRational) -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn imaginary_unit() -> Self;
    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
    /// The exact value, for exact coefficient types.
    fn to_exact(&self) -> Option<QComplex>;
}

fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

impl Coefficient for QComplex {
    const EXACT: bool = true;

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn from_rational(q: &BigRational) -> Self {
        Complex::new(q.clone(), BigRational::zero())
    }

    fn from_c64(z: Complex64) -> Self {
        Complex::new(rational_from_f64(z.re), rational_from_f64(z.im))
    }

    fn imaginary_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rat(q: &BigRational) -> String {
            if q.is_integer() {
                q.numer().to_string()
            } else {
                format!("{}/{}", q.numer(), q.denom())
            }
        }
        if self.im.is_zero() {
            write!(f, "{}", rat(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}*i", rat(&self.im))
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(f, "({}{}{}*i)", rat(&self.re), sign, rat(&self.im.abs()))
        }
    }

    fn to_exact(&self) -> Option<QComplex> {
        Some(self.clone())
    }
}

impl Coefficient for Complex64 {
    const EXACT: bool = false;

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_c64(z: Complex64) -> Self {
        z
    }

    fn imaginary_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn fmt_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.re == 0.0 {
            write!(f, "{}*i", self.im)
        } else {
            let sign = if self.im < 0.0 { "-" } else { "+" };
            write!(f, "({}{}{}*i)", self.re, sign, self.im.abs())
        }
    }

    fn to_exact(&self) -> Option<QComplex> {
        None
    }
}

pub fn qc_int(n: i64) -> QComplex {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

pub fn qc(re: i64, im: i64) -> QComplex {
    Complex::new(
        BigRational::from_integer(BigInt::from(re)),
        BigRational::from_integer(BigInt::from(im)),
    )
}

/// Exact rational value of a decimal or integer literal.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        let q = parse_decimal("0.3").unwrap();
        assert_eq!(q, BigRational::new(BigInt::from(3), BigInt::from(10)));
        assert_eq!(parse_decimal("12").unwrap(), BigRational::from_integer(BigInt::from(12)));
        assert!(parse_decimal(".").is_none());
        assert!(parse_decimal("1.2.3").is_none());
    }

    #[test]
    fn float_round_trip_is_exact() {
        let z = Complex64::new(-1.4, 0.3);
        assert_eq!(QComplex::from_c64(z).to_c64(), z);
    }
}
