//! Sparse multivariate polynomials over a [`Coefficient`] field.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::coeff::Coefficient;

/// Exponent vector; ordered lexicographically with x0 most significant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// other / self, assuming divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::var(nvars, i), C::one())
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(nvars: usize, iter: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in iter {
            assert_eq!(m.0.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, C> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Lexicographically largest term.
    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Ok(None) for the zero polynomial, Ok(Some(d)) when homogeneous,
    /// Err((lo, hi)) with two distinct term degrees otherwise.
    pub fn homogeneity(&self) -> Result<Option<u32>, (u32, u32)> {
        let mut degs = self.terms.keys().map(|m| m.degree());
        let first = match degs.next() {
            None => return Ok(None),
            Some(d) => d,
        };
        let (mut lo, mut hi) = (first, first);
        for d in degs {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo == hi {
            Ok(Some(lo))
        } else {
            Err((lo, hi))
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &C) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.mul(m), a.clone() * c.clone()))
                .filter(|(_, a)| !a.is_zero())
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Substitute `subs[i]` for variable i.
    pub fn compose(&self, subs: &[Poly<C>]) -> Poly<C> {
        assert_eq!(subs.len(), self.nvars, "one substitution per variable");
        let out_vars = subs.first().map(|s| s.nvars).unwrap_or(0);
        let mut max_exp = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (i, e) in m.0.iter().enumerate() {
                max_exp[i] = max_exp[i].max(*e);
            }
        }
        let powers: Vec<Vec<Poly<C>>> = subs
            .iter()
            .zip(&max_exp)
            .map(|(s, &top)| {
                let mut v = vec![Poly::one(out_vars)];
                for e in 1..=top {
                    let next = &v[(e - 1) as usize] * s;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = Poly::zero(out_vars);
        for (m, c) in &self.terms {
            let mut term = Poly::constant(out_vars, c.clone());
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    term = &term * &powers[i][*e as usize];
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[var] -= 1;
                let mut factor = C::zero();
                for _ in 0..e {
                    factor = factor + C::one();
                }
                out.add_term(m2, c.clone() * factor);
            }
        }
        out
    }

    pub fn map_coeffs<D: Coefficient, F: Fn(&C) -> D>(&self, f: F) -> Poly<D> {
        Poly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn to_float(&self) -> Poly<Complex64> {
        self.map_coeffs(|c| c.to_c64())
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).sum()
    }

    pub fn eval_c64(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for (xi, e) in x.iter().zip(&m.0) {
                if *e > 0 {
                    t *= xi.powu(*e);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, x: &[C]) -> C {
        assert_eq!(x.len(), self.nvars);
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, e) in x.iter().zip(&m.0) {
                for _ in 0..*e {
                    t = t * xi.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Option<Monomial> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |g, m| g.gcd(m)))
    }

    /// Divide every term by a monomial that divides all of them.
    pub fn div_monomial(&self, m: &Monomial) -> Poly<C> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (m.quotient_of(k), c.clone())).collect(),
        }
    }

    /// Make the leading coefficient one.
    pub fn monic(&self) -> Poly<C> {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = C::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    /// Exact division; None when `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Poly<C>) -> Option<Poly<C>> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let (lm, lc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((m, c)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient_of(&m);
            let qc = c / lc.clone();
            rem = &rem - &divisor.mul_monomial(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }
}

impl<C: Coefficient> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coefficient> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coefficient> Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl<C: Coefficient> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(v, e)| if *e == 1 { format!("x{v}") } else { format!("x{v}^{e}") })
                .collect();
            if vars.is_empty() {
                c.fmt_coeff(f)?;
            } else if *c == C::one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                c.fmt_coeff(f)?;
                write!(f, "*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::coeff::{qc_int, QComplex};
    use super::*;

    fn x(i: usize) -> Poly<QComplex> {
        Poly::var(3, i)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let p = &x(0) + &x(1);
        let sq = &p * &p;
        assert_eq!(sq.num_terms(), 3);
        let diff = &sq - &sq;
        assert!(diff.is_zero());
        assert_eq!(p.pow(3).num_terms(), 4);
    }

    #[test]
    fn exact_division_detects_non_divisors() {
        let a = &x(0) + &x(1);
        let b = &x(0) - &x(2);
        let prod = &a * &b;
        assert_eq!(prod.exact_div(&a).unwrap(), b);
        assert!(prod.exact_div(&(&x(1) + &x(2))).is_none());
    }

    #[test]
    fn composition_substitutes() {
        // p = x0*x1 with x0 -> x1 + x2, x1 -> x1 - x2
        let p = &x(0) * &x(1);
        let q = p.compose(&[&x(1) + &x(2), &x(1) - &x(2), x(2)]);
        let expect = &(&x(1) * &x(1)) - &(&x(2) * &x(2));
        assert_eq!(q, expect);
    }

    #[test]
    fn derivative_of_power() {
        let p = x(0).pow(3).scale(&qc_int(2));
        assert_eq!(p.derivative(0), x(0).pow(2).scale(&qc_int(6)));
        assert!(p.derivative(1).is_zero());
    }
}
