//! Polynomial gcd over the coefficient field.
//!
//! Dense univariate helpers (coefficients stored low degree first) and a
//! multivariate gcd by recursive primitive remainder sequences. Homogeneous
//! inputs first try a cheap coprimality certificate: restrict both to a
//! fixed integer line and take the univariate gcd there.

use super::coeff::Coefficient;
use super::sparse::{Monomial, Poly};

fn trim<C: Coefficient>(mut a: Vec<C>) -> Vec<C> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

/// Degree of a dense polynomial, None for zero.
pub fn dense_degree<C: Coefficient>(a: &[C]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

pub fn dense_monic<C: Coefficient>(a: &[C]) -> Vec<C> {
    let a = trim(a.to_vec());
    match a.last() {
        None => a,
        Some(lc) => {
            let inv = C::one() / lc.clone();
            a.into_iter().map(|c| c * inv.clone()).collect()
        }
    }
}

/// Quotient and remainder of dense division.
pub fn dense_divrem<C: Coefficient>(a: &[C], b: &[C]) -> (Vec<C>, Vec<C>) {
    let b = trim(b.to_vec());
    let db = b.len().checked_sub(1).expect("division by zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let inv = C::one() / b[db].clone();
    let mut q = vec![C::zero(); r.len() - db];
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = r[r.len() - 1].clone() * inv.clone();
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = r[shift + i].clone() - c.clone() * bi.clone();
        }
        q[shift] = c;
        r.pop();
        r = trim(r);
    }
    (q, r)
}

/// Monic gcd of two dense polynomials (zero if both are zero).
pub fn dense_gcd<C: Coefficient>(a: &[C], b: &[C]) -> Vec<C> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let (_, r) = dense_divrem(&a, &b);
        a = b;
        b = dense_monic(&r);
    }
    dense_monic(&a)
}

pub fn dense_derivative<C: Coefficient>(a: &[C]) -> Vec<C> {
    let mut out = Vec::with_capacity(a.len().saturating_sub(1));
    let mut k = C::zero();
    for (i, c) in a.iter().enumerate() {
        if i > 0 {
            out.push(c.clone() * k.clone());
        }
        k = k + C::one();
    }
    trim(out)
}

/// Square-free decomposition a = lc * prod f_i^i (Yun); returns the
/// nonconstant factors with their multiplicities.
pub fn squarefree_decomposition<C: Coefficient>(a: &[C]) -> Vec<(Vec<C>, u32)> {
    let a = dense_monic(a);
    if a.len() <= 1 {
        return Vec::new();
    }
    let da = dense_derivative(&a);
    let g = dense_gcd(&a, &da);
    let mut b = dense_divrem(&a, &g).0;
    let c = dense_divrem(&da, &g).0;
    let mut d = sub_dense(&c, &dense_derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while b.len() > 1 {
        let f = dense_gcd(&b, &d);
        b = dense_divrem(&b, &f).0;
        let c = dense_divrem(&d, &f).0;
        d = sub_dense(&c, &dense_derivative(&b));
        if f.len() > 1 {
            out.push((f, i));
        }
        i += 1;
    }
    out
}

fn sub_dense<C: Coefficient>(a: &[C], b: &[C]) -> Vec<C> {
    let n = a.len().max(b.len());
    let z = C::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z).clone() - b.get(i).unwrap_or(&z).clone()).collect())
}

fn var_degree<C: Coefficient>(p: &Poly<C>, v: usize) -> u32 {
    p.terms().keys().map(|m| m.0[v]).max().unwrap_or(0)
}

/// Coefficients of p as a polynomial in x_v (index = power of x_v).
fn coeffs_in<C: Coefficient>(p: &Poly<C>, v: usize) -> Vec<Poly<C>> {
    let n = p.nvars();
    let mut out = vec![Poly::zero(n); var_degree(p, v) as usize + 1];
    let mut buckets: Vec<Vec<(Monomial, C)>> = vec![Vec::new(); out.len()];
    for (m, c) in p.terms() {
        let mut m2 = m.clone();
        let e = m2.0[v] as usize;
        m2.0[v] = 0;
        buckets[e].push((m2, c.clone()));
    }
    for (slot, terms) in out.iter_mut().zip(buckets) {
        *slot = Poly::from_terms(n, terms);
    }
    out
}

fn content_in<C: Coefficient>(p: &Poly<C>, v: usize) -> Poly<C> {
    let mut g = Poly::zero(p.nvars());
    for c in coeffs_in(p, v) {
        if c.is_zero() {
            continue;
        }
        g = if g.is_zero() { c.monic() } else { gcd_rec(&g, &c) };
        if g.is_constant() {
            break;
        }
    }
    g
}

fn primitive_in<C: Coefficient>(p: &Poly<C>, v: usize) -> Poly<C> {
    let c = content_in(p, v);
    p.exact_div(&c).expect("content divides").monic()
}

/// Pseudo-remainder of a by b with respect to x_v.
fn prem_in<C: Coefficient>(a: &Poly<C>, b: &Poly<C>, v: usize) -> Poly<C> {
    let db = var_degree(b, v);
    let lcb = coeffs_in(b, v).pop().unwrap();
    let mut r = a.clone();
    while !r.is_zero() && var_degree(&r, v) >= db {
        let dr = var_degree(&r, v);
        let lcr = coeffs_in(&r, v).pop().unwrap();
        let shift = Monomial::var(a.nvars(), v);
        let mut xs = Monomial::one(a.nvars());
        for _ in 0..(dr - db) {
            xs = xs.mul(&shift);
        }
        let t = &lcr * &b.mul_monomial(&xs, &C::one());
        r = &(&lcb * &r) - &t;
    }
    r
}

fn gcd_rec<C: Coefficient>(a: &Poly<C>, b: &Poly<C>) -> Poly<C> {
    let n = a.nvars();
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let ma = a.monomial_content().unwrap();
    let mb = b.monomial_content().unwrap();
    let gm = ma.gcd(&mb);
    let a1 = a.div_monomial(&ma);
    let b1 = b.div_monomial(&mb);
    let unit = Poly::monomial(gm, C::one());
    if a1.is_constant() || b1.is_constant() {
        return unit;
    }
    let v = (0..n).find(|&v| var_degree(&a1, v) > 0 || var_degree(&b1, v) > 0).unwrap();
    let (da, db) = (var_degree(&a1, v), var_degree(&b1, v));
    let g = if da == 0 {
        gcd_rec(&a1, &content_in(&b1, v))
    } else if db == 0 {
        gcd_rec(&content_in(&a1, v), &b1)
    } else {
        let c = gcd_rec(&content_in(&a1, v), &content_in(&b1, v));
        let (mut p, mut q) = (primitive_in(&a1, v), primitive_in(&b1, v));
        if da < db {
            std::mem::swap(&mut p, &mut q);
        }
        loop {
            let r = prem_in(&p, &q, v);
            if r.is_zero() {
                break;
            }
            if var_degree(&r, v) == 0 {
                q = Poly::one(n);
                break;
            }
            p = q;
            q = primitive_in(&r, v);
        }
        &c * &q
    };
    (&g * &unit).monic()
}

/// Exact restriction to the affine line x = s*P + Q for fixed small integer
/// vectors P, Q, returned as a dense polynomial in s.
fn restrict_to_pencil<C: Coefficient>(p: &Poly<C>) -> Vec<C> {
    let n = p.nvars();
    let subs: Vec<Poly<C>> = (0..n)
        .map(|i| {
            let a = int_coeff::<C>((i as i64) * 7 % 11 + 1);
            let b = int_coeff::<C>(((2 * i as i64 + 3).pow(2)) % 17 - 8);
            Poly::from_terms(1, [(Monomial(vec![1]), a), (Monomial(vec![0]), b)])
        })
        .collect();
    let q = p.compose(&subs);
    let d = q.total_degree().unwrap_or(0) as usize;
    let mut vals = vec![C::zero(); d + 1];
    for (m, c) in q.terms() {
        vals[m.0[0] as usize] = c.clone();
    }
    vals
}

fn int_coeff<C: Coefficient>(k: i64) -> C {
    C::from_rational(&num_rational::BigRational::from_integer(k.into()))
}

/// Monic gcd of two polynomials in the same variables. For a zero and a
/// nonzero input the result is the monic nonzero one; gcd(0, 0) = 0.
pub fn poly_gcd<C: Coefficient>(a: &Poly<C>, b: &Poly<C>) -> Poly<C> {
    assert_eq!(a.nvars(), b.nvars());
    if let (Ok(Some(da)), Ok(Some(db))) = (a.homogeneity(), b.homogeneity()) {
        if da > 0 && db > 0 {
            let ra = restrict_to_pencil(a);
            let rb = restrict_to_pencil(b);
            // A common factor restricts to a common factor of positive degree
            // unless it drops degree on this chart; require full degree.
            if dense_degree(&ra) == Some(da as usize)
                && dense_degree(&rb) == Some(db as usize)
                && dense_gcd(&ra, &rb).len() == 1
            {
                return Poly::one(a.nvars());
            }
        }
    }
    let g = gcd_rec(a, b);
    if !g.is_zero() {
        assert!(a.exact_div(&g).is_some() && b.exact_div(&g).is_some(), "gcd must divide its inputs");
    }
    g
}

/// gcd of a list of polynomials.
pub fn poly_gcd_many<C: Coefficient>(polys: &[Poly<C>]) -> Poly<C> {
    let mut it = polys.iter();
    let mut g = match it.next() {
        Some(p) => p.monic(),
        None => return Poly::zero(0),
    };
    for p in it {
        if g.is_constant() && !g.is_zero() {
            break;
        }
        g = poly_gcd(&g, p);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::coeff::{qc_int, QComplex};
    use crate::poly::parse::{parse_affine, parse_univariate};

    fn dense(text: &str) -> Vec<QComplex> {
        let p = parse_univariate(text).unwrap();
        let mut v = vec![qc_int(0); p.total_degree().unwrap_or(0) as usize + 1];
        for (m, c) in p.terms() {
            v[m.0[0] as usize] = c.clone();
        }
        v
    }

    #[test]
    fn univariate_gcd() {
        let g = dense_gcd(&dense("(x-1)^2*(x+2)"), &dense("(x-1)*(x+3)"));
        assert_eq!(g, dense("x-1"));
        assert_eq!(dense_gcd(&dense("x^2+1"), &dense("x")), dense("1"));
    }

    #[test]
    fn squarefree_parts() {
        let f = squarefree_decomposition(&dense("(x-1)^3*(x+2)*(x^2+1)^2"));
        assert_eq!(f.len(), 3);
        assert_eq!(f[0], (dense("x+2"), 1));
        assert_eq!(f[1], (dense("x^2+1"), 2));
        assert_eq!(f[2], (dense("x-1"), 3));
    }

    #[test]
    fn multivariate_common_factor() {
        let a = parse_affine("(x0 + 2*x1 - x2)*(x0*x1 + x2^2)", 3).unwrap();
        let b = parse_affine("(x0 + 2*x1 - x2)*(x1 - 3*x2)^2", 3).unwrap();
        let g = poly_gcd(&a, &b);
        assert_eq!(g, parse_affine("x0 + 2*x1 - x2", 3).unwrap());
    }

    #[test]
    fn monomial_and_coprime_cases() {
        let a = parse_affine("x1*x2^2", 3).unwrap();
        let b = parse_affine("x0*x1*x2", 3).unwrap();
        assert_eq!(poly_gcd(&a, &b), parse_affine("x1*x2", 3).unwrap());
        let c = parse_affine("x0^2 + x1*x2", 3).unwrap();
        let d = parse_affine("x0*x1 - x2^2", 3).unwrap();
        assert!(poly_gcd(&c, &d).is_constant());
    }

    #[test]
    fn gcd_of_many_inhomogeneous() {
        let p = [
            parse_affine("(x0 - x1 + 1)*x0", 2).unwrap(),
            parse_affine("(x0 - x1 + 1)*(x1 + 5)", 2).unwrap(),
            parse_affine("(x0 - x1 + 1)^2", 2).unwrap(),
        ];
        assert_eq!(poly_gcd_many(&p), parse_affine("x0 - x1 + 1", 2).unwrap());
    }
}
