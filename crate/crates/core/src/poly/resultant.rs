//! Resultants and common zeros of two forms in three variables.
//!
//! Common zeros in P^2 are found by eliminating one coordinate in a random
//! frame: the resultant with respect to the last frame coordinate is a
//! binary form of degree n_p*n_q whose roots are the projections of the
//! intersection points. Each projection is lifted back by solving the
//! lower-degree equation on the fibre and keeping the root where the other
//! equation vanishes, then polished by Newton's method in the original
//! coordinates. Exact inputs use an integer frame and an exact resultant, so
//! intersection multiplicities are exact; floating inputs use a unitary
//! frame and clustering.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;

use super::coeff::{Coefficient, QComplex};
use super::gcd::poly_gcd;
use super::homogeneous::HomogeneousPoly;
use super::roots::{dense_roots, univariate_roots, Root, RootSet, CLUSTER_RADIUS};
use super::sparse::{Monomial, Poly};
use crate::error::PolyError;
use crate::projective::{random_unitary, ProjectivePoint};
use crate::rng::SeedStream;

/// Frames tried before giving up.
pub const FRAME_RETRIES: u64 = 3;

/// Residual max(|p|, |q|)/scale required of every returned point.
pub const COMMON_ZERO_TOLERANCE: f64 = 1e-6;

const DEFAULT_FRAME_SEED: u64 = 0x5eed_f4a3;

/// Coefficients of `p` as a polynomial in variable `var`, index = power.
fn coefficients_in<C: Coefficient>(p: &Poly<C>, var: usize) -> Vec<Poly<C>> {
    let n = p.nvars();
    let top = p.terms().keys().map(|m| m.0[var]).max().unwrap_or(0) as usize;
    let mut buckets: Vec<Vec<(Monomial, C)>> = vec![Vec::new(); top + 1];
    for (m, c) in p.terms() {
        let mut m2 = m.clone();
        let e = m2.0[var] as usize;
        m2.0[var] = 0;
        buckets[e].push((m2, c.clone()));
    }
    buckets.into_iter().map(|t| Poly::from_terms(n, t)).collect()
}

/// Sylvester matrix of a (formal degree m) and b (formal degree n); entries
/// supplied by index of power.
pub(crate) fn sylvester<T: Clone>(a: &[T], b: &[T], zero: T) -> Vec<Vec<T>> {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![zero.clone(); size];
        for (j, c) in a.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![zero.clone(); size];
        for (j, c) in b.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant of two polynomials with respect to `var`, using the formal
/// degrees `deg_a`, `deg_b` in that variable. Fraction-free elimination
/// (Bareiss) over the polynomial ring in the remaining variables.
pub fn resultant(p: &Poly<QComplex>, q: &Poly<QComplex>, var: usize, deg_a: usize, deg_b: usize) -> Poly<QComplex> {
    let n = p.nvars();
    let mut a = coefficients_in(p, var);
    let mut b = coefficients_in(q, var);
    assert!(a.len() <= deg_a + 1 && b.len() <= deg_b + 1, "formal degree below actual degree");
    a.resize(deg_a + 1, Poly::zero(n));
    b.resize(deg_b + 1, Poly::zero(n));
    if deg_a + deg_b == 0 {
        return Poly::one(n);
    }
    let mut m = sylvester(&a, &b, Poly::zero(n));
    let size = m.len();
    let mut sign = false;
    let mut prev = Poly::one(n);
    for k in 0..size {
        let Some(piv) = (k..size).find(|&r| !m[r][k].is_zero()) else {
            return Poly::zero(n);
        };
        if piv != k {
            m.swap(piv, k);
            sign = !sign;
        }
        for i in (k + 1)..size {
            for j in (k + 1)..size {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = Poly::zero(n);
        }
        prev = m[k][k].clone();
    }
    let det = m[size - 1][size - 1].clone();
    if sign {
        -&det
    } else {
        det
    }
}

/// Determinant as (mantissa, log-scale): det = mantissa * exp(log_scale).
pub(crate) fn det_scaled(mut m: Vec<Vec<Complex64>>) -> (Complex64, f64) {
    let n = m.len();
    let mut mant = Complex64::new(1.0, 0.0);
    let mut log_scale = 0.0;
    for k in 0..n {
        let piv = (k..n).max_by(|&a, &b| m[a][k].norm().total_cmp(&m[b][k].norm())).unwrap();
        let pv = m[piv][k];
        if pv.norm() == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        if piv != k {
            m.swap(piv, k);
            mant = -mant;
        }
        let r = pv.norm();
        log_scale += r.ln();
        mant *= pv / r;
        for i in (k + 1)..n {
            let f = m[i][k] / pv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in (k + 1)..n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    (mant, log_scale)
}

fn det_exact(mut m: Vec<Vec<QComplex>>) -> QComplex {
    let n = m.len();
    let mut det = QComplex::one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return QComplex::zero();
        };
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        let pv = m[k][k].clone();
        det *= pv.clone();
        for i in (k + 1)..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone() / pv.clone();
            for j in (k + 1)..n {
                let t = m[k][j].clone() * f.clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
    }
    det
}

/// Coefficients (low power first) of the interpolating polynomial through
/// (x_i, y_i), exact.
fn interpolate_exact(xs: &[QComplex], ys: &[QComplex]) -> Vec<QComplex> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (dd[i].clone() - dd[i - 1].clone()) / (xs[i].clone() - xs[i - j].clone());
        }
    }
    // Horner on the Newton form.
    let mut coeffs = vec![QComplex::zero(); n];
    for i in (0..n).rev() {
        // coeffs = coeffs * (x - xs[i]) + dd[i]
        let mut next = vec![QComplex::zero(); n];
        for k in 0..n {
            if coeffs[k].is_zero() {
                continue;
            }
            if k + 1 < n {
                next[k + 1] = next[k + 1].clone() + coeffs[k].clone();
            }
            next[k] = next[k].clone() - coeffs[k].clone() * xs[i].clone();
        }
        next[0] = next[0].clone() + dd[i].clone();
        coeffs = next;
    }
    coeffs
}

struct Frame {
    /// x = M y, rows of M.
    matrix: Vec<Vec<Complex64>>,
}

impl Frame {
    fn to_original(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.matrix.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }
}

fn linear_subs<C: Coefficient>(matrix: &[Vec<C>]) -> Vec<Poly<C>> {
    matrix
        .iter()
        .map(|row| Poly::from_terms(3, row.iter().enumerate().map(|(j, c)| (Monomial::var(3, j), c.clone()))))
        .collect()
}

fn coeff_norm(p: &Poly<Complex64>) -> f64 {
    p.terms().values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized residual of a common zero.
pub fn common_zero_residual(p: &Poly<Complex64>, q: &Poly<Complex64>, x: &ProjectivePoint) -> f64 {
    let rp = p.eval_c64(x.coords()).norm() / coeff_norm(p);
    let rq = q.eval_c64(x.coords()).norm() / coeff_norm(q);
    rp.max(rq)
}

/// Newton refinement of a common zero on the affine chart of its largest
/// coordinate; steps are kept only while the residual decreases.
fn newton_refine(p: &Poly<Complex64>, q: &Poly<Complex64>, grads: &[[Poly<Complex64>; 3]; 2], x: ProjectivePoint) -> ProjectivePoint {
    let mut best = x;
    let mut best_res = common_zero_residual(p, q, &best);
    for _ in 0..8 {
        if best_res < 1e-15 {
            break;
        }
        let z = best.coords();
        let c = (0..3).max_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm())).unwrap();
        let v: Vec<Complex64> = z.iter().map(|w| w / z[c]).collect();
        let free: Vec<usize> = (0..3).filter(|&i| i != c).collect();
        let f = [p.eval_c64(&v), q.eval_c64(&v)];
        let mut jac = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, g) in grads.iter().enumerate() {
            for (col, &i) in free.iter().enumerate() {
                jac[r][col] = g[i].eval_c64(&v);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let d0 = (f[0] * jac[1][1] - f[1] * jac[0][1]) / det;
        let d1 = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
        let mut w = v.clone();
        w[free[0]] -= d0;
        w[free[1]] -= d1;
        let Ok(cand) = ProjectivePoint::new(w) else { break };
        let res = common_zero_residual(p, q, &cand);
        if res < best_res {
            best = cand;
            best_res = res;
        } else {
            break;
        }
    }
    best
}

enum Attempt {
    Done(Vec<Root>),
    Retry(String),
}

/// Lift the projections [u0:u1] (roots of the resultant) to common zeros.
#[allow(clippy::too_many_arguments)]
fn lift(
    frame: &Frame,
    pt: &Poly<Complex64>,
    qt: &Poly<Complex64>,
    projections: &RootSet,
    p: &Poly<Complex64>,
    q: &Poly<Complex64>,
    grads: &[[Poly<Complex64>; 3]; 2],
) -> Attempt {
    // Generate fibre candidates from the lower-degree equation.
    let (gen, check) = if pt.total_degree() <= qt.total_degree() { (pt, qt) } else { (qt, pt) };
    let gen_coeffs = coefficients_in(gen, 2);
    let check_norm = coeff_norm(check);
    let mut out: Vec<Root> = Vec::new();
    for r in &projections.roots {
        let u = r.point.coords();
        let a: Vec<Complex64> = gen_coeffs.iter().map(|c| c.eval_c64(&[u[0], u[1], Complex64::new(1.0, 0.0)])).collect();
        let top = a.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
        if top + 1 < a.len() {
            return Attempt::Retry("fibre equation drops degree in this frame".into());
        }
        let low = a.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
        let mut cands: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); low.min(1)];
        cands.extend(dense_roots(&a[low..]));
        let mut scored: Vec<(f64, ProjectivePoint)> = cands
            .into_iter()
            .filter_map(|y2| {
                let y = [u[0], u[1], y2];
                let x = ProjectivePoint::new(frame.to_original(&y)).ok()?;
                let yn = ProjectivePoint::new(y.to_vec()).ok()?;
                let res = check.eval_c64(yn.coords()).norm() / check_norm;
                Some((res, x))
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some((best_res, best)) = scored.first().cloned() else {
            return Attempt::Retry("no fibre candidate".into());
        };
        if let Some((second_res, second)) = scored.get(1) {
            if best_res < COMMON_ZERO_TOLERANCE
                && *second_res < COMMON_ZERO_TOLERANCE
                && second.chordal(&best) > CLUSTER_RADIUS
            {
                return Attempt::Retry("two common zeros share a projection".into());
            }
        }
        let x = newton_refine(p, q, grads, best);
        if common_zero_residual(p, q, &x) >= COMMON_ZERO_TOLERANCE {
            return Attempt::Retry(format!("lifted point has residual {:.2e}", common_zero_residual(p, q, &x)));
        }
        match out.iter_mut().find(|o| o.point.chordal(&x) < CLUSTER_RADIUS) {
            Some(o) => o.multiplicity += r.multiplicity,
            None => out.push(Root { point: x, multiplicity: r.multiplicity }),
        }
    }
    Attempt::Done(out)
}

fn gradients(p: &Poly<Complex64>) -> [Poly<Complex64>; 3] {
    [p.derivative(0), p.derivative(1), p.derivative(2)]
}

fn attempt_float(p: &Poly<Complex64>, q: &Poly<Complex64>, np: usize, nq: usize, seed: SeedStream, attempt: u64) -> Result<Attempt, PolyError> {
    let mut rng = seed.rng(attempt);
    let u = random_unitary(3, &mut rng);
    let frame = Frame { matrix: u.clone() };
    let subs = linear_subs(&u);
    let pt = p.compose(&subs);
    let qt = q.compose(&subs);
    let a = coefficients_in(&pt, 2);
    let b = coefficients_in(&qt, 2);
    if a.len() != np + 1 || b.len() != nq + 1 {
        return Ok(Attempt::Retry("frame is not generic".into()));
    }
    let total = np * nq;
    let len = total + 1;
    let mut dets = Vec::with_capacity(len);
    let mut hadamard_ratio: f64 = 0.0;
    for j in 0..len {
        let s = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / len as f64);
        let at = [s, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let av: Vec<Complex64> = a.iter().map(|c| c.eval_c64(&at)).collect();
        let bv: Vec<Complex64> = b.iter().map(|c| c.eval_c64(&at)).collect();
        let m = sylvester(&av, &bv, Complex64::new(0.0, 0.0));
        let had: f64 = m.iter().map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().ln()).sum();
        let (mant, ls) = det_scaled(m);
        if mant.norm() > 0.0 {
            hadamard_ratio = hadamard_ratio.max((ls - had).exp());
        }
        dets.push((mant, ls));
    }
    if hadamard_ratio < 1e-11 {
        return Err(PolyError::CommonFactor);
    }
    let top = dets.iter().filter(|d| d.0.norm() > 0.0).map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<Complex64> = dets.iter().map(|(m, l)| if m.norm() > 0.0 { m * (l - top).exp() } else { *m }).collect();
    let coeffs: Vec<Complex64> = (0..len)
        .map(|e| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, -std::f64::consts::TAU * ((e * j) % len) as f64 / len as f64);
            }
            acc / len as f64
        })
        .collect();
    let r = HomogeneousPoly::from_binary_coeffs(&coeffs);
    let projections = univariate_roots(&r)?;
    let grads = [gradients(p), gradients(q)];
    Ok(lift(&frame, &pt, &qt, &projections, p, q, &grads))
}

fn attempt_exact(p: &Poly<QComplex>, q: &Poly<QComplex>, np: usize, nq: usize, seed: SeedStream, attempt: u64) -> Result<Attempt, PolyError> {
    let mut rng = seed.rng(attempt);
    let int = |k: i64| QComplex::new(num_rational::BigRational::from_integer(k.into()), Zero::zero());
    let matrix: Vec<Vec<QComplex>> = loop {
        let m: Vec<Vec<QComplex>> = (0..3).map(|_| (0..3).map(|_| int(rng.gen_range(-4..=4))).collect()).collect();
        if !det_exact(m.clone()).is_zero() {
            break m;
        }
    };
    let subs = linear_subs(&matrix);
    let pt = p.compose(&subs);
    let qt = q.compose(&subs);
    let a = coefficients_in(&pt, 2);
    let b = coefficients_in(&qt, 2);
    if a.len() != np + 1 || b.len() != nq + 1 {
        return Ok(Attempt::Retry("frame is not generic".into()));
    }
    let total = np * nq;
    let xs: Vec<QComplex> = (0..=total as i64).map(int).collect();
    let ys: Vec<QComplex> = xs
        .iter()
        .map(|s| {
            let at = [s.clone(), QComplex::one(), QComplex::zero()];
            let av: Vec<QComplex> = a.iter().map(|c| c.eval(&at)).collect();
            let bv: Vec<QComplex> = b.iter().map(|c| c.eval(&at)).collect();
            det_exact(sylvester(&av, &bv, QComplex::zero()))
        })
        .collect();
    let coeffs = interpolate_exact(&xs, &ys);
    if coeffs.iter().all(|c| c.is_zero()) {
        return Err(PolyError::CommonFactor);
    }
    let r = HomogeneousPoly::from_binary_coeffs(&coeffs);
    let projections = univariate_roots(&r)?;
    let frame = Frame { matrix: matrix.iter().map(|row| row.iter().map(|c| c.to_c64()).collect()).collect() };
    let (pf, qf) = (p.to_float(), q.to_float());
    let grads = [gradients(&pf), gradients(&qf)];
    Ok(lift(&frame, &pt.to_float(), &qt.to_float(), &projections, &pf, &qf, &grads))
}

/// Common zeros of two coprime forms on P^2 with intersection
/// multiplicities; the multiplicities sum to deg p * deg q.
pub fn bivariate_common_zeros<C: Coefficient>(p: &HomogeneousPoly<C>, q: &HomogeneousPoly<C>) -> Result<RootSet, PolyError> {
    bivariate_common_zeros_seeded(p, q, SeedStream::new(DEFAULT_FRAME_SEED))
}

/// As [`bivariate_common_zeros`] with an explicit stream for the random frames.
pub fn bivariate_common_zeros_seeded<C: Coefficient>(
    p: &HomogeneousPoly<C>,
    q: &HomogeneousPoly<C>,
    seed: SeedStream,
) -> Result<RootSet, PolyError> {
    for h in [p, q] {
        if h.nvars() != 3 {
            return Err(PolyError::DimensionMismatch { expected: 3, found: h.nvars() });
        }
        if h.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if h.degree() == 0 {
            return Err(PolyError::Invalid("common zeros need positive degrees".into()));
        }
    }
    let (np, nq) = (p.degree() as usize, q.degree() as usize);
    let exact = if C::EXACT {
        let pe = p.poly().map_coeffs(|c| c.to_exact().expect("exact coefficient"));
        let qe = q.poly().map_coeffs(|c| c.to_exact().expect("exact coefficient"));
        if !poly_gcd(&pe, &qe).is_constant() {
            return Err(PolyError::CommonFactor);
        }
        Some((pe, qe))
    } else {
        None
    };
    let (pf, qf) = (p.poly().to_float(), q.poly().to_float());
    let mut last = String::new();
    for attempt in 0..FRAME_RETRIES {
        let outcome = match &exact {
            Some((pe, qe)) => attempt_exact(pe, qe, np, nq, seed, attempt)?,
            None => attempt_float(&pf, &qf, np, nq, seed, attempt)?,
        };
        match outcome {
            Attempt::Done(roots) => {
                let set = RootSet { roots };
                if set.total_multiplicity() as usize == np * nq {
                    return Ok(set);
                }
                last = format!("found {} of {} intersections", set.total_multiplicity(), np * nq);
            }
            Attempt::Retry(msg) => last = msg,
        }
    }
    Err(PolyError::IllConditioned(last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse::parse_poly;

    fn pt(v: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_real(v).unwrap()
    }

    #[test]
    fn coordinate_lines_meet_once() {
        let z = bivariate_common_zeros(&parse_poly("x0", 3).unwrap(), &parse_poly("x1", 3).unwrap()).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.roots[0].multiplicity, 1);
        assert_eq!(z.roots[0].point, pt(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn tangent_conic_gives_double_point() {
        let p = parse_poly("x0^2 - x1*x2", 3).unwrap();
        let q = parse_poly("x1", 3).unwrap();
        let z = bivariate_common_zeros(&p, &q).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z.roots[0].multiplicity, 2);
        assert!(z.roots[0].point.chordal(&pt(&[0.0, 0.0, 1.0])) < 1e-8);
        // Same system in floating point: the two nearby lifts are merged.
        let zf = bivariate_common_zeros(&p.to_float(), &q.to_float()).unwrap();
        assert_eq!(zf.total_multiplicity(), 2);
    }

    #[test]
    fn random_pair_satisfies_bezout() {
        let s = SeedStream::new(5);
        let mut rng = s.rng(0);
        let p = HomogeneousPoly::random_kostlan(3, 3, false, &mut rng);
        let q = HomogeneousPoly::random_kostlan(3, 4, false, &mut rng);
        let z = bivariate_common_zeros(&p, &q).unwrap();
        assert_eq!(z.total_multiplicity(), 12);
        for r in &z.roots {
            assert!(common_zero_residual(p.poly(), q.poly(), &r.point) < COMMON_ZERO_TOLERANCE);
        }
    }

    #[test]
    fn common_factor_detected() {
        let p = parse_poly("(x0 + x1)*x2", 3).unwrap();
        let q = parse_poly("(x0 + x1)*x0", 3).unwrap();
        assert_eq!(bivariate_common_zeros(&p, &q).unwrap_err(), PolyError::CommonFactor);
        assert_eq!(bivariate_common_zeros(&p.to_float(), &q.to_float()).unwrap_err(), PolyError::CommonFactor);
    }

    #[test]
    fn symbolic_resultant_has_bezout_degree() {
        let p = parse_poly("x0^2 + 3*x1*x2 - x2^2", 3).unwrap();
        let q = parse_poly("x0^3 - 2*x0*x1^2 + x1*x2^2 + x2^3", 3).unwrap();
        let r = resultant(p.poly(), q.poly(), 2, 2, 3);
        assert_eq!(r.homogeneity(), Ok(Some(6)));
    }

    #[test]
    fn exact_interpolation_recovers_polynomial() {
        let int = |k: i64| QComplex::new(num_rational::BigRational::from_integer(k.into()), Zero::zero());
        let xs: Vec<QComplex> = (0..4).map(int).collect();
        let ys: Vec<QComplex> = (0..4).map(|x| int(2 * x * x * x - x + 5)).collect();
        assert_eq!(interpolate_exact(&xs, &ys), vec![int(5), int(-1), int(0), int(2)]);
    }
}
