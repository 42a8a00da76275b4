//! Regular polynomial automorphisms of C² in Hénon normal form.
//!
//! f(x, y) = (y, p(y) − a·x) with inverse f^{-1}(x, y) = ((p(x) − y)/a, x).

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{LabError, LabResult, PolyError};
use crate::measure::EmpiricalMeasure;
use crate::poly::resultant::{det_scaled, sylvester};
use crate::poly::roots::CLUSTER_RADIUS;
use crate::poly::{dense_roots, parse_univariate, univariate_roots, Coefficient, HomogeneousPoly};
use crate::poly::{Monomial, Poly, QComplex};

/// Point of C².
pub type Point2 = [Complex64; 2];

/// Largest Bézout number d_+^n · d_-^m accepted by the intersection solver.
pub const INTERSECTION_COST_LIMIT: u64 = 4096;
/// Deepest iterate used by the Green function estimator.
pub const GREEN_MAX_DEPTH: usize = 60;
/// log‖q‖ above which iterates are carried in scaled form.
const SCALED_THRESHOLD: f64 = 20.0;
/// Grid on which random line data is rounded, so that it is exact.
const LINE_GRID: f64 = 1024.0;
/// Circle radii tried when sampling the eliminant.
const ELIMINATION_RADII: [f64; 3] = [2.0, 1.0, 4.0];
/// Largest det/Hadamard ratio still treated as an identically zero eliminant.
const DEGENERATE_RATIO: f64 = 1e-14;
const NEWTON_STEPS: usize = 30;
const ABERTH_STEPS: usize = 200;
const NEWTON_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct RegularAutomorphism {
    /// p as a univariate exact polynomial.
    p: Poly<QComplex>,
    a: QComplex,
    forward: [Poly<QComplex>; 2],
    inverse: [Poly<QComplex>; 2],
    /// Coefficients of p, low degree first.
    p_float: Vec<Complex64>,
    a_float: Complex64,
    degree: u32,
}

impl RegularAutomorphism {
    /// Build (y, p(y) − a·x) and its inverse and check both compositions
    /// are the identity in exact arithmetic.
    pub fn new(p: Poly<QComplex>, a: QComplex) -> LabResult<Self> {
        if p.nvars() != 1 {
            return Err(LabError::InvalidParameter("p must be univariate".into()));
        }
        if a.is_zero() {
            return Err(LabError::InvalidParameter("a must be nonzero".into()));
        }
        let degree = p.total_degree().unwrap_or(0);
        if degree < 2 {
            return Err(LabError::InvalidParameter(format!("deg p = {degree}, need at least 2")));
        }
        let x = Poly::<QComplex>::var(2, 0);
        let y = Poly::<QComplex>::var(2, 1);
        let ac = Poly::constant(2, a.clone());
        let forward = [y.clone(), &p.compose(std::slice::from_ref(&y)) - &(&ac * &x)];
        let inv_a = Poly::constant(2, QComplex::one() / a.clone());
        let inverse = [&(&p.compose(std::slice::from_ref(&x)) - &y) * &inv_a, x.clone()];
        let f = RegularAutomorphism {
            p_float: dense_float(&p),
            a_float: a.to_c64(),
            p,
            a,
            forward,
            inverse,
            degree,
        };
        let id = [x, y];
        if compose2(&f.inverse, &f.forward) != id || compose2(&f.forward, &f.inverse) != id {
            return Err(LabError::InvalidParameter("inverse check failed".into()));
        }
        Ok(f)
    }

    /// Parse p (in one variable) and a (a constant expression, `i` allowed).
    pub fn parse(p: &str, a: &str) -> LabResult<Self> {
        let p = parse_univariate(p)?;
        let a_poly = parse_univariate(a)?;
        if a_poly.total_degree().unwrap_or(0) > 0 {
            return Err(LabError::InvalidParameter(format!("a = {a} is not a constant")));
        }
        let a = a_poly.coeff(&Monomial(vec![0]));
        Self::new(p, a)
    }

    /// p(y) = y² − 1.4, a = −0.3: conjugate to the classical real map
    /// (x, y) ↦ (1 − 1.4x² + y, 0.3x).
    pub fn standard() -> Self {
        Self::parse("y^2 - 1.4", "-0.3").expect("standard parameters")
    }

    pub fn d_plus(&self) -> u32 {
        self.degree
    }

    pub fn d_minus(&self) -> u32 {
        self.degree
    }

    pub fn p(&self) -> &Poly<QComplex> {
        &self.p
    }

    pub fn a(&self) -> &QComplex {
        &self.a
    }

    pub fn forward_poly(&self) -> &[Poly<QComplex>; 2] {
        &self.forward
    }

    pub fn inverse_poly(&self) -> &[Poly<QComplex>; 2] {
        &self.inverse
    }

    /// f^n for n ≥ 0 and (f^{-1})^{|n|} for n < 0, symbolically.
    pub fn iterate_poly(&self, n: i32) -> [Poly<QComplex>; 2] {
        let step = if n >= 0 { &self.forward } else { &self.inverse };
        let mut acc = [Poly::var(2, 0), Poly::var(2, 1)];
        for _ in 0..n.unsigned_abs() {
            acc = compose2(step, &acc);
        }
        acc
    }

    fn p_eval(&self, z: Complex64) -> Complex64 {
        self.p_float.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn forward_point(&self, q: Point2) -> Point2 {
        [q[1], self.p_eval(q[1]) - self.a_float * q[0]]
    }

    pub fn inverse_point(&self, q: Point2) -> Point2 {
        [(self.p_eval(q[0]) - q[1]) / self.a_float, q[0]]
    }

    /// f^n(q) in floating point (negative n iterates the inverse).
    pub fn iterate_point(&self, n: i32, mut q: Point2) -> Point2 {
        for _ in 0..n.unsigned_abs() {
            q = if n >= 0 { self.forward_point(q) } else { self.inverse_point(q) };
        }
        q
    }

    /// One step on a point carried as e^s · u with ‖u‖_∞ = 1 and s large.
    fn scaled_step(&self, s: f64, u: Point2, forward: bool) -> (f64, Point2) {
        let d = self.degree as i32;
        let shrink = |j: i32| ((j - d) as f64 * s).exp();
        let (lead, other) = if forward { (u[1], u[0]) } else { (u[0], u[1]) };
        let poly: Complex64 =
            self.p_float.iter().enumerate().map(|(j, c)| c * lead.powi(j as i32) * shrink(j as i32)).sum();
        let v = if forward {
            [lead * shrink(1), poly - self.a_float * other * shrink(1)]
        } else {
            [(poly - other * shrink(1)) / self.a_float, lead * shrink(1)]
        };
        let m = v[0].norm().max(v[1].norm());
        (d as f64 * s + m.ln(), [v[0] / m, v[1] / m])
    }
}

fn dense_float(p: &Poly<QComplex>) -> Vec<Complex64> {
    let deg = p.total_degree().unwrap_or(0) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (m, c) in p.terms() {
        out[m.0[0] as usize] = c.to_c64();
    }
    out
}

/// outer ∘ inner for maps given by two polynomials.
fn compose2<C: Coefficient>(outer: &[Poly<C>; 2], inner: &[Poly<C>; 2]) -> [Poly<C>; 2] {
    [outer[0].compose(inner), outer[1].compose(inner)]
}

/// Affine complex line {point + t·direction}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineLine {
    pub point: Point2,
    pub direction: Point2,
}

impl AffineLine {
    /// Gaussian point and direction, rounded to a dyadic grid so the line
    /// has exact coefficients.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new((re * LINE_GRID).round() / LINE_GRID, (im * LINE_GRID).round() / LINE_GRID)
        };
        AffineLine { point: [g(), g()], direction: [g(), g()] }
    }

    /// Linear equation of the line: det(q − point, direction).
    fn equation<C: Coefficient>(&self, q: &[Poly<C>; 2]) -> Poly<C> {
        let nv = q[0].nvars();
        let c = |z: Complex64| Poly::constant(nv, C::from_c64(z));
        let dx = &q[0] - &c(self.point[0]);
        let dy = &q[1] - &c(self.point[1]);
        &(&dx * &c(self.direction[1])) - &(&dy * &c(self.direction[0]))
    }

    fn at(&self, t: Complex64) -> Point2 {
        [self.point[0] + t * self.direction[0], self.point[1] + t * self.direction[1]]
    }
}

/// The lines L and L' of one intersection problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePair {
    pub l: AffineLine,
    pub l_prime: AffineLine,
}

impl LinePair {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        LinePair { l: AffineLine::random(rng), l_prime: AffineLine::random(rng) }
    }
}

/// Normalized intersection measure of f^{-n}(L) ∩ f^m(L').
#[derive(Debug, Clone)]
pub struct IntersectionCloud {
    pub n: u32,
    pub m: u32,
    /// Points repeated by multiplicity, with weight 1/count each.
    pub measure: EmpiricalMeasure<Point2>,
    /// Affine solutions counted with multiplicity.
    pub raw_count: u32,
    /// d_+^n · d_-^m.
    pub expected: u32,
    /// Root count of the parametric route (roots of ℓ(f^{n+m}) along L').
    pub parametric_count: u32,
    /// Largest distance from a parametric point to the nearest elimination
    /// point, relative to 1 + |q|.
    pub route_gap: f64,
}

/// Solve {f^n(q) ∈ L, f^{-m}(q) ∈ L'} twice: by eliminating one variable
/// from the two composed line equations, and along the parametrization
/// q = f^m(c' + t v') of f^m(L').
pub fn line_intersection_cloud(
    f: &RegularAutomorphism,
    n: u32,
    m: u32,
    pair: &LinePair,
) -> LabResult<IntersectionCloud> {
    if n == 0 || m == 0 {
        return Err(LabError::InvalidParameter("n and m must be at least 1".into()));
    }
    let expected = (f.d_plus() as u64).checked_pow(n).and_then(|a| a.checked_mul((f.d_minus() as u64).checked_pow(m)?));
    let expected = match expected {
        Some(e) if e <= INTERSECTION_COST_LIMIT => e as u32,
        _ => return Err(PolyError::CostGuard(format!("Bézout number for n = {n}, m = {m} exceeds {INTERSECTION_COST_LIMIT}")).into()),
    };
    let points = elimination_route(f, n, m, pair, expected)?;
    let raw_count = points.len() as u32;
    let param = parametric_route(f, n, m, pair)?;
    let route_gap = param
        .iter()
        .map(|q| {
            points.iter().map(|p| dist(p, q)).fold(f64::INFINITY, f64::min) / (1.0 + norm2(q))
        })
        .fold(0.0, f64::max);
    Ok(IntersectionCloud {
        n,
        m,
        measure: EmpiricalMeasure::uniform(points),
        raw_count,
        expected,
        parametric_count: param.len() as u32,
        route_gap,
    })
}

fn norm2(q: &Point2) -> f64 {
    (q[0].norm_sqr() + q[1].norm_sqr()).sqrt()
}

fn dist(p: &Point2, q: &Point2) -> f64 {
    ((p[0] - q[0]).norm_sqr() + (p[1] - q[1]).norm_sqr()).sqrt()
}

/// Value and gradient of the line equation det(q − point, direction).
fn line_jet(line: &AffineLine, q: &Point2) -> (Complex64, [Complex64; 2]) {
    let (c, v) = (line.point, line.direction);
    ((q[0] - c[0]) * v[1] - (q[1] - c[1]) * v[0], [v[1], -v[0]])
}

type Jac = [[Complex64; 2]; 2];

fn mat_mul(a: &Jac, b: &Jac) -> Jac {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl RegularAutomorphism {
    fn p_jet(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        self.p_float.iter().rev().fold((zero, zero), |(v, d), c| (v * z + c, d * z + v))
    }

    /// f^{±steps}(q) and its Jacobian, by iterating points.
    fn orbit_jet(&self, q: Point2, steps: u32, forward: bool) -> (Point2, Jac) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut jac = [[one, zero], [zero, one]];
        let mut z = q;
        for _ in 0..steps {
            let step = if forward {
                let (pv, pd) = self.p_jet(z[1]);
                z = [z[1], pv - self.a_float * z[0]];
                [[zero, one], [-self.a_float, pd]]
            } else {
                let (pv, pd) = self.p_jet(z[0]);
                z = [(pv - z[1]) / self.a_float, z[0]];
                [[pd / self.a_float, -one / self.a_float], [one, zero]]
            };
            jac = mat_mul(&step, &jac);
        }
        (z, jac)
    }

    /// (ℓ(f^n q), ℓ'(f^{-m} q)) and its Jacobian.
    fn intersection_system(&self, n: u32, m: u32, pair: &LinePair, q: &Point2) -> ([Complex64; 2], Jac) {
        let mut val = [Complex64::new(0.0, 0.0); 2];
        let mut jac = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (row, (line, steps, forward)) in [(&pair.l, n, true), (&pair.l_prime, m, false)].into_iter().enumerate() {
            let (z, dz) = self.orbit_jet(*q, steps, forward);
            let (v, g) = line_jet(line, &z);
            val[row] = v;
            for j in 0..2 {
                jac[row][j] = g[0] * dz[0][j] + g[1] * dz[1][j];
            }
        }
        (val, jac)
    }
}

/// Newton's method on the intersection system; None unless the steps
/// converge.
fn newton_intersection(f: &RegularAutomorphism, n: u32, m: u32, pair: &LinePair, mut q: Point2) -> Option<Point2> {
    for _ in 0..NEWTON_STEPS {
        let (v, j) = f.intersection_system(n, m, pair, &q);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let d0 = (v[0] * j[1][1] - v[1] * j[0][1]) / det;
        let d1 = (j[0][0] * v[1] - j[1][0] * v[0]) / det;
        q = [q[0] - d0, q[1] - d1];
        let step = (d0.norm_sqr() + d1.norm_sqr()).sqrt();
        if !step.is_finite() {
            return None;
        }
        if step <= NEWTON_TOLERANCE * (1.0 + norm2(&q)) {
            return Some(q);
        }
    }
    None
}

/// Whether the intersection is transverse at q (simple root of the system).
fn is_transverse(f: &RegularAutomorphism, n: u32, m: u32, pair: &LinePair, q: &Point2) -> bool {
    let (_, j) = f.intersection_system(n, m, pair, q);
    let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).norm();
    let scale: f64 = j.iter().flatten().map(|c| c.norm_sqr()).sum();
    det > 1e-8 * scale
}

/// Dense float coefficients of h in the second variable, each a dense
/// polynomial in the first variable (low powers first).
fn coefficients_in_y(h: &Poly<QComplex>) -> Vec<Vec<Complex64>> {
    let deg_y = h.terms().keys().map(|m| m.0[1]).max().unwrap_or(0) as usize;
    let deg_x = h.terms().keys().map(|m| m.0[0]).max().unwrap_or(0) as usize;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); deg_x + 1]; deg_y + 1];
    for (mono, c) in h.terms() {
        out[mono.0[1] as usize][mono.0[0] as usize] = c.to_c64();
    }
    out
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

/// Eliminate y from A = ℓ∘f^n and B = ℓ'∘f^{-m}: the resultant in y is a
/// polynomial of degree d_+^n d_-^m in x, recovered from Sylvester
/// determinants sampled on a circle. Each root x is lifted through the
/// roots of A(x, ·) and polished by Newton's method on the orbit equations.
/// Bézout bounds the count, so once that many distinct transverse points
/// are found the set is complete; otherwise further circles and lifts are
/// used as seeds.
fn elimination_route(f: &RegularAutomorphism, n: u32, m: u32, pair: &LinePair, expected: u32) -> LabResult<Vec<Point2>> {
    let a = coefficients_in_y(&pair.l.equation(&f.iterate_poly(n as i32)));
    let b = coefficients_in_y(&pair.l_prime.equation(&f.iterate_poly(-(m as i32))));
    let mut found: Vec<Point2> = Vec::new();
    let mut projections = Vec::new();
    for radius in ELIMINATION_RADII {
        let xs = resultant_roots(&a, &b, expected as usize, radius)?;
        for &x in &xs {
            if let Some(&y) = fibre_candidates(&a, &b, x).first() {
                add_intersection(f, n, m, pair, [x, y], &mut found);
            }
        }
        if found.len() == expected as usize {
            return Ok(found);
        }
        projections.extend(xs);
    }
    for &x in &projections {
        for y in fibre_candidates(&a, &b, x).into_iter().skip(1) {
            add_intersection(f, n, m, pair, [x, y], &mut found);
        }
        if found.len() == expected as usize {
            return Ok(found);
        }
    }
    // Tangential intersections: take multiplicities from the first circle.
    let xs = resultant_roots(&a, &b, expected as usize, ELIMINATION_RADII[0])?;
    let mut counted: Vec<(Point2, u32)> = Vec::new();
    for &x in &xs {
        let Some(&y) = fibre_candidates(&a, &b, x).first() else { continue };
        let Some(q) = newton_intersection(f, n, m, pair, [x, y]) else { continue };
        match counted.iter_mut().find(|(p, _)| dist(p, &q) < CLUSTER_RADIUS * (1.0 + norm2(&q))) {
            Some((p, k)) if !is_transverse(f, n, m, pair, p) => *k += 1,
            Some(_) => break,
            None => counted.push((q, 1)),
        }
    }
    if counted.iter().map(|(_, k)| k).sum::<u32>() == expected {
        return Ok(counted.into_iter().flat_map(|(q, k)| std::iter::repeat_n(q, k as usize)).collect());
    }
    Err(PolyError::IllConditioned(format!("found {} of {expected} intersections", found.len())).into())
}

/// Newton-polish a seed and keep it if it is a new transverse intersection.
fn add_intersection(f: &RegularAutomorphism, n: u32, m: u32, pair: &LinePair, seed: Point2, found: &mut Vec<Point2>) {
    let Some(q) = newton_intersection(f, n, m, pair, seed) else { return };
    if !is_transverse(f, n, m, pair, &q) {
        return;
    }
    if found.iter().all(|p| dist(p, &q) >= CLUSTER_RADIUS * (1.0 + norm2(&q))) {
        found.push(q);
    }
}

/// Roots y of A(x, ·), sorted by |B(x, y)|.
fn fibre_candidates(a: &[Vec<Complex64>], b: &[Vec<Complex64>], x: Complex64) -> Vec<Complex64> {
    let ay: Vec<Complex64> = a.iter().map(|c| horner(c, x)).collect();
    let by: Vec<Complex64> = b.iter().map(|c| horner(c, x)).collect();
    let top = ay.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    let mut ys: Vec<(f64, Complex64)> = dense_roots(&ay[..=top]).into_iter().map(|y| (horner(&by, y).norm(), y)).collect();
    ys.sort_by(|u, v| u.0.total_cmp(&v.0));
    ys.into_iter().map(|(_, y)| y).collect()
}

/// Roots of x ↦ Res_y(A, B)(x) from its values on the circle |x| = radius.
fn resultant_roots(a: &[Vec<Complex64>], b: &[Vec<Complex64>], degree: usize, radius: f64) -> LabResult<Vec<Complex64>> {
    let len = degree + 1;
    let mut dets = Vec::with_capacity(len);
    let mut hadamard_ratio: f64 = 0.0;
    for j in 0..len {
        let x = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / len as f64);
        let av: Vec<Complex64> = a.iter().map(|c| horner(c, x)).collect();
        let bv: Vec<Complex64> = b.iter().map(|c| horner(c, x)).collect();
        let s = sylvester(&av, &bv, Complex64::new(0.0, 0.0));
        let had: f64 = s.iter().map(|row| row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().ln()).sum();
        let (mant, ls) = det_scaled(s);
        if mant.norm() > 0.0 {
            hadamard_ratio = hadamard_ratio.max((ls - had).exp());
        }
        dets.push((mant, ls));
    }
    if hadamard_ratio < DEGENERATE_RATIO {
        return Err(LabError::InvalidParameter("degenerate line pair (common component); resample".into()));
    }
    let top = dets.iter().filter(|d| d.0.norm() > 0.0).map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<Complex64> =
        dets.iter().map(|(mant, ls)| if mant.norm() > 0.0 { mant * (ls - top).exp() } else { *mant }).collect();
    // Coefficients of s ↦ R(radius·s).
    let mut coeffs = values;
    FftPlanner::new().plan_fft_forward(len).process(&mut coeffs);
    for c in &mut coeffs {
        *c /= len as f64;
    }
    let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let top = coeffs.iter().rposition(|c| c.norm() > 1e-13 * peak).unwrap_or(0);
    Ok(dense_roots(&coeffs[..=top]).into_iter().map(|s| s * radius).collect())
}

/// Roots t of U(t) = ℓ(f^{n+m}(c' + t v')), mapped to q = f^m(c' + t v').
fn parametric_route(f: &RegularAutomorphism, n: u32, m: u32, pair: &LinePair) -> LabResult<Vec<Point2>> {
    let lp = &pair.l_prime;
    let t = Poly::<QComplex>::var(1, 0);
    let line = |c: Complex64, v: Complex64| &Poly::constant(1, QComplex::from_c64(c)) + &t.scale(&QComplex::from_c64(v));
    let mut curve = [line(lp.point[0], lp.direction[0]), line(lp.point[1], lp.direction[1])];
    for _ in 0..(n + m) {
        curve = compose2(&f.forward, &curve);
    }
    let u = pair.l.equation(&curve);
    let deg = u.total_degree().ok_or(PolyError::ZeroPolynomial)? as usize;
    let mut coeffs = vec![QComplex::zero(); deg + 1];
    for (mono, c) in u.terms() {
        coeffs[mono.0[0] as usize] = c.clone();
    }
    let form = HomogeneousPoly::from_binary_coeffs(&coeffs).to_float();
    let seeds: Vec<Complex64> = univariate_roots(&form)?
        .roots
        .iter()
        .filter_map(|r| r.point.affine().map(|t| (t, r.multiplicity)))
        .flat_map(|(t, k)| std::iter::repeat_n(t, k as usize))
        .collect();
    // Simultaneous (Aberth) refinement on the orbit form of U, which avoids
    // the cancellation in the expanded coefficients.
    let ratio = |t: Complex64| {
        let (z, dz) = f.orbit_jet(lp.at(t), n + m, true);
        let (v, g) = line_jet(&pair.l, &z);
        let du: Complex64 = (0..2).map(|i| g[i] * (dz[i][0] * lp.direction[0] + dz[i][1] * lp.direction[1])).sum();
        v / du
    };
    let ts = aberth_refine(seeds, ratio);
    Ok(ts.into_iter().map(|t| f.iterate_point(m as i32, lp.at(t))).collect())
}

/// Aberth iteration from the given seeds, with the Newton ratio U/U'
/// supplied by the caller.
fn aberth_refine<F: Fn(Complex64) -> Complex64>(mut z: Vec<Complex64>, ratio: F) -> Vec<Complex64> {
    let k = z.len();
    let mut done = vec![false; k];
    for _ in 0..ABERTH_STEPS {
        let mut all = true;
        for i in 0..k {
            if done[i] {
                continue;
            }
            let r = ratio(z[i]);
            if !r.is_finite() {
                done[i] = true;
                continue;
            }
            let s: Complex64 = (0..k).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = r / (Complex64::new(1.0, 0.0) - r * s);
            if !step.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= step;
            if step.norm() <= NEWTON_TOLERANCE * (1.0 + z[i].norm()) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

/// Smooth test function on C² supported in the polydisc of radius 3:
/// β(|x|)·β(|y|)·(monomial part), with β(r) = exp(1 − 1/(1 − (r/3)²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoxTestFunction {
    Bump,
    RealX,
    ImagX,
    RealY,
    ImagY,
    RealXY,
    AbsX2,
    AbsY2,
}

impl BoxTestFunction {
    pub const RADIUS: f64 = 3.0;

    pub fn standard_set() -> Vec<BoxTestFunction> {
        use BoxTestFunction::*;
        vec![Bump, RealX, ImagX, RealY, ImagY, RealXY, AbsX2, AbsY2]
    }

    fn bump(r: f64) -> f64 {
        let s = r / Self::RADIUS;
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn eval(&self, q: &Point2) -> f64 {
        let w = Self::bump(q[0].norm()) * Self::bump(q[1].norm());
        if w == 0.0 {
            return 0.0;
        }
        let (x, y) = (q[0] / Self::RADIUS, q[1] / Self::RADIUS);
        let part = match self {
            BoxTestFunction::Bump => 1.0,
            BoxTestFunction::RealX => x.re,
            BoxTestFunction::ImagX => x.im,
            BoxTestFunction::RealY => y.re,
            BoxTestFunction::ImagY => y.im,
            BoxTestFunction::RealXY => (x * y).re,
            BoxTestFunction::AbsX2 => x.norm_sqr(),
            BoxTestFunction::AbsY2 => y.norm_sqr(),
        };
        w * part
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoxTestFunction::Bump => "bump",
            BoxTestFunction::RealX => "re_x",
            BoxTestFunction::ImagX => "im_x",
            BoxTestFunction::RealY => "re_y",
            BoxTestFunction::ImagY => "im_y",
            BoxTestFunction::RealXY => "re_xy",
            BoxTestFunction::AbsX2 => "abs_x2",
            BoxTestFunction::AbsY2 => "abs_y2",
        }
    }
}

/// max over cloud couples and test functions of |⟨cloud_i − cloud_j, ψ⟩|.
pub fn cloud_gap(clouds: &[EmpiricalMeasure<Point2>], psis: &[BoxTestFunction]) -> f64 {
    let pairings: Vec<Vec<f64>> =
        clouds.iter().map(|c| psis.iter().map(|psi| c.integrate(|q| psi.eval(q))).collect()).collect();
    let mut gap = 0.0f64;
    for i in 0..pairings.len() {
        for j in (i + 1)..pairings.len() {
            for (a, b) in pairings[i].iter().zip(&pairings[j]) {
                gap = gap.max((a - b).abs());
            }
        }
    }
    gap
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub gap: f64,
    pub clouds: Vec<IntersectionCloud>,
}

/// Intersection clouds for every pair and the largest pairing difference.
pub fn equidistribution_gap(
    f: &RegularAutomorphism,
    n: u32,
    m: u32,
    pairs: &[LinePair],
    psis: &[BoxTestFunction],
) -> LabResult<GapReport> {
    if pairs.len() < 2 {
        return Err(LabError::InvalidParameter("need at least two line pairs".into()));
    }
    let clouds = pairs
        .par_iter()
        .map(|pair| line_intersection_cloud(f, n, m, pair))
        .collect::<LabResult<Vec<_>>>()?;
    let measures: Vec<EmpiricalMeasure<Point2>> = clouds.iter().map(|c| c.measure.clone()).collect();
    Ok(GapReport { gap: cloud_gap(&measures, psis), clouds })
}

/// Estimates of G^± = lim d^{-n} log⁺‖f^{±n}(q)‖ with the change over the
/// final step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEstimate {
    pub g_plus: f64,
    pub g_minus: f64,
    pub increment_plus: f64,
    pub increment_minus: f64,
}

pub fn green_function(f: &RegularAutomorphism, q: Point2, depth: usize) -> LabResult<GreenEstimate> {
    if depth == 0 || depth > GREEN_MAX_DEPTH {
        return Err(LabError::InvalidParameter(format!("depth {depth} outside 1..={GREEN_MAX_DEPTH}")));
    }
    let (g_plus, increment_plus) = escape_rate(f, q, depth, true);
    let (g_minus, increment_minus) = escape_rate(f, q, depth, false);
    Ok(GreenEstimate { g_plus, g_minus, increment_plus, increment_minus })
}

fn escape_rate(f: &RegularAutomorphism, q: Point2, depth: usize, forward: bool) -> (f64, f64) {
    let d = f.degree as f64;
    // Point carried as e^s · u, ‖u‖_∞ = 1.
    let split = |q: Point2| {
        let m = q[0].norm().max(q[1].norm());
        if m == 0.0 {
            (f64::NEG_INFINITY, [Complex64::new(0.0, 0.0); 2])
        } else {
            (m.ln(), [q[0] / m, q[1] / m])
        }
    };
    let (mut s, mut u) = split(q);
    let mut prev = 0.0;
    let mut current = 0.0;
    for step in 1..=depth {
        (s, u) = if s > SCALED_THRESHOLD {
            f.scaled_step(s, u, true ^ !forward)
        } else {
            let e = s.exp();
            let z = [u[0] * e, u[1] * e];
            split(if forward { f.forward_point(z) } else { f.inverse_point(z) })
        };
        let log_norm = s + (u[0].norm_sqr() + u[1].norm_sqr()).sqrt().ln();
        prev = current;
        current = log_norm.max(0.0) / d.powi(step as i32);
    }
    (current, (current - prev).abs())
}
