use num_complex::Complex64;

use super::coeff::Coefficient;
use super::homogeneous::HomogeneousPoly;
use crate::error::PolyError;
use crate::projective::{ProjectivePoint, POINT_TOLERANCE};

/// Restriction of a form to the line through two points.
#[derive(Debug, Clone)]
pub struct LineRestriction {
    /// q(s, t) = p(s*a + t*b) as a binary form (x0 = s, x1 = t).
    pub poly: HomogeneousPoly<Complex64>,
    /// True when q vanishes identically, i.e. the line lies in the zero set.
    pub in_zero_set: bool,
}

impl LineRestriction {
    /// The point s*a + t*b of the line.
    pub fn point(a: &ProjectivePoint, b: &ProjectivePoint, st: &ProjectivePoint) -> ProjectivePoint {
        let (s, t) = (st.coords()[0], st.coords()[1]);
        let v = a.coords().iter().zip(b.coords()).map(|(x, y)| s * x + t * y).collect();
        ProjectivePoint::new(v).expect("distinct points span a line")
    }
}

/// q(s, t) = p(s*a + t*b), computed by sampling at roots of unity and an
/// inverse DFT; the restriction is flagged as identically zero when every
/// sample is below the rounding level of its evaluation.
pub fn restrict_to_line<C: Coefficient>(
    p: &HomogeneousPoly<C>,
    a: &ProjectivePoint,
    b: &ProjectivePoint,
) -> Result<LineRestriction, PolyError> {
    for q in [a, b] {
        if q.dim() + 1 != p.nvars() {
            return Err(PolyError::DimensionMismatch { expected: p.nvars(), found: q.dim() + 1 });
        }
    }
    if a.chordal(b) < POINT_TOLERANCE {
        return Err(PolyError::CoincidentPoints);
    }
    let n = p.degree() as usize;
    let terms: Vec<(Vec<u32>, Complex64, f64)> =
        p.poly().terms().iter().map(|(m, c)| (m.0.clone(), c.to_c64(), c.abs_f64())).collect();
    let k = p.nvars();
    let len = n + 1;
    let mut values = Vec::with_capacity(len);
    let mut bound: f64 = 0.0;
    let mut z = vec![Complex64::new(0.0, 0.0); k];
    let mut pows: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0); n + 1]; k];
    for j in 0..len {
        let s = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / len as f64);
        for i in 0..k {
            z[i] = s * a.coords()[i] + b.coords()[i];
            for e in 1..=n {
                pows[i][e] = pows[i][e - 1] * z[i];
            }
        }
        let mut v = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for (m, c, ac) in &terms {
            let mut t = *c;
            let mut at = *ac;
            for i in 0..k {
                let e = m[i] as usize;
                if e > 0 {
                    t *= pows[i][e];
                    at *= pows[i][e].norm();
                }
            }
            v += t;
            abs += at;
        }
        bound = bound.max(abs);
        values.push(v);
    }
    let in_zero_set = values.iter().all(|v| v.norm() <= 1e-12 * bound.max(f64::MIN_POSITIVE) * len as f64);
    // q(s, 1) = sum_j c_j s^j; recover c_j from samples at the len-th roots of unity.
    let coeffs: Vec<Complex64> = if in_zero_set {
        vec![Complex64::new(0.0, 0.0); len]
    } else {
        (0..len)
            .map(|e| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let w = Complex64::from_polar(1.0, -std::f64::consts::TAU * ((e * j) % len) as f64 / len as f64);
                    acc += v * w;
                }
                acc / len as f64
            })
            .collect()
    };
    let mut poly = HomogeneousPoly::from_binary_coeffs(&coeffs);
    if in_zero_set {
        poly = HomogeneousPoly::zero(2, n as u32);
    }
    Ok(LineRestriction { poly, in_zero_set })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse::parse_poly;
    use crate::rng::SeedStream;

    fn pt(v: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_real(v).unwrap()
    }

    #[test]
    fn line_inside_zero_set() {
        let p = parse_poly("x0", 3).unwrap();
        let r = restrict_to_line(&p, &pt(&[0.0, 1.0, 0.0]), &pt(&[0.0, 0.0, 1.0])).unwrap();
        assert!(r.in_zero_set);
        assert!(r.poly.is_zero());
    }

    #[test]
    fn coordinate_restriction() {
        let p = parse_poly("x0", 3).unwrap();
        let r = restrict_to_line(&p, &pt(&[1.0, 0.0, 0.0]), &pt(&[0.0, 1.0, 0.0])).unwrap();
        assert!(!r.in_zero_set);
        let c = r.poly.binary_coeffs();
        assert!((c[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(c[0].norm() < 1e-14);
    }

    #[test]
    fn coincident_points_rejected() {
        let p = parse_poly("x0*x1", 3).unwrap();
        let a = pt(&[1.0, 2.0, 3.0]);
        let b = pt(&[-2.0, -4.0, -6.0]);
        assert_eq!(restrict_to_line(&p, &a, &b).unwrap_err(), PolyError::CoincidentPoints);
    }

    #[test]
    fn restriction_matches_direct_evaluation() {
        let s = SeedStream::new(3);
        let mut rng = s.rng(0);
        let p = HomogeneousPoly::random_kostlan(3, 7, false, &mut rng);
        let a = crate::projective::sample_point_fs(2, &mut rng);
        let b = crate::projective::sample_point_fs(2, &mut rng);
        let r = restrict_to_line(&p, &a, &b).unwrap();
        assert_eq!(r.poly.degree(), 7);
        let (s0, t0) = (Complex64::new(0.3, -1.1), Complex64::new(0.7, 0.2));
        let x: Vec<Complex64> = a.coords().iter().zip(b.coords()).map(|(u, v)| s0 * u + t0 * v).collect();
        let direct = p.poly().eval_c64(&x);
        let via = r.poly.poly().eval_c64(&[s0, t0]);
        assert!((direct - via).norm() < 1e-10 * direct.norm().max(1.0));
    }
}
