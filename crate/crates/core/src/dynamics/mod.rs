//! Rational self-maps and (g, h)-correspondences of P^1 and P^2.

mod backward;
mod degree;
mod mixing;

use std::sync::OnceLock;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{LabError, LabResult, PolyError};
use crate::poly::roots::quadratic_roots;
use crate::poly::{bivariate_common_zeros, dense_roots, ExactMap, FloatMap, HomogeneousPoly, Poly, QComplex};
use crate::poly::{parse_map, Coefficient};
use crate::projective::{sample_point_fs, ProjectivePoint};
use crate::rng::SeedStream;

pub use backward::{
    backward_orbit_sample, invariance_defect, tree_invariance_defect, BackwardCloud, Defect, TreeDefect,
};
pub use degree::{degree_growth, DegreeGrowth, DEGREE_GROWTH_MAX_ITERATES};
pub use mixing::{decay_slope, mixing_correlations, Correlation, MixingResult};

/// Preimages of a point of P^1 as unit vectors, repeated by multiplicity.
pub type Fiber = SmallVec<[[Complex64; 2]; 8]>;

const DEGREE_TRIALS: usize = 8;
const DEGREE_SEED: u64 = 0x7d3_9e11;
/// Relative size of f(x) below which x is treated as an indeterminacy point.
const INDETERMINACY_TOLERANCE: f64 = 1e-8;
/// Chordal distance between f(x) and the target accepted as a fiber point.
const FIBER_TOLERANCE: f64 = 1e-6;

/// Anything that can be pulled back: maps and correspondences.
pub trait Preimage: Sync {
    /// Projective dimension k.
    fn dim(&self) -> usize;

    /// Generic number of preimages, counted with multiplicity.
    fn topological_degree(&self) -> LabResult<u32>;

    /// The fiber over y, repeated by multiplicity. Fails when y is
    /// exceptional (fewer preimages than the topological degree).
    fn preimages(&self, y: &ProjectivePoint) -> LabResult<Vec<ProjectivePoint>>;

    /// Fiber over a unit vector of C², for maps of P^1.
    fn preimages_p1(&self, y: [Complex64; 2]) -> LabResult<Fiber> {
        let p = ProjectivePoint::new(y.to_vec())?;
        Ok(self.preimages(&p)?.iter().map(|x| [x.coords()[0], x.coords()[1]]).collect())
    }

    /// For a polynomial map z ↦ p(z) of P^1, the coefficients of p (low
    /// degree first). Finite points then have finite preimages only.
    fn affine_polynomial(&self) -> Option<&[Complex64]> {
        None
    }
}

/// Reduced polynomial self-map of P^k, k ∈ {1, 2}.
#[derive(Debug)]
pub struct RationalSelfMap {
    exact: ExactMap,
    float: FloatMap,
    /// Binary coefficients of the two components, for k = 1.
    binary: Option<(Vec<Complex64>, Vec<Complex64>)>,
    /// p with f = [p(x0/x1) x1^d : x1^d], when f is a polynomial map of P^1.
    affine: Option<Vec<Complex64>>,
    d_top: OnceLock<LabResult<u32>>,
}

impl Clone for RationalSelfMap {
    fn clone(&self) -> Self {
        RationalSelfMap {
            exact: self.exact.clone(),
            float: self.float.clone(),
            binary: self.binary.clone(),
            affine: self.affine.clone(),
            d_top: self.d_top.clone(),
        }
    }
}

impl RationalSelfMap {
    /// Reduce the components by their gcd and check the shape.
    pub fn new(map: ExactMap) -> LabResult<Self> {
        let nv = map.nvars();
        if !(nv == 2 || nv == 3) {
            return Err(LabError::Unsupported(format!("self-maps of P^{} are not supported", nv as i64 - 1)));
        }
        if map.components().len() != nv {
            return Err(PolyError::DimensionMismatch { expected: nv, found: map.components().len() }.into());
        }
        let exact = if map.is_reduced() { map } else { map.reduce()? };
        if exact.degree() == 0 {
            return Err(LabError::InvalidParameter("constant maps are not dominant".into()));
        }
        let float = exact.to_float();
        let binary = (nv == 2).then(|| {
            let c = float.components();
            (c[0].binary_coeffs(), c[1].binary_coeffs())
        });
        let affine = binary.as_ref().and_then(|(p, q)| {
            let zero = Complex64::new(0.0, 0.0);
            (q[0] != zero && q[1..].iter().all(|c| *c == zero)).then(|| p.iter().map(|c| c / q[0]).collect())
        });
        Ok(RationalSelfMap { exact, float, binary, affine, d_top: OnceLock::new() })
    }

    /// Parse one polynomial text per component in x0, ..., xk.
    pub fn parse<S: AsRef<str>>(components: &[S]) -> LabResult<Self> {
        Self::new(parse_map(components, components.len())?)
    }

    /// z ↦ z² + c on P^1, i.e. [x0² + c x1² : x1²]. The coefficient is
    /// taken exactly from its binary value.
    pub fn quadratic(c: Complex64) -> LabResult<Self> {
        let x0 = Poly::<QComplex>::var(2, 0);
        let x1 = Poly::<QComplex>::var(2, 1);
        let sq1 = &x1 * &x1;
        let p = &(&x0 * &x0) + &sq1.scale(&QComplex::from_c64(c));
        let comps = vec![HomogeneousPoly::new(p, 2)?, HomogeneousPoly::new(sq1, 2)?];
        Self::new(ExactMap::new(comps)?)
    }

    pub fn exact(&self) -> &ExactMap {
        &self.exact
    }

    pub fn float(&self) -> &FloatMap {
        &self.float
    }

    /// Algebraic degree.
    pub fn degree(&self) -> u32 {
        self.exact.degree()
    }

    /// Image of a point; None on the indeterminacy set.
    pub fn apply(&self, x: &ProjectivePoint) -> Option<ProjectivePoint> {
        self.float.apply(x)
    }

    /// Every solution of f(x) ∥ y off the indeterminacy set, with
    /// multiplicity, without comparing the count to the degree.
    pub fn raw_preimages(&self, y: &ProjectivePoint) -> LabResult<Vec<ProjectivePoint>> {
        if y.dim() != self.dim() {
            return Err(PolyError::DimensionMismatch { expected: self.dim() + 1, found: y.dim() + 1 }.into());
        }
        if self.dim() == 1 {
            let fib = self.p1_fiber([y.coords()[0], y.coords()[1]])?;
            return Ok(fib.iter().map(|v| ProjectivePoint::new(v.to_vec()).expect("unit vector")).collect());
        }
        let yc = y.coords();
        let c = (0..3).max_by(|&a, &b| yc[a].norm().total_cmp(&yc[b].norm())).unwrap();
        let comps = self.float.components();
        let cross: Vec<HomogeneousPoly<Complex64>> = (0..3)
            .filter(|&i| i != c)
            .map(|i| {
                let e = &comps[i].poly().scale(&yc[c]) - &comps[c].poly().scale(&yc[i]);
                HomogeneousPoly::new(e, self.degree())
            })
            .collect::<Result<_, _>>()?;
        if cross.iter().any(|e| e.is_zero()) {
            return Err(LabError::Exceptional { found: 0, expected: self.d_top_or_bound() });
        }
        let roots = match bivariate_common_zeros(&cross[0], &cross[1]) {
            Ok(r) => r,
            // A positive-dimensional fiber: not a generic target.
            Err(PolyError::CommonFactor) => {
                return Err(LabError::Exceptional { found: 0, expected: self.d_top_or_bound() })
            }
            Err(e) => return Err(e.into()),
        };
        let scale = comps.iter().map(|h| h.poly().l1_norm()).fold(0.0, f64::max);
        let mut out = Vec::new();
        for r in roots.roots {
            let v = self.float.eval_coords(r.point.coords());
            let size = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if size <= INDETERMINACY_TOLERANCE * scale {
                continue;
            }
            let image = ProjectivePoint::new(v)?;
            if image.chordal(y) > FIBER_TOLERANCE {
                continue;
            }
            for _ in 0..r.multiplicity {
                out.push(r.point.clone());
            }
        }
        Ok(out)
    }

    fn d_top_or_bound(&self) -> u32 {
        match self.d_top.get() {
            Some(Ok(d)) => *d,
            _ => self.degree().pow(self.dim() as u32),
        }
    }

    /// Roots of y1·P − y0·Q as unit vectors.
    fn p1_fiber(&self, y: [Complex64; 2]) -> LabResult<Fiber> {
        let (p, q) = self.binary.as_ref().expect("map of P^1");
        if p.len() == 3 {
            let c = [y[1] * p[0] - y[0] * q[0], y[1] * p[1] - y[0] * q[1], y[1] * p[2] - y[0] * q[2]];
            let zero = Complex64::new(0.0, 0.0);
            if c[0] != zero && c[2] != zero {
                let [r0, r1] = quadratic_roots(c[2], c[1], c[0]);
                return Ok(smallvec::smallvec![unit_from_affine(r0), unit_from_affine(r1)]);
            }
        }
        let form: SmallVec<[Complex64; 8]> = p.iter().zip(q).map(|(a, b)| y[1] * a - y[0] * b).collect();
        binary_form_roots(&form).ok_or(LabError::Exceptional { found: 0, expected: self.degree() })
    }
}

/// Roots of Σ c_j x0^j x1^(n−j) as unit vectors with multiplicity; None for
/// the zero form. Only exactly vanishing end coefficients produce the
/// points [0:1] and [1:0].
pub(crate) fn binary_form_roots(c: &[Complex64]) -> Option<Fiber> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let low = c.iter().position(|a| *a != zero)?;
    let high = c.iter().rposition(|a| *a != zero)?;
    let mut out = Fiber::new();
    for _ in 0..low {
        out.push([zero, one]);
    }
    for _ in high..c.len() - 1 {
        out.push([one, zero]);
    }
    let core = &c[low..=high];
    let roots: SmallVec<[Complex64; 8]> = match core.len() {
        1 => SmallVec::new(),
        2 => smallvec::smallvec![-core[0] / core[1]],
        3 => quadratic_roots(core[2], core[1], core[0]).into_iter().collect(),
        _ => dense_roots(core).into_iter().collect(),
    };
    for z in roots {
        out.push(unit_from_affine(z));
    }
    Some(out)
}

/// The unit representative of [z : 1], computed in the chart that keeps
/// precision for large |z|.
pub(crate) fn unit_from_affine(z: Complex64) -> [Complex64; 2] {
    let n2 = z.norm_sqr();
    if n2 <= 1.0 {
        let s = 1.0 / (1.0 + n2).sqrt();
        [z * s, Complex64::new(s, 0.0)]
    } else {
        let w = z.inv();
        let s = 1.0 / (1.0 + w.norm_sqr()).sqrt();
        [Complex64::new(s, 0.0), w * s]
    }
}

impl Preimage for RationalSelfMap {
    fn dim(&self) -> usize {
        self.exact.nvars() - 1
    }

    fn topological_degree(&self) -> LabResult<u32> {
        self.d_top
            .get_or_init(|| topological_degree(self, DEGREE_TRIALS, SeedStream::new(DEGREE_SEED)))
            .clone()
    }

    fn preimages(&self, y: &ProjectivePoint) -> LabResult<Vec<ProjectivePoint>> {
        let expected = self.topological_degree()?;
        let pts = self.raw_preimages(y)?;
        if pts.len() as u32 != expected {
            return Err(LabError::Exceptional { found: pts.len() as u32, expected });
        }
        Ok(pts)
    }

    fn affine_polynomial(&self) -> Option<&[Complex64]> {
        self.affine.as_deref()
    }

    fn preimages_p1(&self, y: [Complex64; 2]) -> LabResult<Fiber> {
        if self.binary.is_some() {
            self.p1_fiber(y)
        } else {
            Err(PolyError::DimensionMismatch { expected: 3, found: 2 }.into())
        }
    }
}

/// Modal preimage count over random targets. Trials with a shortfall are
/// treated as deficient; the maximal count must be attained by at least
/// half of the trials.
pub fn topological_degree(f: &RationalSelfMap, trials: usize, seed: SeedStream) -> LabResult<u32> {
    if f.dim() == 1 {
        return Ok(f.degree());
    }
    let mut rng = seed.rng(0);
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let y = sample_point_fs(f.dim(), &mut rng);
        match f.raw_preimages(&y) {
            Ok(pts) => counts.push(pts.len() as u32),
            Err(LabError::Exceptional { .. }) => counts.push(0),
            Err(e) => return Err(e),
        }
    }
    let top = counts.iter().copied().max().unwrap_or(0);
    let agreeing = counts.iter().filter(|&&c| c == top).count();
    let bound = f.degree().pow(2);
    if top == 0 || top > bound || 2 * agreeing < trials {
        return Err(LabError::InconsistentDegree(counts));
    }
    Ok(top)
}

/// f = h^{-1} ∘ g, whose graph is {(x, y) : g(x) = h(y)}.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub g: RationalSelfMap,
    pub h: RationalSelfMap,
}

impl Correspondence {
    pub fn new(g: RationalSelfMap, h: RationalSelfMap) -> LabResult<Self> {
        if g.dim() != h.dim() {
            return Err(LabError::InvalidParameter(format!(
                "g acts on P^{} but h on P^{}",
                g.dim(),
                h.dim()
            )));
        }
        Ok(Correspondence { g, h })
    }
}

impl Preimage for Correspondence {
    fn dim(&self) -> usize {
        self.g.dim()
    }

    fn topological_degree(&self) -> LabResult<u32> {
        self.g.topological_degree()
    }

    fn preimages(&self, y: &ProjectivePoint) -> LabResult<Vec<ProjectivePoint>> {
        let hy = self.h.apply(y).ok_or(LabError::Indeterminacy)?;
        self.g.preimages(&hy)
    }

    fn preimages_p1(&self, y: [Complex64; 2]) -> LabResult<Fiber> {
        let p = ProjectivePoint::new(y.to_vec())?;
        let hy = self.h.apply(&p).ok_or(LabError::Indeterminacy)?;
        self.g.preimages_p1([hy.coords()[0], hy.coords()[1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_real(c).unwrap()
    }

    #[test]
    fn square_map_fibers() {
        let f = RationalSelfMap::parse(&["x0^2", "x1^2"]).unwrap();
        let pre = f.preimages(&pt(&[1.0, 1.0])).unwrap();
        assert_eq!(pre.len(), 2);
        assert!(pre.iter().any(|p| p.same_point(&pt(&[1.0, 1.0]))));
        assert!(pre.iter().any(|p| p.same_point(&pt(&[-1.0, 1.0]))));
        let zero = f.preimages(&pt(&[0.0, 1.0])).unwrap();
        assert_eq!(zero.len(), 2);
        assert!(zero.iter().all(|p| p.same_point(&pt(&[0.0, 1.0]))));
    }

    #[test]
    fn cube_has_degree_three() {
        let f = RationalSelfMap::parse(&["x0^3", "x1^3"]).unwrap();
        assert_eq!(f.topological_degree().unwrap(), 3);
    }

    #[test]
    fn common_factor_is_removed() {
        let f = RationalSelfMap::parse(&["x0^2*x1", "x1^2*x0"]).unwrap();
        assert_eq!(f.degree(), 1);
    }

    #[test]
    fn cremona_fiber_is_one_point() {
        let s = RationalSelfMap::parse(&["x1*x2", "x0*x2", "x0*x1"]).unwrap();
        assert_eq!(s.topological_degree().unwrap(), 1);
        let mut rng = SeedStream::new(3).rng(0);
        for _ in 0..5 {
            let y = sample_point_fs(2, &mut rng);
            let pre = s.preimages(&y).unwrap();
            assert_eq!(pre.len(), 1);
            // σ is an involution, so the preimage is σ(y).
            assert!(pre[0].chordal(&s.apply(&y).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn pure_square_on_plane() {
        let f = RationalSelfMap::parse(&["x0^2", "x1^2", "x2^2"]).unwrap();
        assert_eq!(f.topological_degree().unwrap(), 4);
        let y = pt(&[1.0, 4.0, 9.0]);
        let pre = f.preimages(&y).unwrap();
        // Brute force: [±1 : ±2 : 3].
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                let want = pt(&[s1, 2.0 * s2, 3.0]);
                assert!(pre.iter().any(|p| p.chordal(&want) < 1e-8));
            }
        }
    }

    #[test]
    fn correspondence_pulls_back_through_g() {
        let g = RationalSelfMap::parse(&["x0^2", "x1^2"]).unwrap();
        let h = RationalSelfMap::parse(&["x0^3", "x1^3"]).unwrap();
        let f = Correspondence::new(g, h).unwrap();
        assert_eq!(f.topological_degree().unwrap(), 2);
        let y = ProjectivePoint::from_affine(Complex64::new(0.7, 0.2));
        for x in f.preimages(&y).unwrap() {
            let gx = x.affine().unwrap().powi(2);
            let hy = y.affine().unwrap().powi(3);
            assert!((gx - hy).norm() < 1e-12);
        }
    }

    #[test]
    fn correspondence_reports_indeterminacy() {
        let g = RationalSelfMap::parse(&["x1*x2", "x0*x2", "x0*x1"]).unwrap();
        let h = g.clone();
        let f = Correspondence::new(g, h).unwrap();
        assert_eq!(f.preimages(&pt(&[0.0, 0.0, 1.0])).unwrap_err(), LabError::Indeterminacy);
    }

    #[test]
    fn fast_fiber_matches_general_roots() {
        let f = RationalSelfMap::quadratic(Complex64::new(-0.4, 0.3)).unwrap();
        let y = ProjectivePoint::from_affine(Complex64::new(0.2, -1.1));
        let fib = f.preimages_p1([y.coords()[0], y.coords()[1]]).unwrap();
        for v in fib {
            let x = ProjectivePoint::new(v.to_vec()).unwrap();
            assert!(f.apply(&x).unwrap().chordal(&y) < 1e-12);
        }
    }

    #[test]
    fn infinity_is_totally_invariant_for_polynomials() {
        let f = RationalSelfMap::quadratic(Complex64::new(-1.0, 0.0)).unwrap();
        let pre = f.preimages(&ProjectivePoint::infinity()).unwrap();
        assert_eq!(pre.len(), 2);
        assert!(pre.iter().all(|p| p.same_point(&ProjectivePoint::infinity())));
    }
}
