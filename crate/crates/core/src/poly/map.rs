use std::fmt;

use num_complex::Complex64;

use super::coeff::{Coefficient, QComplex};
use super::gcd::poly_gcd_many;
use super::homogeneous::HomogeneousPoly;
use super::parse::parse_affine;
use super::sparse::Poly;
use crate::error::PolyError;
use crate::projective::ProjectivePoint;

/// Tuple of homogeneous forms of one degree defining a map P^k --> P^k'.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap<C> {
    components: Vec<HomogeneousPoly<C>>,
    reduced: bool,
}

pub type ExactMap = PolyMap<QComplex>;
pub type FloatMap = PolyMap<Complex64>;

impl<C: Coefficient> PolyMap<C> {
    pub fn new(components: Vec<HomogeneousPoly<C>>) -> Result<Self, PolyError> {
        let first = components.first().ok_or(PolyError::ZeroMap)?;
        let (nv, deg) = (first.nvars(), first.degree());
        if components.iter().any(|c| c.nvars() != nv || c.degree() != deg) {
            return Err(PolyError::IncompatibleComponents);
        }
        if components.iter().all(|c| c.is_zero()) {
            return Err(PolyError::ZeroMap);
        }
        Ok(PolyMap { components, reduced: false })
    }

    pub fn components(&self) -> &[HomogeneousPoly<C>] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components[0].degree()
    }

    pub fn nvars(&self) -> usize {
        self.components[0].nvars()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn to_float(&self) -> FloatMap {
        PolyMap { components: self.components.iter().map(|c| c.to_float()).collect(), reduced: self.reduced }
    }

    /// Raw image vector at a representative.
    pub fn eval_coords(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|c| c.poly().eval_c64(z)).collect()
    }

    /// Image of a point; None at (numerical) indeterminacy, where every
    /// component vanishes to rounding level.
    pub fn apply(&self, p: &ProjectivePoint) -> Option<ProjectivePoint> {
        let v = self.eval_coords(p.coords());
        let size = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scale = self.components.iter().map(|c| c.poly().l1_norm()).fold(0.0, f64::max);
        if !(size > 1e-13 * scale) {
            return None;
        }
        ProjectivePoint::new(v).ok()
    }

    /// Components f_i(g_0, ..., g_k), expanded but not reduced.
    pub fn compose_raw(&self, inner: &PolyMap<C>) -> Result<PolyMap<C>, PolyError> {
        if self.nvars() != inner.components.len() {
            return Err(PolyError::DimensionMismatch { expected: self.nvars(), found: inner.components.len() });
        }
        let subs: Vec<Poly<C>> = inner.components.iter().map(|c| c.poly().clone()).collect();
        let degree = self.degree() * inner.degree();
        let comps = self
            .components
            .iter()
            .map(|c| HomogeneousPoly::new(c.poly().compose(&subs), degree))
            .collect::<Result<Vec<_>, _>>()?;
        PolyMap::new(comps)
    }

    /// Divide the components by their gcd (exact mode only).
    pub fn reduce(&self) -> Result<PolyMap<C>, PolyError> {
        if !C::EXACT {
            return Err(PolyError::InexactMode);
        }
        let polys: Vec<Poly<C>> = self.components.iter().map(|c| c.poly().clone()).collect();
        let g = poly_gcd_many(&polys);
        let gdeg = g.total_degree().unwrap_or(0);
        let degree = self.degree() - gdeg;
        let comps = polys
            .iter()
            .map(|p| {
                let q = if p.is_zero() { p.clone() } else { p.exact_div(&g).expect("gcd divides") };
                HomogeneousPoly::new(q, degree)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMap { components: comps, reduced: true })
    }
}

/// f∘g with the common factor of the components removed; the degree of the
/// result is the algebraic degree of the composite.
pub fn compose_and_reduce<C: Coefficient>(f: &PolyMap<C>, g: &PolyMap<C>) -> Result<PolyMap<C>, PolyError> {
    if !C::EXACT {
        return Err(PolyError::InexactMode);
    }
    f.compose_raw(g)?.reduce()
}

/// Parse a map from one polynomial text per component.
pub fn parse_map<S: AsRef<str>>(texts: &[S], nvars: usize) -> Result<ExactMap, PolyError> {
    let mut comps = Vec::with_capacity(texts.len());
    let mut degree = None;
    for t in texts {
        let p = parse_affine(t.as_ref(), nvars)?;
        match p.homogeneity() {
            Ok(Some(d)) => match degree {
                Some(d0) if d0 != d => return Err(PolyError::IncompatibleComponents),
                _ => degree = Some(d),
            },
            Ok(None) => {}
            Err((first, second)) => return Err(PolyError::Inhomogeneous { first, second }),
        }
        comps.push(p);
    }
    let degree = degree.ok_or(PolyError::ZeroMap)?;
    let comps = comps.into_iter().map(|p| HomogeneousPoly::new(p, degree)).collect::<Result<Vec<_>, _>>()?;
    PolyMap::new(comps)
}

impl<C: Coefficient> fmt::Display for PolyMap<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " : ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}
