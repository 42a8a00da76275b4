use crate::projective::ProjectivePoint;
use crate::test_function::TestFunction;

/// Weighted point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<P = ProjectivePoint> {
    atoms: Vec<(P, f64)>,
}

impl<P> Default for EmpiricalMeasure<P> {
    fn default() -> Self {
        EmpiricalMeasure { atoms: Vec::new() }
    }
}

impl<P> EmpiricalMeasure<P> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: Vec<(P, f64)>) -> Self {
        debug_assert!(atoms.iter().all(|(_, w)| *w >= 0.0));
        EmpiricalMeasure { atoms }
    }

    /// Equal weights 1/n.
    pub fn uniform(points: Vec<P>) -> Self {
        let w = 1.0 / points.len().max(1) as f64;
        EmpiricalMeasure { atoms: points.into_iter().map(|p| (p, w)).collect() }
    }

    pub fn push(&mut self, point: P, weight: f64) {
        debug_assert!(weight >= 0.0);
        self.atoms.push((point, weight));
    }

    pub fn atoms(&self) -> &[(P, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Rescale to total mass one.
    pub fn normalized(mut self) -> Self {
        let t = self.total();
        if t > 0.0 {
            for (_, w) in self.atoms.iter_mut() {
                *w /= t;
            }
        }
        self
    }

    pub fn integrate<F: Fn(&P) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|(p, w)| w * f(p)).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = &P> {
        self.atoms.iter().map(|(p, _)| p)
    }
}

impl EmpiricalMeasure<ProjectivePoint> {
    pub fn pair(&self, psi: &TestFunction) -> f64 {
        self.integrate(|p| psi.eval(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_pairing() {
        let a = ProjectivePoint::from_real(&[1.0, 0.0]).unwrap();
        let b = ProjectivePoint::from_real(&[0.0, 1.0]).unwrap();
        let m = EmpiricalMeasure::from_atoms(vec![(a, 3.0), (b, 1.0)]).normalized();
        assert!((m.total() - 1.0).abs() < 1e-15);
        assert!((m.pair(&TestFunction::coordinate(1, 0)) - 0.75).abs() < 1e-15);
    }
}
