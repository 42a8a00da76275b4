//! Decay of correlations along forward orbits.

use rayon::prelude::*;

use super::RationalSelfMap;
use crate::measure::EmpiricalMeasure;
use crate::stats::linear_fit;
use crate::test_function::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingResult {
    /// I_0, ..., I_{n_max}.
    pub correlations: Vec<Correlation>,
    /// Atoms whose forward orbit met the indeterminacy set.
    pub dropped: usize,
}

/// I_n = ∫ φ·(ψ∘f^n) dμ − ∫ φ dμ · ∫ ψ∘f^n dμ for n = 0..=n_max, with the
/// Monte Carlo standard error of each covariance.
pub fn mixing_correlations(
    f: &RationalSelfMap,
    mu: &EmpiricalMeasure,
    phi: &TestFunction,
    psi: &TestFunction,
    n_max: usize,
) -> MixingResult {
    let orbits: Vec<Option<(f64, f64, Vec<f64>)>> = mu
        .atoms()
        .par_iter()
        .map(|(x, w)| {
            let mut vals = Vec::with_capacity(n_max + 1);
            let mut y = x.clone();
            vals.push(psi.eval(&y));
            for _ in 0..n_max {
                y = f.apply(&y)?;
                vals.push(psi.eval(&y));
            }
            Some((*w, phi.eval(x), vals))
        })
        .collect();
    let kept: Vec<(f64, f64, Vec<f64>)> = orbits.iter().flatten().cloned().collect();
    let dropped = orbits.len() - kept.len();
    let mass: f64 = kept.iter().map(|(w, ..)| w).sum();
    let weight_sq: f64 = kept.iter().map(|(w, ..)| (w / mass).powi(2)).sum();
    let mean_phi = kept.iter().map(|(w, p, _)| w * p).sum::<f64>() / mass;
    let correlations = (0..=n_max)
        .map(|n| {
            let mean_psi = kept.iter().map(|(w, _, v)| w * v[n]).sum::<f64>() / mass;
            let prods: Vec<f64> = kept.iter().map(|(_, p, v)| (p - mean_phi) * (v[n] - mean_psi)).collect();
            let value = kept.iter().zip(&prods).map(|((w, ..), q)| w * q).sum::<f64>() / mass;
            let var = kept.iter().zip(&prods).map(|((w, ..), q)| w * (q - value).powi(2)).sum::<f64>() / mass;
            Correlation { n, value, stderr: (var * weight_sq).sqrt() }
        })
        .collect();
    MixingResult { correlations, dropped }
}

/// Slope of log|I_n| against n over the correlations with n ≥ 1 that are
/// resolved above three standard errors; None when fewer than two are.
pub fn decay_slope(correlations: &[Correlation]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = correlations
        .iter()
        .filter(|c| c.n >= 1 && c.value.abs() > 3.0 * c.stderr)
        .map(|c| (c.n as f64, c.value.abs().ln()))
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    linear_fit(&xs, &ys).map(|(slope, _)| slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::ProjectivePoint;
    use num_complex::Complex64;

    #[test]
    fn lag_zero_is_variance() {
        let f = RationalSelfMap::parse(&["x0^2", "x1^2"]).unwrap();
        let pts: Vec<_> = (0..64)
            .map(|j| ProjectivePoint::from_affine(Complex64::from_polar(1.0, 0.1 * j as f64)))
            .collect();
        let mu = EmpiricalMeasure::uniform(pts);
        let phi = TestFunction::real_cross(1, 0, 1);
        let r = mixing_correlations(&f, &mu, &phi, &phi, 3);
        let mean = mu.pair(&phi);
        let var = mu.integrate(|p| (phi.eval(p) - mean).powi(2));
        assert!((r.correlations[0].value - var).abs() < 1e-15);
        assert!(r.correlations[0].value >= 0.0);
    }

    #[test]
    fn slope_of_exact_geometric_decay() {
        let cs: Vec<Correlation> =
            (0..6).map(|n| Correlation { n, value: 0.3 * 0.5f64.powi(n as i32), stderr: 1e-9 }).collect();
        assert!((decay_slope(&cs).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        let noisy: Vec<Correlation> = cs.iter().map(|c| Correlation { stderr: 1.0, ..*c }).collect();
        assert_eq!(decay_slope(&noisy), None);
    }
}
