//! Quasi-psh witnesses on P^k and audits of the pluripotential constants.
//!
//! A witness is φ(z) = (1/n)·log(|f(z)|/‖z‖ⁿ) + shift for a form f of
//! degree n, so dd^c φ ≥ −ω_FS holds by construction.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{LabError, LabResult};
use crate::measure::EmpiricalMeasure;
use crate::poly::FloatPoly;
use crate::projective::{sample_point_fs, sample_point_real, ProjectivePoint};
use crate::rng::SeedStream;
use crate::stats::{linear_fit, wilson_interval, Estimate};

/// Local refinement rounds of the sup estimator.
pub const SUP_REFINE_ROUNDS: usize = 50;
/// Minimum sample count for mean normalization.
pub const MEAN_MIN_SAMPLES: usize = 10_000;
const SUP_STARTS: usize = 4;
const SUP_CANDIDATES: usize = 16;
const SUP_INITIAL_RADIUS: f64 = 0.25;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationKind {
    MaxZero,
    MeanZero,
}

/// Probability measure on P^k used for sampling and integration.
#[derive(Debug, Clone, Copy)]
pub enum ReferenceMeasure<'a> {
    /// Ω_FS, the unitarily invariant volume.
    Fs,
    /// m_FS, the image of the invariant probability on the real sphere.
    RealFs,
    /// Integration against the atoms of a given measure.
    Empirical(&'a EmpiricalMeasure),
}

#[derive(Debug, Clone)]
pub struct QpshWitness {
    f: FloatPoly,
    shift: f64,
    normalization: Option<NormalizationKind>,
}

impl QpshWitness {
    /// Witness of a nonzero form of positive degree. The form is divided by
    /// its Bombieri norm when that exceeds 1, which certifies |f| ≤ ‖z‖ⁿ
    /// and hence φ ≤ shift everywhere.
    pub fn new(f: FloatPoly) -> LabResult<Self> {
        if f.degree() == 0 || f.is_zero() {
            return Err(LabError::InvalidParameter("witness needs a nonzero form of positive degree".into()));
        }
        let b = bombieri_norm(&f);
        let f = if b > 1.0 { f.scale(&Complex64::new(1.0 / b, 0.0)) } else { f };
        Ok(QpshWitness { f, shift: 0.0, normalization: None })
    }

    pub fn k(&self) -> usize {
        self.f.nvars() - 1
    }

    pub fn degree(&self) -> u32 {
        self.f.degree()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn form(&self) -> &FloatPoly {
        &self.f
    }

    pub fn normalization(&self) -> Option<NormalizationKind> {
        self.normalization
    }

    /// (1/n)·log(|f(z)|/‖z‖ⁿ) without the shift.
    pub fn raw(&self, p: &ProjectivePoint) -> f64 {
        self.f.log_scaled_coords(p.coords()) / self.f.degree() as f64
    }

    pub fn value(&self, p: &ProjectivePoint) -> f64 {
        self.raw(p) + self.shift
    }

    fn with_shift(&self, shift: f64, kind: NormalizationKind) -> Self {
        QpshWitness { f: self.f.clone(), shift, normalization: Some(kind) }
    }
}

/// ‖f‖_B² = Σ |c_α|² α!/n!, so that |f(z)| ≤ ‖f‖_B ‖z‖ⁿ.
fn bombieri_norm(f: &FloatPoly) -> f64 {
    let n = f.degree();
    f.poly()
        .terms()
        .iter()
        .map(|(m, c)| {
            let w = crate::poly::homogeneous::multinomial_sqrt(n, &m.0);
            c.norm_sqr() / (w * w)
        })
        .sum::<f64>()
        .sqrt()
}

/// Compact set K ⊂ P^k given by a sampler and a membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Whole,
    /// The hyperplane {x_0 = 0}.
    Hyperplane,
    /// RP^k.
    Real,
    /// Closed chordal ball.
    Ball { center: ProjectivePoint, radius: f64 },
}

impl Region {
    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        match self {
            Region::Whole => true,
            Region::Hyperplane => p.coords()[0].norm() == 0.0,
            Region::Real => p.is_real(1e-12),
            Region::Ball { center, radius } => center.chordal(p) <= *radius,
        }
    }

    /// One draw from the natural measure on K; None when a rejection
    /// sampler misses.
    fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Option<ProjectivePoint> {
        match self {
            Region::Whole => Some(sample_point_fs(k, rng)),
            Region::Real => Some(sample_point_real(k, rng)),
            Region::Hyperplane => {
                let mut z = vec![Complex64::new(0.0, 0.0)];
                if k == 1 {
                    z.push(Complex64::new(1.0, 0.0));
                } else {
                    z.extend_from_slice(sample_point_fs(k - 1, rng).coords());
                }
                ProjectivePoint::new(z).ok()
            }
            Region::Ball { .. } => Some(sample_point_fs(k, rng)).filter(|p| self.contains(p)),
        }
    }

    /// Random point near p inside K.
    fn perturb<R: Rng + ?Sized>(&self, p: &ProjectivePoint, r: f64, rng: &mut R) -> Option<ProjectivePoint> {
        let z: Vec<Complex64> = p
            .coords()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if matches!(self, Region::Real) { 0.0 } else { rng.sample(StandardNormal) };
                if j == 0 && matches!(self, Region::Hyperplane) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c + Complex64::new(re, im) * r
                }
            })
            .collect();
        let q = ProjectivePoint::new(z).ok()?;
        self.contains(&q).then_some(q)
    }
}

/// Estimated sup over K of g: best of `n_samples` draws, then local search
/// with radius halving from the best few draws.
pub fn estimate_sup<G: Fn(&ProjectivePoint) -> f64>(g: G, k: usize, region: &Region, n_samples: usize, seed: SeedStream) -> Option<f64> {
    let mut rng = seed.rng(0);
    let mut top: Vec<(f64, ProjectivePoint)> = Vec::with_capacity(SUP_STARTS + 1);
    for _ in 0..n_samples {
        let Some(p) = region.sample(k, &mut rng) else { continue };
        let v = g(&p);
        if top.len() < SUP_STARTS || v > top[top.len() - 1].0 {
            top.push((v, p));
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(SUP_STARTS);
        }
    }
    if top.is_empty() {
        return None;
    }
    let mut best = f64::NEG_INFINITY;
    for (mut v, mut p) in top {
        if v == f64::NEG_INFINITY {
            best = best.max(v);
            continue;
        }
        let mut r = SUP_INITIAL_RADIUS;
        for _ in 0..SUP_REFINE_ROUNDS {
            let mut improved = None;
            for _ in 0..SUP_CANDIDATES {
                if let Some(q) = region.perturb(&p, r, &mut rng) {
                    let w = g(&q);
                    if w > improved.as_ref().map_or(v, |(b, _)| *b) {
                        improved = Some((w, q));
                    }
                }
            }
            match improved {
                Some((w, q)) => {
                    v = w;
                    p = q;
                }
                None => r *= 0.5,
            }
        }
        best = best.max(v);
    }
    Some(best)
}

/// Values of g at weighted points drawn from the measure on P^k, in a
/// fixed order independent of the thread count.
fn sample_values<G: Fn(&ProjectivePoint) -> f64 + Sync>(
    measure: &ReferenceMeasure,
    k: usize,
    n_samples: usize,
    seed: SeedStream,
    g: G,
) -> Vec<(f64, f64)> {
    match measure {
        ReferenceMeasure::Empirical(mu) => mu.atoms().par_iter().map(|(p, w)| (g(p), *w)).collect(),
        ReferenceMeasure::Fs | ReferenceMeasure::RealFs => {
            let real = matches!(measure, ReferenceMeasure::RealFs);
            let chunks = n_samples.div_ceil(CHUNK);
            let parts: Vec<Vec<(f64, f64)>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = seed.rng(c as u64);
                    let count = CHUNK.min(n_samples - c * CHUNK);
                    (0..count)
                        .map(|_| {
                            let p = if real { sample_point_real(k, &mut rng) } else { sample_point_fs(k, &mut rng) };
                            (g(&p), 1.0 / n_samples as f64)
                        })
                        .collect()
                })
                .collect();
            parts.concat()
        }
    }
}

fn weighted_estimate(samples: &[(f64, f64)]) -> Estimate {
    let mass: f64 = samples.iter().map(|(_, w)| w).sum();
    let mean = samples.iter().map(|(v, w)| v * w).sum::<f64>() / mass;
    let var = samples.iter().map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / mass;
    let w2: f64 = samples.iter().map(|(_, w)| (w / mass).powi(2)).sum();
    Estimate { mean, stderr: (var * w2).sqrt(), n: samples.len() }
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub witness: QpshWitness,
    /// Standard error of the normalizing constant (0 for the sup).
    pub stderr: f64,
}

/// Shift the witness so that max φ = 0 or ∫ φ dμ = 0.
pub fn normalize_qpsh(
    w: &QpshWitness,
    mode: NormalizationKind,
    measure: &ReferenceMeasure,
    n_samples: usize,
    seed: SeedStream,
) -> LabResult<Normalized> {
    match mode {
        NormalizationKind::MaxZero => {
            let max = estimate_sup(|p| w.raw(p), w.k(), &Region::Whole, n_samples, seed)
                .ok_or_else(|| LabError::InvalidParameter("no samples".into()))?;
            Ok(Normalized { witness: w.with_shift(-max, mode), stderr: 0.0 })
        }
        NormalizationKind::MeanZero => {
            if n_samples < MEAN_MIN_SAMPLES && !matches!(measure, ReferenceMeasure::Empirical(_)) {
                return Err(LabError::InvalidParameter(format!("mean normalization needs at least {MEAN_MIN_SAMPLES} samples")));
            }
            let est = weighted_estimate(&sample_values(measure, w.k(), n_samples, seed, |p| w.raw(p)));
            if !est.mean.is_finite() {
                return Err(LabError::InvalidParameter("witness is not integrable against this measure".into()));
            }
            Ok(Normalized { witness: w.with_shift(-est.mean, mode), stderr: est.stderr })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct R1Audit {
    pub k: usize,
    /// sup of each mean-zero normalized witness.
    pub sups: Vec<f64>,
    pub max_sup: f64,
    /// (1 + log k)/2.
    pub bound: f64,
    pub pass: bool,
}

pub const R1_TOLERANCE: f64 = 0.05;

/// sup φ over Kostlan witnesses normalized by ∫ φ dΩ_FS = 0, against the
/// bound (1 + log k)/2.
pub fn r1_bound_audit(k: usize, n_witnesses: usize, degree_pool: &[u32], n_samples: usize, seed: SeedStream) -> LabResult<R1Audit> {
    if k == 0 || degree_pool.is_empty() || degree_pool.contains(&0) {
        return Err(LabError::InvalidParameter("need k ≥ 1 and positive degrees".into()));
    }
    let sups = (0..n_witnesses)
        .into_par_iter()
        .map(|i| {
            let s = seed.child(i as u64);
            let degree = degree_pool[i % degree_pool.len()];
            let f = FloatPoly::random_kostlan(k + 1, degree, false, &mut s.rng(0));
            let w = QpshWitness::new(f)?;
            let mean = normalize_qpsh(&w, NormalizationKind::MeanZero, &ReferenceMeasure::Fs, n_samples, s.child(1))?;
            let max = estimate_sup(|p| w.raw(p), k, &Region::Whole, n_samples / 4, s.child(2))
                .ok_or_else(|| LabError::InvalidParameter("no samples".into()))?;
            Ok(max + mean.witness.shift())
        })
        .collect::<LabResult<Vec<f64>>>()?;
    let max_sup = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = 0.5 * (1.0 + (k as f64).ln());
    Ok(R1Audit { k, sups, max_sup, bound, pass: max_sup <= bound + R1_TOLERANCE })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModerateIntegral {
    pub alpha: f64,
    pub estimate: Estimate,
    /// The largest 0.1% of the integrand samples carry more than half the sum.
    pub heavy_tail: bool,
}

/// ∫ exp(−α φ) dμ for a max-normalized witness, for each α on a common
/// sample.
pub fn moderate_integral(
    measure: &ReferenceMeasure,
    w: &QpshWitness,
    alphas: &[f64],
    n_samples: usize,
    seed: SeedStream,
) -> LabResult<Vec<ModerateIntegral>> {
    if w.normalization() != Some(NormalizationKind::MaxZero) {
        return Err(LabError::InvalidParameter("moderation integrals need a max-normalized witness".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(LabError::InvalidParameter(format!("alpha = {a} outside (0, 1]")));
    }
    let values = sample_values(measure, w.k(), n_samples, seed, |p| w.value(p));
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let samples: Vec<(f64, f64)> = values.iter().map(|(v, wt)| ((-alpha * v).exp(), *wt)).collect();
            let mut terms: Vec<f64> = samples.iter().map(|(x, wt)| x * wt).collect();
            terms.sort_by(|a, b| b.total_cmp(a));
            let total: f64 = terms.iter().sum();
            let top = terms.len().div_ceil(1000);
            let heavy_tail = terms[..top].iter().sum::<f64>() > 0.5 * total;
            ModerateIntegral { alpha, estimate: weighted_estimate(&samples), heavy_tail }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceRow {
    pub t: f64,
    pub hits: usize,
    pub trials: usize,
    pub fraction: f64,
    /// 95% Wilson interval; with no hits only the upper end is informative.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceProfile {
    pub rows: Vec<ExceedanceRow>,
    /// Slope of log μ(φ < −t) against t over the rows with hits.
    pub slope: Option<f64>,
}

/// μ(φ < −t) pooled over mean-normalized witnesses, each with its own sample.
pub fn exceedance_profile(
    measure: &ReferenceMeasure,
    witnesses: &[QpshWitness],
    t_grid: &[f64],
    n_samples: usize,
    seed: SeedStream,
) -> LabResult<ExceedanceProfile> {
    if t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid.iter().any(|t| *t < 0.0) {
        return Err(LabError::InvalidParameter("t grid must be increasing and nonnegative".into()));
    }
    if witnesses.iter().any(|w| w.normalization() != Some(NormalizationKind::MeanZero)) {
        return Err(LabError::InvalidParameter("exceedance needs mean-normalized witnesses".into()));
    }
    let mut hits = vec![0usize; t_grid.len()];
    let mut trials = 0usize;
    for (i, w) in witnesses.iter().enumerate() {
        let values = sample_values(measure, w.k(), n_samples, seed.child(i as u64), |p| w.value(p));
        trials += values.len();
        for (v, _) in values {
            for (h, t) in hits.iter_mut().zip(t_grid) {
                if v < -t {
                    *h += 1;
                }
            }
        }
    }
    let rows: Vec<ExceedanceRow> = t_grid
        .iter()
        .zip(&hits)
        .map(|(&t, &h)| {
            let (lower, upper) = wilson_interval(h, trials);
            ExceedanceRow { t, hits: h, trials, fraction: h as f64 / trials.max(1) as f64, lower, upper }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.hits > 0).map(|r| (r.t, r.fraction.ln())).unzip();
    let slope = if xs.len() >= 2 { linear_fit(&xs, &ys).map(|(s, _)| s) } else { None };
    Ok(ExceedanceProfile { rows, slope })
}

/// min over max-normalized witnesses of exp(sup_K φ), an upper bound for
/// cap(K) up to the accuracy of the sup estimates.
pub fn capacity_upper_bound(region: &Region, witnesses: &[QpshWitness], n_samples: usize, seed: SeedStream) -> LabResult<f64> {
    if witnesses.is_empty() {
        return Err(LabError::InvalidParameter("empty witness list".into()));
    }
    if witnesses.iter().any(|w| w.normalization() != Some(NormalizationKind::MaxZero)) {
        return Err(LabError::InvalidParameter("capacity needs max-normalized witnesses".into()));
    }
    if *region == Region::Whole {
        // sup over P^k is the max, which the normalization sets to 0.
        return Ok(1.0);
    }
    let mut best = 1.0f64;
    for (i, w) in witnesses.iter().enumerate() {
        let sup = estimate_sup(|p| w.value(p), w.k(), region, n_samples, seed.child(i as u64))
            .ok_or_else(|| LabError::InvalidParameter("no sample point fell in K".into()))?;
        best = best.min(sup.min(0.0).exp());
    }
    Ok(best)
}

/// u(x) = Σ w_i log d(x, p_i) for a measure on P^1, with d the chordal
/// distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordalPotential {
    pub value: f64,
    /// x coincides with an atom, where u = −∞.
    pub atom_hit: bool,
}

pub fn chordal_potential_eval(nu: &EmpiricalMeasure, x: &ProjectivePoint) -> LabResult<ChordalPotential> {
    if x.dim() != 1 || nu.atoms().iter().any(|(p, _)| p.dim() != 1) {
        return Err(LabError::Unsupported("chordal potentials are defined on P^1".into()));
    }
    let mut value = 0.0;
    let mut atom_hit = false;
    for (p, w) in nu.atoms() {
        let d = x.chordal(p);
        if d == 0.0 {
            atom_hit = true;
        }
        value += w * d.ln();
    }
    Ok(ChordalPotential { value: if atom_hit { f64::NEG_INFINITY } else { value }, atom_hit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn witness(text: &str, nvars: usize) -> QpshWitness {
        QpshWitness::new(parse_poly(text, nvars).unwrap().to_float()).unwrap()
    }

    #[test]
    fn power_of_coordinate_has_max_zero() {
        let w = witness("x0^6", 2);
        let n = normalize_qpsh(&w, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, 2000, SeedStream::new(1)).unwrap();
        assert!(n.witness.shift().abs() < 1e-8, "{}", n.witness.shift());
    }

    #[test]
    fn product_max_is_half_log_half() {
        let w = witness("x0^3*x1^3", 2);
        let max = estimate_sup(|p| w.raw(p), 1, &Region::Whole, 2000, SeedStream::new(2)).unwrap();
        assert!((max - 0.5 * 0.5f64.ln()).abs() < 1e-8, "{max}");
    }

    #[test]
    fn bombieri_scaling_certifies_upper_bound() {
        let mut rng = SeedStream::new(3).rng(0);
        let w = QpshWitness::new(FloatPoly::random_kostlan(3, 4, false, &mut rng)).unwrap();
        let mut rng = SeedStream::new(4).rng(0);
        for _ in 0..10_000 {
            assert!(w.value(&sample_point_fs(2, &mut rng)) <= w.shift());
        }
    }

    #[test]
    fn normalizations_are_idempotent() {
        let mut rng = SeedStream::new(5).rng(0);
        let w = QpshWitness::new(FloatPoly::random_kostlan(2, 3, false, &mut rng)).unwrap();
        let s = SeedStream::new(6);
        let a = normalize_qpsh(&w, NormalizationKind::MeanZero, &ReferenceMeasure::Fs, 20_000, s).unwrap();
        let b = normalize_qpsh(&a.witness, NormalizationKind::MeanZero, &ReferenceMeasure::Fs, 20_000, s).unwrap();
        assert!((a.witness.shift() - b.witness.shift()).abs() < 1e-12);
        let c = normalize_qpsh(&b.witness, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, 2000, s).unwrap();
        let d = normalize_qpsh(&c.witness, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, 2000, s).unwrap();
        assert_eq!(c.witness.shift(), d.witness.shift());
        assert!(normalize_qpsh(&w, NormalizationKind::MeanZero, &ReferenceMeasure::Fs, 100, s).is_err());
    }

    #[test]
    fn mean_of_linear_form_matches_sphere_integral() {
        // ∫ log|z_0|/‖z‖ dΩ_FS on P^2 is −H_2/2 = −3/4.
        let w = witness("x0", 3);
        let n = normalize_qpsh(&w, NormalizationKind::MeanZero, &ReferenceMeasure::Fs, 200_000, SeedStream::new(7)).unwrap();
        assert!((n.witness.shift() - 0.75).abs() < 4.0 * n.stderr, "{} ± {}", n.witness.shift(), n.stderr);
    }

    #[test]
    fn moderation_integral_of_coordinate() {
        // |z_0|² is uniform under Ω_FS on P^1, so E|z_0|^{-1/2} = 4/3.
        let w = witness("x0^4", 2);
        let w = normalize_qpsh(&w, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, 2000, SeedStream::new(8)).unwrap().witness;
        let r = moderate_integral(&ReferenceMeasure::Fs, &w, &[1e-6, 0.25, 0.5], 400_000, SeedStream::new(9)).unwrap();
        assert!((r[0].estimate.mean - 1.0).abs() < 1e-5);
        assert!(r[0].estimate.mean <= r[1].estimate.mean && r[1].estimate.mean <= r[2].estimate.mean);
        let e = r[2].estimate;
        assert!((e.mean - 4.0 / 3.0).abs() < 4.0 * e.stderr, "{e:?}");
        // On RP^1: E|cos θ|^{-1/2} = Γ(1/4)/(√π Γ(3/4)).
        let exact = 3.625_609_908_221_908 / (std::f64::consts::PI.sqrt() * 1.225_416_702_465_178);
        let r = moderate_integral(&ReferenceMeasure::RealFs, &w, &[0.5], 400_000, SeedStream::new(10)).unwrap();
        assert!((r[0].estimate.mean - exact).abs() < 4.0 * r[0].estimate.stderr, "{:?} {exact}", r[0]);
        assert!(moderate_integral(&ReferenceMeasure::Fs, &w, &[1.5], 10, SeedStream::new(1)).is_err());
    }

    #[test]
    fn exceedance_of_linear_form_is_exponential() {
        // φ = log|z_0|/‖z‖ + 1/2 on P^1: Ω_FS(φ < −t) = exp(−2t − 1).
        let w = witness("x0", 2);
        let w = normalize_qpsh(&w, NormalizationKind::MeanZero, &ReferenceMeasure::Fs, 100_000, SeedStream::new(11)).unwrap().witness;
        let grid = [0.0, 1.0, 2.0, 3.0];
        let p = exceedance_profile(&ReferenceMeasure::Fs, &[w], &grid, 200_000, SeedStream::new(12)).unwrap();
        assert!(p.rows[0].fraction <= 1.0);
        assert!(p.rows.windows(2).all(|r| r[0].hits >= r[1].hits));
        assert!((p.slope.unwrap() + 2.0).abs() < 0.15, "{:?}", p.slope);
    }

    #[test]
    fn capacity_extremes() {
        let w = witness("x0", 3);
        let w = normalize_qpsh(&w, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, 2000, SeedStream::new(13)).unwrap().witness;
        let s = SeedStream::new(14);
        assert_eq!(capacity_upper_bound(&Region::Whole, &[w.clone()], 1000, s).unwrap(), 1.0);
        assert_eq!(capacity_upper_bound(&Region::Hyperplane, &[w.clone()], 1000, s).unwrap(), 0.0);
        assert!(capacity_upper_bound(&Region::Whole, &[], 1000, s).is_err());
    }

    #[test]
    fn capacity_is_antitone_on_nested_balls() {
        let mut rng = SeedStream::new(15).rng(0);
        let ws: Vec<QpshWitness> = (0..4)
            .map(|_| {
                let w = QpshWitness::new(FloatPoly::random_kostlan(2, 2, false, &mut rng)).unwrap();
                normalize_qpsh(&w, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, 2000, SeedStream::new(16)).unwrap().witness
            })
            .collect();
        let center = ProjectivePoint::from_affine(Complex64::new(0.3, -0.2));
        let mut last = 0.0;
        for radius in [0.2, 0.5, 0.9] {
            let b = capacity_upper_bound(&Region::Ball { center: center.clone(), radius }, &ws, 4000, SeedStream::new(17)).unwrap();
            assert!(b >= last - 1e-9, "{radius}: {b} < {last}");
            last = b;
        }
    }

    #[test]
    fn chordal_potential_values() {
        let nu = EmpiricalMeasure::uniform(vec![ProjectivePoint::infinity()]);
        let u = chordal_potential_eval(&nu, &ProjectivePoint::from_affine(Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(u.value, 0.0);
        let hit = chordal_potential_eval(&nu, &ProjectivePoint::infinity()).unwrap();
        assert!(hit.atom_hit && hit.value == f64::NEG_INFINITY);
        // ∫ log d(x, ·) dΩ_FS = −1/2 on P^1.
        let mut rng = SeedStream::new(18).rng(0);
        let pts: Vec<ProjectivePoint> = (0..100_000).map(|_| sample_point_fs(1, &mut rng)).collect();
        let nu = EmpiricalMeasure::uniform(pts);
        let u = chordal_potential_eval(&nu, &ProjectivePoint::from_affine(Complex64::new(0.7, 0.4))).unwrap();
        assert!((u.value + 0.5).abs() < 0.01, "{}", u.value);
        assert!(u.value <= 0.0);
    }

    #[test]
    fn r1_audit_on_projective_line() {
        let a = r1_bound_audit(1, 20, &[1, 2, 3], 20_000, SeedStream::new(19)).unwrap();
        assert_eq!(a.bound, 0.5);
        assert!(a.pass, "{:?}", a.sups);
        assert!(a.sups.iter().all(|s| *s > 0.0));
    }
}
