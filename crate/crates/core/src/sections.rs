//! Random sections of O(n) on P^k and their zeros.
//!
//! Sections are Gaussian in the orthonormal monomial basis, which induces the
//! invariant probability on the projectivized section space. Zero currents
//! are paired with scalar test functions either through their points (curves
//! in P^1, complete intersections in P^2) or, for curves in P^2, by averaging
//! over random lines.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{LabError, LabResult};
use crate::measure::EmpiricalMeasure;
use crate::poly::homogeneous::FloatPoly;
use crate::poly::line::{restrict_to_line, LineRestriction};
use crate::poly::resultant::bivariate_common_zeros;
use crate::poly::roots::univariate_roots;
use crate::projective::{random_unitary, sample_point_fs, ProjectivePoint};
use crate::report::{num, Table};
use crate::rng::SeedStream;
use crate::stats::{linear_fit, median, wilson_interval, Estimate};
use crate::test_function::TestFunction;

/// Default number of random lines for slicing estimates.
pub const DEFAULT_LINES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionEnsemble {
    pub k: usize,
    pub n: u32,
    pub l: usize,
    pub field: Field,
}

impl SectionEnsemble {
    pub fn new(k: usize, n: u32, l: usize, field: Field) -> LabResult<Self> {
        if k == 0 || n == 0 || l == 0 || l > k {
            return Err(LabError::InvalidParameter(format!("need k >= 1, n >= 1, 1 <= l <= k (got k={k}, n={n}, l={l})")));
        }
        Ok(SectionEnsemble { k, n, l, field })
    }

    pub fn with_degree(self, n: u32) -> Self {
        SectionEnsemble { n, ..self }
    }
}

/// l independent sections of the ensemble.
pub fn sample_section<R: Rng + ?Sized>(ens: &SectionEnsemble, rng: &mut R) -> Vec<FloatPoly> {
    (0..ens.l)
        .map(|_| FloatPoly::random_kostlan(ens.k + 1, ens.n, ens.field == Field::Real, rng))
        .collect()
}

/// Zero set of l sections on P^k.
#[derive(Debug, Clone)]
pub enum ZeroSet {
    /// Finitely many points with multiplicities (weights).
    Points { measure: EmpiricalMeasure, n: u32, l: usize },
    /// A curve in P^2, kept as its equation.
    Hypersurface { section: FloatPoly },
}

impl ZeroSet {
    pub fn points(&self) -> LabResult<&EmpiricalMeasure> {
        match self {
            ZeroSet::Points { measure, .. } => Ok(measure),
            ZeroSet::Hypersurface { .. } => Err(LabError::LazyZeroSet),
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            ZeroSet::Points { n, .. } => *n,
            ZeroSet::Hypersurface { section } => section.degree(),
        }
    }

    pub fn codimension(&self) -> usize {
        match self {
            ZeroSet::Points { l, .. } => *l,
            ZeroSet::Hypersurface { .. } => 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ZeroSet::Points { measure, .. } => measure.atoms().first().map(|(p, _)| p.dim()).unwrap_or(0),
            ZeroSet::Hypersurface { section } => section.nvars() - 1,
        }
    }
}

pub fn zero_set(sections: &[FloatPoly], k: usize) -> LabResult<ZeroSet> {
    let l = sections.len();
    if sections.iter().any(|s| s.nvars() != k + 1) {
        return Err(LabError::InvalidParameter("sections do not live on P^k".into()));
    }
    let n = sections.first().map(|s| s.degree()).unwrap_or(0);
    match (k, l) {
        (1, 1) => {
            let roots = univariate_roots(&sections[0])?;
            let atoms = roots.roots.into_iter().map(|r| (r.point, r.multiplicity as f64)).collect();
            Ok(ZeroSet::Points { measure: EmpiricalMeasure::from_atoms(atoms), n, l })
        }
        (2, 1) => Ok(ZeroSet::Hypersurface { section: sections[0].clone() }),
        (2, 2) => {
            let z = bivariate_common_zeros(&sections[0], &sections[1])?;
            let atoms = z.roots.into_iter().map(|r| (r.point, r.multiplicity as f64)).collect();
            Ok(ZeroSet::Points { measure: EmpiricalMeasure::from_atoms(atoms), n, l })
        }
        _ => Err(LabError::Unsupported(format!("zero sets for k={k}, l={l}"))),
    }
}

/// Pairing of a zero current with a test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing {
    pub value: f64,
    pub stderr: f64,
    /// Lines found inside the curve and resampled.
    pub degenerate_lines: usize,
}

/// A line drawn from the unitarily invariant measure on lines of P^2.
fn random_line<R: Rng + ?Sized>(rng: &mut R) -> (ProjectivePoint, ProjectivePoint) {
    let u = random_unitary(3, rng);
    let col = |j: usize| ProjectivePoint::new((0..3).map(|i| u[i][j]).collect()).unwrap();
    (col(0), col(1))
}

/// <[Z], ψ ω^(k-l)>: a weighted sum over points, or for a curve in P^2 the
/// mean over `m_lines` random lines of the sum of ψ over the intersection.
pub fn pair_zero_current<R: Rng + ?Sized>(
    zs: &ZeroSet,
    psi: &TestFunction,
    m_lines: usize,
    rng: &mut R,
) -> LabResult<Pairing> {
    if psi.dim != zs.dim() {
        return Err(LabError::InvalidParameter(format!("test function on P^{} paired with a zero set in P^{}", psi.dim, zs.dim())));
    }
    match zs {
        ZeroSet::Points { measure, .. } => Ok(Pairing { value: measure.pair(psi), stderr: 0.0, degenerate_lines: 0 }),
        ZeroSet::Hypersurface { section } => {
            let psis = [psi.clone()];
            let (est, degenerate) = crofton(section, &psis, m_lines, rng)?;
            Ok(Pairing { value: est[0].mean, stderr: est[0].stderr, degenerate_lines: degenerate })
        }
    }
}

/// Slicing estimates for several test functions on the same lines.
fn crofton<R: Rng + ?Sized>(
    section: &FloatPoly,
    psis: &[TestFunction],
    m_lines: usize,
    rng: &mut R,
) -> LabResult<(Vec<Estimate>, usize)> {
    let cap = m_lines / 100;
    let mut degenerate = 0;
    let mut sums = vec![(0.0, 0.0); psis.len()];
    let mut done = 0;
    while done < m_lines {
        let (a, b) = random_line(rng);
        let LineRestriction { poly, in_zero_set } = restrict_to_line(section, &a, &b)?;
        if in_zero_set {
            degenerate += 1;
            if degenerate > cap {
                return Err(LabError::TooManyAborts { aborted: degenerate, attempted: done + degenerate });
            }
            continue;
        }
        let roots = univariate_roots(&poly)?;
        let pts: Vec<(ProjectivePoint, f64)> = roots
            .roots
            .iter()
            .map(|r| (LineRestriction::point(&a, &b, &r.point), r.multiplicity as f64))
            .collect();
        for (s, psi) in sums.iter_mut().zip(psis) {
            let v: f64 = pts.iter().map(|(p, w)| w * psi.eval(p)).sum();
            s.0 += v;
            s.1 += v * v;
        }
        done += 1;
    }
    Ok((sums.into_iter().map(|(s, s2)| Estimate::from_sums(s, s2, m_lines)).collect(), degenerate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMethod {
    Direct,
    Crofton { m_lines: usize },
}

/// D = n^(-l) <[Z], ψ ω^(k-l)> - ∫ ψ ω^k.
pub fn discrepancy<R: Rng + ?Sized>(
    sections: &[FloatPoly],
    psi: &TestFunction,
    method: PairingMethod,
    rng: &mut R,
) -> LabResult<f64> {
    Ok(discrepancies(sections, std::slice::from_ref(psi), method, rng)?[0])
}

/// Discrepancies of one zero set against several test functions.
pub fn discrepancies<R: Rng + ?Sized>(
    sections: &[FloatPoly],
    psis: &[TestFunction],
    method: PairingMethod,
    rng: &mut R,
) -> LabResult<Vec<f64>> {
    let k = sections.first().map(|s| s.nvars() - 1).unwrap_or(0);
    let n = sections[0].degree() as f64;
    let l = sections.len() as i32;
    let zs = zero_set(sections, k)?;
    let values: Vec<f64> = match (&zs, method) {
        (ZeroSet::Points { measure, .. }, _) => psis.iter().map(|p| measure.pair(p)).collect(),
        (ZeroSet::Hypersurface { section }, PairingMethod::Crofton { m_lines }) => {
            crofton(section, psis, m_lines, rng)?.0.iter().map(|e| e.mean).collect()
        }
        (ZeroSet::Hypersurface { section }, PairingMethod::Direct) => {
            crofton(section, psis, DEFAULT_LINES, rng)?.0.iter().map(|e| e.mean).collect()
        }
    };
    Ok(values.iter().zip(psis).map(|(v, p)| v / n.powi(l) - p.fs_integral()).collect())
}

/// One discrepancy sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancySample {
    pub n: u32,
    pub trial: usize,
    pub psi: String,
    pub d: f64,
}

/// Discrepancies over a degree grid; trial t at degree n uses the stream
/// `seed.child(n).rng(t)`, and samples are returned in (n, trial, psi) order.
pub fn discrepancy_samples(
    ens: &SectionEnsemble,
    psis: &[TestFunction],
    n_grid: &[u32],
    trials: usize,
    method: PairingMethod,
    seed: SeedStream,
) -> LabResult<Vec<DiscrepancySample>> {
    let mut out = Vec::with_capacity(n_grid.len() * trials * psis.len());
    for &n in n_grid {
        let e = ens.with_degree(n);
        let s = seed.child(n as u64);
        let rows: Vec<LabResult<Vec<f64>>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = s.rng(t as u64);
                let sec = sample_section(&e, &mut rng);
                discrepancies(&sec, psis, method, &mut rng)
            })
            .collect();
        for (t, r) in rows.into_iter().enumerate() {
            for (d, psi) in r?.into_iter().zip(psis) {
                out.push(DiscrepancySample { n, trial: t, psi: psi.name(), d });
            }
        }
    }
    Ok(out)
}

pub fn samples_table(samples: &[DiscrepancySample]) -> Table {
    let mut t = Table::new("zeros", &["n", "trial", "D", "psi_id"]);
    for s in samples {
        t.push(vec![s.n.to_string(), s.trial.to_string(), num(s.d), s.psi.clone()]);
    }
    t
}

/// Per-degree summary of |D| for one test function.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadRow {
    pub n: u32,
    pub median_abs: f64,
    pub mean: Estimate,
}

pub fn spread_rows(samples: &[DiscrepancySample], psi: &str) -> Vec<SpreadRow> {
    let mut grid: Vec<u32> = samples.iter().filter(|s| s.psi == psi).map(|s| s.n).collect();
    grid.dedup();
    grid.into_iter()
        .map(|n| {
            let d: Vec<f64> = samples.iter().filter(|s| s.psi == psi && s.n == n).map(|s| s.d).collect();
            let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
            SpreadRow { n, median_abs: median(&abs), mean: Estimate::from_samples(&d) }
        })
        .collect()
}

/// Exceedance frequency of |D| >= ε at one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceRow {
    pub n: u32,
    pub exceed: usize,
    pub trials: usize,
    pub probability: f64,
    pub wilson: (f64, f64),
}

impl ExceedanceRow {
    /// Zero-count cells carry only an upper bound.
    pub fn is_upper_bound(&self) -> bool {
        self.exceed == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationResult {
    pub epsilon: f64,
    pub psi: String,
    pub rows: Vec<ExceedanceRow>,
    /// Least-squares slope of log P against n; only when every cell is nonzero.
    pub slope: Option<f64>,
}

impl ConcentrationResult {
    pub fn table(&self, name: &str) -> Table {
        let mut t = Table::new(name, &["n", "exceed", "trials", "p", "wilson_lo", "wilson_hi", "upper_bound_only"]);
        for r in &self.rows {
            t.push(vec![
                r.n.to_string(),
                r.exceed.to_string(),
                r.trials.to_string(),
                num(r.probability),
                num(r.wilson.0),
                num(r.wilson.1),
                r.is_upper_bound().to_string(),
            ]);
        }
        t
    }

    /// Strictly decreasing exceedance; a zero cell after a nonzero one counts
    /// as a decrease, two zero cells in a row do not.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].probability < w[0].probability)
    }
}

pub fn concentration_from_samples(samples: &[DiscrepancySample], psi: &str, epsilon: f64) -> ConcentrationResult {
    let mut grid: Vec<u32> = samples.iter().filter(|s| s.psi == psi).map(|s| s.n).collect();
    grid.dedup();
    let rows: Vec<ExceedanceRow> = grid
        .into_iter()
        .map(|n| {
            let d: Vec<f64> = samples.iter().filter(|s| s.psi == psi && s.n == n).map(|s| s.d).collect();
            let exceed = d.iter().filter(|x| x.abs() >= epsilon).count();
            ExceedanceRow { n, exceed, trials: d.len(), probability: exceed as f64 / d.len() as f64, wilson: wilson_interval(exceed, d.len()) }
        })
        .collect();
    let slope = if rows.iter().all(|r| r.exceed > 0) {
        let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.probability.ln()).collect();
        linear_fit(&xs, &ys).map(|(s, _)| s)
    } else {
        None
    };
    ConcentrationResult { epsilon, psi: psi.to_string(), rows, slope }
}

/// Exceedance table P(|D| >= ε) along a degree grid.
pub fn concentration_experiment(
    ens: &SectionEnsemble,
    psi: &TestFunction,
    epsilon: f64,
    n_grid: &[u32],
    trials: usize,
    seed: SeedStream,
) -> LabResult<ConcentrationResult> {
    if trials < 100 {
        return Err(LabError::InvalidParameter("at least 100 trials per degree".into()));
    }
    let samples = discrepancy_samples(ens, std::slice::from_ref(psi), n_grid, trials, PairingMethod::Crofton { m_lines: DEFAULT_LINES }, seed)?;
    Ok(concentration_from_samples(&samples, &psi.name(), epsilon))
}

/// Chordal ball {x : d(x, center) < radius}.
#[derive(Debug, Clone)]
pub struct ChordalBall {
    pub center: ProjectivePoint,
    pub radius: f64,
}

impl ChordalBall {
    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        self.radius >= 1.0 || self.center.chordal(p) < self.radius
    }

    /// Ω_FS(ball) = r^(2k) for r <= 1.
    pub fn fs_volume_exact(&self) -> f64 {
        self.radius.min(1.0).powi(2 * self.center.dim() as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeCountResult {
    /// Ensemble mean of n^(-l) times the weighted count in the ball.
    pub mean_count: Estimate,
    /// Ω_FS(U) by Monte Carlo.
    pub fs_volume: Estimate,
    /// Closed form of Ω_FS(U).
    pub fs_volume_exact: f64,
    /// k!/(k-l)!.
    pub constant: f64,
    /// Euclidean-normalized volume Ω_FS(U)/k!.
    pub vol_2k: f64,
    /// constant * vol_2k.
    pub baseline: f64,
}

impl VolumeCountResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new("volume_count", &["quantity", "value", "stderr"]);
        t.push(vec!["mean_count".into(), num(self.mean_count.mean), num(self.mean_count.stderr)]);
        t.push(vec!["fs_volume_mc".into(), num(self.fs_volume.mean), num(self.fs_volume.stderr)]);
        t.push(vec!["fs_volume_exact".into(), num(self.fs_volume_exact), "0".into()]);
        t.push(vec!["constant".into(), num(self.constant), "0".into()]);
        t.push(vec!["vol_2k".into(), num(self.vol_2k), "0".into()]);
        t.push(vec!["baseline".into(), num(self.baseline), "0".into()]);
        t
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Normalized point count of zero sets in a chordal ball against the
/// volume baseline.
pub fn volume_count(
    ens: &SectionEnsemble,
    region: &ChordalBall,
    trials: usize,
    mc_samples: usize,
    seed: SeedStream,
) -> LabResult<VolumeCountResult> {
    if ens.l != ens.k || ens.k > 2 || region.center.dim() != ens.k {
        return Err(LabError::Unsupported("volume counts need l = k in {1, 2} and a ball in P^k".into()));
    }
    let norm = (ens.n as f64).powi(ens.l as i32);
    let s = seed.labeled("sections");
    let counts: Vec<LabResult<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = s.rng(t as u64);
            let sec = sample_section(ens, &mut rng);
            let zs = zero_set(&sec, ens.k)?;
            let m = zs.points()?;
            Ok(m.atoms().iter().filter(|(p, _)| region.contains(p)).map(|(_, w)| w).sum::<f64>() / norm)
        })
        .collect();
    let counts = counts.into_iter().collect::<LabResult<Vec<f64>>>()?;
    let mut rng = seed.labeled("volume").rng(0);
    let hits: Vec<f64> = (0..mc_samples)
        .map(|_| if region.contains(&sample_point_fs(ens.k, &mut rng)) { 1.0 } else { 0.0 })
        .collect();
    let fs_volume = Estimate::from_samples(&hits);
    let constant = factorial(ens.k) / factorial(ens.k - ens.l);
    let vol_2k = fs_volume.mean / factorial(ens.k);
    Ok(VolumeCountResult {
        mean_count: Estimate::from_samples(&counts),
        fs_volume,
        fs_volume_exact: region.fs_volume_exact(),
        constant,
        vol_2k,
        baseline: constant * vol_2k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse::parse_poly;

    #[test]
    fn invalid_ensembles() {
        assert!(SectionEnsemble::new(1, 5, 2, Field::Complex).is_err());
        assert!(SectionEnsemble::new(2, 0, 1, Field::Complex).is_err());
    }

    #[test]
    fn real_sections_have_real_coefficients_and_repeat() {
        let ens = SectionEnsemble::new(1, 6, 1, Field::Real).unwrap();
        let s = SeedStream::new(9);
        let a = sample_section(&ens, &mut s.rng(0));
        let b = sample_section(&ens, &mut s.rng(0));
        assert_eq!(a, b);
        assert!(a[0].poly().terms().values().all(|c| c.im == 0.0));
    }

    #[test]
    fn pure_power_zero_set() {
        let s = parse_poly("x0^7", 2).unwrap().to_float();
        let zs = zero_set(&[s.clone()], 1).unwrap();
        let m = zs.points().unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.atoms()[0].1, 7.0);
        assert_eq!(m.atoms()[0].0, ProjectivePoint::from_real(&[0.0, 1.0]).unwrap());
        let mut rng = SeedStream::new(1).rng(0);
        let psi0 = TestFunction::coordinate(1, 0);
        assert_eq!(pair_zero_current(&zs, &psi0, 0, &mut rng).unwrap().value, 0.0);
        let d = discrepancy(&[s], &psi0, PairingMethod::Direct, &mut rng).unwrap();
        assert_eq!(d, -0.5);
    }

    #[test]
    fn curve_zero_set_is_lazy_and_crofton_mass_is_exact() {
        let ens = SectionEnsemble::new(2, 5, 1, Field::Complex).unwrap();
        let mut rng = SeedStream::new(2).rng(0);
        let sec = sample_section(&ens, &mut rng);
        let zs = zero_set(&sec, 2).unwrap();
        assert_eq!(zs.points().unwrap_err(), LabError::LazyZeroSet);
        let one = TestFunction::constant(2, 1.0);
        let p = pair_zero_current(&zs, &one, 50, &mut rng).unwrap();
        assert!((p.value - 5.0).abs() < 1e-12);
        assert!(p.stderr < 1e-12);
    }

    #[test]
    fn complete_intersection_mass() {
        let ens = SectionEnsemble::new(2, 2, 2, Field::Complex).unwrap();
        let mut rng = SeedStream::new(4).rng(0);
        let zs = zero_set(&sample_section(&ens, &mut rng), 2).unwrap();
        assert_eq!(zs.points().unwrap().total(), 4.0);
    }

    #[test]
    fn constant_test_function_has_zero_discrepancy() {
        let ens = SectionEnsemble::new(1, 12, 1, Field::Complex).unwrap();
        let mut rng = SeedStream::new(3).rng(0);
        let sec = sample_section(&ens, &mut rng);
        let d = discrepancy(&sec, &TestFunction::constant(1, 2.5), PairingMethod::Direct, &mut rng).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn larger_threshold_has_smaller_exceedance() {
        let ens = SectionEnsemble::new(1, 8, 1, Field::Complex).unwrap();
        let psi = TestFunction::coordinate(1, 0);
        let samples = discrepancy_samples(&ens, &[psi.clone()], &[8, 16], 200, PairingMethod::Direct, SeedStream::new(5)).unwrap();
        let lo = concentration_from_samples(&samples, &psi.name(), 0.02);
        let hi = concentration_from_samples(&samples, &psi.name(), 0.05);
        for (a, b) in lo.rows.iter().zip(&hi.rows) {
            assert!(b.probability <= a.probability);
        }
    }

    #[test]
    fn whole_space_volume_count() {
        let ens = SectionEnsemble::new(1, 9, 1, Field::Complex).unwrap();
        let ball = ChordalBall { center: ProjectivePoint::from_real(&[1.0, 0.0]).unwrap(), radius: 1.0 };
        let r = volume_count(&ens, &ball, 20, 1000, SeedStream::new(6)).unwrap();
        assert_eq!(r.mean_count.mean, 1.0);
        assert_eq!(r.baseline, 1.0);
    }
}
