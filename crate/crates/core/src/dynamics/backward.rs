//! Backward iteration towards the equilibrium measure.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use smallvec::SmallVec;

use super::{Fiber, Preimage};
use crate::error::{LabError, LabResult};
use crate::measure::EmpiricalMeasure;
use crate::poly::dense_roots;
use crate::poly::roots::principal_sqrt;
use crate::projective::ProjectivePoint;
use crate::rng::{LabRng, SeedStream};
use crate::test_function::TestFunction;

/// Attempts per sample before the whole run is declared degenerate.
const MAX_RETRIES: usize = 16;
/// Budget for exhaustive preimage trees, in visited nodes.
const TREE_MAX_NODES: u128 = 1 << 33;
/// Subtrees at least this deep are evaluated in parallel.
const TREE_PARALLEL_DEPTH: usize = 18;

/// Cloud of backward-orbit endpoints with the number of resampled paths.
#[derive(Debug, Clone)]
pub struct BackwardCloud {
    pub measure: EmpiricalMeasure,
    pub aborted: usize,
}

fn is_abort(e: &LabError) -> bool {
    matches!(e, LabError::Exceptional { .. } | LabError::Indeterminacy)
}

/// Sample of d^{-n}(f_n ∘ ... ∘ f_1)^* δ_{x0}, where f_i = schedule[(i−1) mod len].
///
/// Each sample walks back from x0, applying f_n^{-1} first, and picks a
/// preimage uniformly among the fiber listed with multiplicity. Paths that
/// hit an exceptional point are redrawn; more than 1% redraws is an error.
pub fn backward_orbit_sample(
    schedule: &[&dyn Preimage],
    x0: &ProjectivePoint,
    depth: usize,
    n_samples: usize,
    seed: SeedStream,
) -> LabResult<BackwardCloud> {
    if schedule.is_empty() {
        return Err(LabError::InvalidParameter("empty schedule".into()));
    }
    if n_samples == 0 {
        return Err(LabError::InvalidParameter("n_samples must be positive".into()));
    }
    let k = x0.dim();
    let mut degrees = Vec::with_capacity(schedule.len());
    for f in schedule {
        if f.dim() != k {
            return Err(LabError::InvalidParameter(format!("map on P^{} applied to a point of P^{k}", f.dim())));
        }
        degrees.push(f.topological_degree()? as usize);
    }
    let results: Vec<LabResult<(ProjectivePoint, usize)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i as u64);
            let mut aborts = 0;
            loop {
                let walk = if k == 1 {
                    walk_p1(schedule, &degrees, [x0.coords()[0], x0.coords()[1]], depth, &mut rng)
                        .and_then(|v| Ok(ProjectivePoint::new(v.to_vec())?))
                } else {
                    walk(schedule, &degrees, x0, depth, &mut rng)
                };
                match walk {
                    Ok(p) => return Ok((p, aborts)),
                    Err(e) if is_abort(&e) && aborts < MAX_RETRIES => aborts += 1,
                    Err(e) if is_abort(&e) => {
                        return Err(LabError::TooManyAborts { aborted: aborts + 1, attempted: aborts + 1 })
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let mut points = Vec::with_capacity(n_samples);
    let mut aborted = 0;
    for r in results {
        let (p, a) = r?;
        points.push(p);
        aborted += a;
    }
    if aborted * 100 > n_samples {
        return Err(LabError::TooManyAborts { aborted, attempted: n_samples + aborted });
    }
    Ok(BackwardCloud { measure: EmpiricalMeasure::uniform(points), aborted })
}

fn walk_p1(
    schedule: &[&dyn Preimage],
    degrees: &[usize],
    x0: [Complex64; 2],
    depth: usize,
    rng: &mut LabRng,
) -> LabResult<[Complex64; 2]> {
    let mut y = x0;
    for step in (0..depth).rev() {
        let j = step % schedule.len();
        let fib = schedule[j].preimages_p1(y)?;
        if fib.len() != degrees[j] {
            return Err(LabError::Exceptional { found: fib.len() as u32, expected: degrees[j] as u32 });
        }
        y = fib[rng.gen_range(0..fib.len())];
    }
    Ok(y)
}

fn walk(
    schedule: &[&dyn Preimage],
    degrees: &[usize],
    x0: &ProjectivePoint,
    depth: usize,
    rng: &mut LabRng,
) -> LabResult<ProjectivePoint> {
    let mut y = x0.clone();
    for step in (0..depth).rev() {
        let j = step % schedule.len();
        let mut fib = schedule[j].preimages(&y)?;
        if fib.len() != degrees[j] {
            return Err(LabError::Exceptional { found: fib.len() as u32, expected: degrees[j] as u32 });
        }
        y = fib.swap_remove(rng.gen_range(0..fib.len()));
    }
    Ok(y)
}

/// Invariance defect with the signed per-function values.
#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    /// max over ψ of |value|.
    pub value: f64,
    /// d^{-1} ∫ Σ_{f(x)=y} ψ(x) dμ(y) − ∫ ψ dμ, per test function.
    pub per_psi: Vec<f64>,
    /// Atoms skipped because their fiber was exceptional.
    pub skipped: usize,
}

impl Defect {
    fn from_values(per_psi: Vec<f64>, skipped: usize) -> Self {
        let value = per_psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Defect { value, per_psi, skipped }
    }
}

/// How far μ is from satisfying f^*μ = d μ on the given test functions.
/// Atoms with exceptional fibers are skipped and the rest renormalized.
pub fn invariance_defect(f: &dyn Preimage, mu: &EmpiricalMeasure, psis: &[TestFunction]) -> LabResult<Defect> {
    let d = f.topological_degree()? as usize;
    let rows: Vec<LabResult<Option<(f64, Vec<f64>)>>> = mu
        .atoms()
        .par_iter()
        .map(|(y, w)| match f.preimages(y) {
            Ok(fib) if fib.len() == d => {
                let vals = psis
                    .iter()
                    .map(|psi| {
                        let pulled = fib.iter().map(|x| psi.eval(x)).sum::<f64>() / d as f64;
                        w * (pulled - psi.eval(y))
                    })
                    .collect();
                Ok(Some((*w, vals)))
            }
            Ok(_) => Ok(None),
            Err(e) if is_abort(&e) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut sums = vec![0.0; psis.len()];
    let (mut mass, mut skipped) = (0.0, 0);
    for r in rows {
        match r? {
            Some((w, vals)) => {
                mass += w;
                for (s, v) in sums.iter_mut().zip(vals) {
                    *s += v;
                }
            }
            None => skipped += 1,
        }
    }
    if mass > 0.0 {
        for s in sums.iter_mut() {
            *s /= mass;
        }
    }
    Ok(Defect::from_values(sums, skipped))
}

/// Invariance defect of d^{-n}(f^n)^* δ_{x0} evaluated on the full preimage
/// tree rather than on a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeDefect {
    pub depth: usize,
    pub defect: Defect,
    pub leaves: u64,
}

/// Exhaustive version of [`invariance_defect`] for the depth-n pullback of a
/// Dirac mass on P^1. Cost is d^(n+1) fiber computations.
pub fn tree_invariance_defect(
    f: &dyn Preimage,
    x0: &ProjectivePoint,
    depth: usize,
    psis: &[TestFunction],
) -> LabResult<TreeDefect> {
    if f.dim() != 1 || x0.dim() != 1 {
        return Err(LabError::Unsupported("preimage trees are implemented on P^1 only".into()));
    }
    let d = f.topological_degree()? as usize;
    let nodes = (d as u128).checked_pow(depth as u32 + 1).unwrap_or(u128::MAX);
    if nodes > TREE_MAX_NODES {
        return Err(LabError::InvalidParameter(format!("preimage tree of {d}^{} nodes exceeds the budget", depth + 1)));
    }
    let mut per_psi = Vec::with_capacity(psis.len());
    for chunk in psis.chunks(TREE_MAX_PSIS) {
        let means = match (f.affine_polynomial(), x0.affine()) {
            (Some(p), Some(z0)) => affine_tree_mean(&AffineFiber::new(p), z0, depth, chunk),
            _ => tree_mean(f, d, [x0.coords()[0], x0.coords()[1]], depth, chunk)?,
        };
        per_psi.extend_from_slice(&means[..chunk.len()]);
    }
    Ok(TreeDefect { depth, defect: Defect::from_values(per_psi, 0), leaves: (d as u64).pow(depth as u32) })
}

fn fiber_of(f: &dyn Preimage, d: usize, y: [Complex64; 2]) -> LabResult<Fiber> {
    let fib = f.preimages_p1(y)?;
    if fib.len() != d {
        return Err(LabError::Exceptional { found: fib.len() as u32, expected: d as u32 });
    }
    Ok(fib)
}

/// Test functions handled by one exhaustive tree pass.
const TREE_MAX_PSIS: usize = 16;

/// Mean over the leaves below y of (pulled-back ψ − ψ). Children are
/// averaged level by level, which keeps the summation pairwise.
fn tree_mean(
    f: &dyn Preimage,
    d: usize,
    y: [Complex64; 2],
    level: usize,
    psis: &[TestFunction],
) -> LabResult<[f64; TREE_MAX_PSIS]> {
    let fib = fiber_of(f, d, y)?;
    let mut acc = [0.0; TREE_MAX_PSIS];
    if level == 0 {
        for (a, psi) in acc.iter_mut().zip(psis) {
            *a = fib.iter().map(|x| psi.eval_unit(x)).sum::<f64>() / d as f64 - psi.eval_unit(&y);
        }
        return Ok(acc);
    }
    if level >= TREE_PARALLEL_DEPTH {
        let children: Vec<LabResult<[f64; TREE_MAX_PSIS]>> =
            fib.par_iter().map(|&x| tree_mean(f, d, x, level - 1, psis)).collect();
        for c in children {
            for (a, v) in acc.iter_mut().zip(c?) {
                *a += v;
            }
        }
    } else {
        for &x in &fib {
            for (a, v) in acc.iter_mut().zip(tree_mean(f, d, x, level - 1, psis)?) {
                *a += v;
            }
        }
    }
    for a in acc.iter_mut() {
        *a /= d as f64;
    }
    Ok(acc)
}

/// Preimage solver for z ↦ p(z) with the quadratic case precomputed.
struct AffineFiber<'a> {
    p: &'a [Complex64],
    /// (b² − 4ac, 4a, 1/a, b) for deg p = 2.
    quad: Option<(Complex64, Complex64, Complex64, Complex64)>,
}

impl<'a> AffineFiber<'a> {
    fn new(p: &'a [Complex64]) -> Self {
        let quad = (p.len() == 3).then(|| (p[1] * p[1] - 4.0 * p[2] * p[0], 4.0 * p[2], p[2].inv(), p[1]));
        AffineFiber { p, quad }
    }

    /// Roots of p(z) = y, with multiplicity.
    fn roots(&self, y: Complex64) -> SmallVec<[Complex64; 8]> {
        let zero = Complex64::new(0.0, 0.0);
        match self.quad {
            Some((disc0, four_a, inv_a, b)) => {
                let s = principal_sqrt(disc0 + four_a * y);
                if b == zero {
                    let r = -0.5 * s * inv_a;
                    smallvec::smallvec![r, -r]
                } else {
                    let q = if (b.conj() * s).re >= 0.0 { -0.5 * (b + s) } else { -0.5 * (b - s) };
                    if q == zero {
                        return smallvec::smallvec![zero, zero];
                    }
                    smallvec::smallvec![q * inv_a, (self.p[0] - y) / q]
                }
            }
            None => {
                let mut a = self.p.to_vec();
                a[0] -= y;
                dense_roots(&a).into_iter().collect()
            }
        }
    }
}

fn affine_psi(psis: &[TestFunction], z: Complex64, out: &mut [f64; TREE_MAX_PSIS], weight: f64) {
    let v = [z, Complex64::new(1.0, 0.0)];
    let inv = 1.0 / (1.0 + z.norm_sqr());
    for (o, psi) in out.iter_mut().zip(psis) {
        *o += weight * psi.eval_scaled(&v, inv);
    }
}

/// [`tree_mean`] in the affine chart of a polynomial map.
fn affine_tree_mean(p: &AffineFiber, y: Complex64, level: usize, psis: &[TestFunction]) -> [f64; TREE_MAX_PSIS] {
    let fib = p.roots(y);
    let w = 1.0 / fib.len() as f64;
    let mut acc = [0.0; TREE_MAX_PSIS];
    if level == 0 {
        for &x in &fib {
            affine_psi(psis, x, &mut acc, w);
        }
        affine_psi(psis, y, &mut acc, -1.0);
        return acc;
    }
    let add = |acc: &mut [f64; TREE_MAX_PSIS], c: [f64; TREE_MAX_PSIS]| {
        for (a, v) in acc.iter_mut().zip(c) {
            *a += w * v;
        }
    };
    if level >= TREE_PARALLEL_DEPTH {
        let children: Vec<_> = fib.par_iter().map(|&x| affine_tree_mean(p, x, level - 1, psis)).collect();
        for c in children {
            add(&mut acc, c);
        }
    } else {
        for &x in &fib {
            add(&mut acc, affine_tree_mean(p, x, level - 1, psis));
        }
    }
    acc
}
