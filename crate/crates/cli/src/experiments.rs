//! Experiment drivers: each subcommand turns its parameters into tables,
//! scalar values and acceptance checks.

use anyhow::{anyhow, Context, Result};
use num_complex::Complex64;
use rand::Rng;

use eqlab_core::dynamics::{
    backward_orbit_sample, decay_slope, degree_growth, invariance_defect, mixing_correlations, tree_invariance_defect,
    RationalSelfMap,
};
use eqlab_core::henon::{
    cloud_gap, green_function, line_intersection_cloud, BoxTestFunction, IntersectionCloud, LinePair,
    RegularAutomorphism,
};
use eqlab_core::poly::{parse_poly, univariate_roots, FloatPoly};
use eqlab_core::potential::{
    capacity_upper_bound, exceedance_profile, moderate_integral, normalize_qpsh, r1_bound_audit, NormalizationKind,
    QpshWitness, ReferenceMeasure, Region,
};
use eqlab_core::projective::{sphere_log_modulus_exact, sphere_log_modulus_integral};
use eqlab_core::report::{num, ExperimentReport, Table};
use eqlab_core::sections::{
    concentration_from_samples, discrepancy_samples, sample_section, samples_table, spread_rows, zero_set, Field,
    PairingMethod, SectionEnsemble,
};
use eqlab_core::{LabError, ProjectivePoint, SeedStream, TestFunction};

use crate::config::{
    ConstantsParams, DynamicsParams, FieldName, HenonParams, Params, PotentialParams, SectionsParams, WitnessMode,
};

/// Plot request against one of the report tables.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotSpec {
    /// Point cloud from two numeric columns.
    Scatter { table: String, x: String, y: String },
    /// log|y| against x, one polyline per value of `series`.
    LogLine { table: String, x: String, y: String, series: Option<String> },
}

impl PlotSpec {
    pub fn file_stem(&self) -> String {
        match self {
            PlotSpec::Scatter { table, .. } => format!("{table}_scatter"),
            PlotSpec::LogLine { table, .. } => format!("{table}_decay"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub plots: Vec<PlotSpec>,
}

impl Outcome {
    fn scatter(&mut self, table: &str, x: &str, y: &str) {
        self.plots.push(PlotSpec::Scatter { table: table.into(), x: x.into(), y: y.into() });
    }

    fn log_line(&mut self, table: &str, x: &str, y: &str, series: Option<&str>) {
        self.plots.push(PlotSpec::LogLine {
            table: table.into(),
            x: x.into(),
            y: y.into(),
            series: series.map(str::to_string),
        });
    }
}

/// Run one experiment in the current rayon pool.
pub fn run(params: &Params, seed: u64) -> Result<Outcome> {
    let seed = SeedStream::new(seed);
    match params {
        Params::Sections(p) => sections(p, seed).context("sections experiment"),
        Params::Dynamics(p) => dynamics(p, seed).context("dynamics experiment"),
        Params::Henon(p) => henon(p, seed).context("henon experiment"),
        Params::Potential(p) => potential(p, seed).context("potential experiment"),
        Params::Constants(p) => constants(p, seed).context("constants experiment"),
    }
}

/// Medians below this are rounding noise of an exactly vanishing pairing.
const EXACT_ZERO: f64 = 1e-12;

fn sections(p: &SectionsParams, seed: SeedStream) -> Result<Outcome> {
    let mut out = Outcome::default();
    let all = TestFunction::builtin_set(1);
    let psis: Vec<TestFunction> = if p.test_functions.is_empty() {
        all
    } else {
        p.test_functions
            .iter()
            .map(|name| {
                all.iter().find(|t| t.name() == *name).cloned().ok_or_else(|| anyhow!("unknown test function `{name}`"))
            })
            .collect::<Result<_>>()?
    };
    if !psis.iter().any(|t| t.name() == p.concentration_psi) {
        return Err(anyhow!("concentration_psi `{}` is not among the test functions", p.concentration_psi));
    }
    let first = *p.degrees.first().ok_or_else(|| anyhow!("degrees must be nonempty"))?;

    let mut spread = Table::new("spread", &["field", "psi", "n", "median_abs", "mean", "stderr"]);
    for &field in &p.fields {
        let (field, label) = match field {
            FieldName::Complex => (Field::Complex, "complex"),
            FieldName::Real => (Field::Real, "real"),
        };
        let ens = SectionEnsemble::new(1, first, 1, field)?;
        let samples = discrepancy_samples(&ens, &psis, &p.degrees, p.trials, PairingMethod::Direct, seed.labeled(label))?;
        let mut t = samples_table(&samples);
        if field == Field::Real {
            t.name = "zeros_real".into();
        }
        out.report.table(t);

        for psi in &psis {
            let name = psi.name();
            let rows = spread_rows(&samples, &name);
            for r in &rows {
                spread.push(vec![
                    label.into(),
                    name.clone(),
                    r.n.to_string(),
                    num(r.median_abs),
                    num(r.mean.mean),
                    num(r.mean.stderr),
                ]);
            }
            let medians: Vec<f64> = rows.iter().map(|r| r.median_abs).collect();
            let exact_zero = medians.iter().all(|m| *m < EXACT_ZERO);
            let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
            out.report.check(
                format!("median_decreasing/{label}/{name}"),
                exact_zero || decreasing,
                format!("medians {medians:?}{}", if exact_zero { " (pairing vanishes identically)" } else { "" }),
            );
            let worst = rows
                .iter()
                .map(|r| if r.mean.mean.abs() < EXACT_ZERO { 0.0 } else { r.mean.z_score(0.0) })
                .fold(0.0f64, f64::max);
            out.report.check(
                format!("unbiased/{label}/{name}"),
                worst <= p.sigma,
                format!("largest |mean D|/stderr = {worst:.3} (limit {})", p.sigma),
            );
        }

        let conc = concentration_from_samples(&samples, &p.concentration_psi, p.epsilon);
        out.report.table(conc.table(&format!("concentration_{label}")));
        out.log_line(&format!("concentration_{label}"), "n", "p", None);
        if field == Field::Complex {
            let slope = conc.slope;
            out.report.value("concentration_slope", slope.map(serde_json::Value::from).unwrap_or(serde_json::Value::Null));
            let max_exceed = conc.rows.iter().map(|r| r.exceed).max().unwrap_or(0);
            out.report.check(
                "concentration",
                conc.strictly_decreasing() && slope.is_some_and(|s| s < 0.0),
                format!(
                    "P(|D| >= {}) for {}: counts {:?}, slope {:?}{}",
                    p.epsilon,
                    p.concentration_psi,
                    conc.rows.iter().map(|r| r.exceed).collect::<Vec<_>>(),
                    slope,
                    if max_exceed == 0 { "; every cell is an upper bound only" } else { "" }
                ),
            );
        }
    }
    out.report.table(spread);
    out.log_line("spread", "n", "median_abs", Some("psi"));

    bezout(p, seed.labeled("bezout"), &mut out)?;
    Ok(out)
}

fn bezout(p: &SectionsParams, seed: SeedStream, out: &mut Outcome) -> Result<()> {
    let b = &p.bezout;
    if b.line_degree_min == 0 || b.line_degree_min > b.line_degree_max || b.plane_max_degree == 0 {
        return Err(anyhow!("bezout degree ranges must be positive and ordered"));
    }
    let mut t = Table::new("bezout", &["k", "trial", "n", "expected", "found"]);
    let mut ok = true;
    let line = seed.labeled("line");
    for i in 0..b.line_trials {
        let mut rng = line.rng(i as u64);
        let n = rng.gen_range(b.line_degree_min..=b.line_degree_max);
        let f = FloatPoly::random_kostlan(2, n, false, &mut rng);
        let found = univariate_roots(&f)?.total_multiplicity();
        ok &= found == n;
        t.push(vec!["1".into(), i.to_string(), n.to_string(), n.to_string(), found.to_string()]);
    }
    let plane = seed.labeled("plane");
    for i in 0..b.plane_pairs {
        let mut rng = plane.rng(i as u64);
        let n = 1 + (i as u32 % b.plane_max_degree);
        let ens = SectionEnsemble::new(2, n, 2, Field::Complex)?;
        let zs = zero_set(&sample_section(&ens, &mut rng), 2)?;
        let found = zs.points()?.total().round() as u32;
        ok &= found == n * n;
        t.push(vec!["2".into(), i.to_string(), n.to_string(), (n * n).to_string(), found.to_string()]);
    }
    out.report.check(
        "bezout",
        ok,
        format!("{} binary forms and {} ternary pairs counted with multiplicity", b.line_trials, b.plane_pairs),
    );
    out.report.table(t);
    Ok(())
}

fn dynamics(p: &DynamicsParams, seed: SeedStream) -> Result<Outcome> {
    let mut out = Outcome::default();
    let x0 = ProjectivePoint::from_affine(Complex64::new(p.x0[0], p.x0[1]));
    let psis = TestFunction::builtin_set(1);

    // Equilibrium measure of z².
    let square = RationalSelfMap::parse(&["x0^2", "x1^2"])?;
    let cloud = backward_orbit_sample(&[&square], &x0, p.cloud_depth, p.cloud_atoms, seed.labeled("square_cloud"))?;
    let mu = &cloud.measure;
    let mut moments = Table::new("square_moments", &["j", "re", "im", "abs"]);
    let mut worst = 0.0f64;
    for j in 1..=p.moments as i32 {
        let m: Complex64 = mu
            .atoms()
            .iter()
            .map(|(x, w)| x.affine().map(|z| (z / z.norm()).powi(j) * *w).unwrap_or_default())
            .sum::<Complex64>()
            / mu.total();
        worst = worst.max(m.norm());
        moments.push(vec![j.to_string(), num(m.re), num(m.im), num(m.norm())]);
    }
    out.report.table(moments);
    out.report.check(
        "square_circle_moments",
        worst <= p.moment_tolerance,
        format!("max |moment| over j = 1..={} is {worst:.5} (limit {})", p.moments, p.moment_tolerance),
    );
    let defect = invariance_defect(&square, mu, &psis)?;
    out.report.value("square_defect", defect.value);
    out.report.check(
        "square_invariance_defect",
        defect.value <= p.defect_tolerance,
        format!("defect {:.5} (limit {}), {} atoms skipped", defect.value, p.defect_tolerance, defect.skipped),
    );
    let mut pts = Table::new("square_cloud", &["re", "im", "weight"]);
    for (x, w) in mu.atoms().iter().take(CLOUD_EXPORT_LIMIT) {
        let z = x.affine().unwrap_or_default();
        pts.push(vec![num(z.re), num(z.im), num(*w)]);
    }
    out.report.table(pts);
    out.scatter("square_cloud", "re", "im");

    // Preimage-tree defects.
    let mut rng = seed.labeled("random_c").rng(0);
    let modulus = rng.gen_range(p.random_c_modulus[0]..=p.random_c_modulus[1]);
    let c_random = Complex64::from_polar(modulus, rng.gen_range(0.0..std::f64::consts::TAU));
    out.report.value("random_c", serde_json::json!([c_random.re, c_random.im]));
    let maps = [("fixed", Complex64::new(p.fixed_c[0], p.fixed_c[1])), ("random", c_random)];
    let mut tree = Table::new("tree_defects", &["map", "c_re", "c_im", "depth", "defect", "leaves"]);
    for (label, c) in maps {
        let f = RationalSelfMap::quadratic(c)?;
        let mut values = Vec::new();
        for &depth in &p.tree_depths {
            let d = tree_invariance_defect(&f, &x0, depth, &psis)?;
            values.push(d.defect.value);
            tree.push(vec![
                label.into(),
                num(c.re),
                num(c.im),
                depth.to_string(),
                num(d.defect.value),
                d.leaves.to_string(),
            ]);
        }
        out.report.check(
            format!("tree_defect_decreasing/{label}"),
            values.windows(2).all(|w| w[1] < w[0]),
            format!("c = {c}: defects {values:?} at depths {:?}", p.tree_depths),
        );
    }
    out.report.table(tree);
    out.log_line("tree_defects", "depth", "defect", Some("map"));

    // Correlations.
    let mut mixing = Table::new("mixing", &["map", "n", "value", "stderr"]);
    let phi = TestFunction::real_cross(1, 0, 1);
    let psi = TestFunction::imag_cross(1, 0, 1);
    let sq = mixing_correlations(&square, mu, &phi, &psi, p.mixing_lags);
    for c in &sq.correlations {
        mixing.push(vec!["square".into(), c.n.to_string(), num(c.value), num(c.stderr)]);
    }
    let worst = sq.correlations.iter().filter(|c| c.n >= 1).map(|c| c.value.abs() / c.stderr).fold(0.0f64, f64::max);
    out.report.check(
        "square_mixing_null",
        worst <= p.mixing_sigma,
        format!("largest |I_n|/stderr for n >= 1 is {worst:.3} (limit {})", p.mixing_sigma),
    );

    let generic = RationalSelfMap::quadratic(c_random)?;
    let gcloud = backward_orbit_sample(&[&generic], &x0, p.cloud_depth, p.cloud_atoms, seed.labeled("generic_cloud"))?;
    let coord = TestFunction::coordinate(1, 0);
    let gm = mixing_correlations(&generic, &gcloud.measure, &coord, &coord, p.mixing_lags);
    for c in &gm.correlations {
        mixing.push(vec!["generic".into(), c.n.to_string(), num(c.value), num(c.stderr)]);
    }
    let slope = decay_slope(&gm.correlations);
    let limit = 0.5f64.ln() + p.mixing_slack;
    out.report.value("generic_decay_slope", slope.map(serde_json::Value::from).unwrap_or(serde_json::Value::Null));
    out.report.check(
        "generic_mixing_decay",
        slope.is_some_and(|s| s <= limit),
        format!("fitted slope {slope:?} (limit {limit:.4}), {} atoms dropped", gm.dropped),
    );
    out.report.table(mixing);
    out.log_line("mixing", "n", "value", Some("map"));

    degrees(p, &mut out)?;
    Ok(out)
}

const CLOUD_EXPORT_LIMIT: usize = 5000;

fn degrees(p: &DynamicsParams, out: &mut Outcome) -> Result<()> {
    let n = p.degree_iterates;
    let mut t = Table::new("degrees", &["map", "n", "degree", "root", "oracle"]);

    let cremona = degree_growth(&RationalSelfMap::parse(&["x1*x2", "x0*x2", "x0*x1"])?, n)?;
    let oracle: Vec<u32> = (1..=n).map(|i| if i % 2 == 1 { 2 } else { 1 }).collect();
    push_degrees(&mut t, "cremona", &cremona.degrees, &cremona.roots, &oracle);
    out.report.check("degrees/cremona", cremona.degrees == oracle, format!("{:?}", cremona.degrees));

    let power = degree_growth(&RationalSelfMap::parse(&["x0^2", "x1^2", "x2^2"])?, n.min(POWER_ITERATES))?;
    let oracle: Vec<u32> = (1..=power.degrees.len() as u32).map(|i| 1 << i).collect();
    push_degrees(&mut t, "power", &power.degrees, &power.roots, &oracle);
    out.report.check("degrees/power", power.degrees == oracle, format!("{:?}", power.degrees));

    // (x, y) ↦ (y, xy): the degree of the n-th iterate is the largest row
    // sum of A^n with A = [[0, 1], [1, 1]].
    let mono = degree_growth(&RationalSelfMap::parse(&["x0^2", "x0*x2", "x1*x2"])?, n)?;
    let mut a = [[0u64, 1], [1, 1]];
    let mut oracle = Vec::with_capacity(n);
    for _ in 0..n {
        oracle.push(a.iter().map(|r| r[0] + r[1]).max().unwrap_or(0) as u32);
        a = [a[1], [a[0][0] + a[1][0], a[0][1] + a[1][1]]];
    }
    push_degrees(&mut t, "monomial", &mono.degrees, &mono.roots, &oracle);
    let k = n.min(MONOMIAL_EXACT_ITERATES);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let rel = (mono.d1_estimate / golden - 1.0).abs();
    out.report.value("monomial_d1_estimate", mono.d1_estimate);
    out.report.check(
        "degrees/monomial",
        mono.degrees[..k] == oracle[..k] && rel <= 0.05,
        format!("{:?}; deg(f^{n})^(1/{n}) = {:.4} is {:.2}% from the golden ratio", mono.degrees, mono.d1_estimate, 100.0 * rel),
    );
    out.report.table(t);
    Ok(())
}

const POWER_ITERATES: usize = 4;
const MONOMIAL_EXACT_ITERATES: usize = 6;

fn push_degrees(t: &mut Table, map: &str, degrees: &[u32], roots: &[f64], oracle: &[u32]) {
    for (i, (d, r)) in degrees.iter().zip(roots).enumerate() {
        t.push(vec![map.into(), (i + 1).to_string(), d.to_string(), num(*r), oracle[i].to_string()]);
    }
}

/// Redraws allowed per pair before a degenerate configuration is an error.
const PAIR_ATTEMPTS: u64 = 16;

fn henon(p: &HenonParams, seed: SeedStream) -> Result<Outcome> {
    let mut out = Outcome::default();
    let f = RegularAutomorphism::parse(&p.p, &p.a)?;
    if p.pairs < 2 || p.max_level == 0 {
        return Err(anyhow!("need at least two pairs and max_level >= 1"));
    }
    let levels: Vec<(u32, u32)> = (1..=p.max_level).flat_map(|n| (1..=p.max_level).map(move |m| (n, m))).collect();

    // clouds[pair][level index]
    let mut clouds: Vec<Vec<IntersectionCloud>> = Vec::with_capacity(p.pairs);
    let mut resampled = 0;
    for i in 0..p.pairs {
        let s = seed.labeled("pairs").child(i as u64);
        let mut attempt = 0;
        let row = loop {
            if attempt == PAIR_ATTEMPTS {
                return Err(anyhow!("pair {i}: no generic line pair after {PAIR_ATTEMPTS} draws"));
            }
            let pair = LinePair::random(&mut s.rng(attempt));
            attempt += 1;
            let solved: Result<Vec<_>, LabError> =
                levels.iter().map(|&(n, m)| line_intersection_cloud(&f, n, m, &pair)).collect();
            match solved {
                Ok(row) => break row,
                Err(LabError::InvalidParameter(msg)) if msg.contains("resample") => resampled += 1,
                Err(e) => return Err(e).with_context(|| format!("pair {i}")),
            }
        };
        clouds.push(row);
    }
    out.report.value("resampled_pairs", resampled);

    let mut counts = Table::new("counts", &["pair", "n", "m", "expected", "count", "parametric_count", "route_gap"]);
    let mut ok = true;
    let mut worst_gap = 0.0f64;
    for (i, row) in clouds.iter().enumerate() {
        for c in row {
            ok &= c.raw_count == c.expected && c.parametric_count == c.expected;
            worst_gap = worst_gap.max(c.route_gap);
            counts.push(vec![
                i.to_string(),
                c.n.to_string(),
                c.m.to_string(),
                c.expected.to_string(),
                c.raw_count.to_string(),
                c.parametric_count.to_string(),
                num(c.route_gap),
            ]);
        }
    }
    out.report.table(counts);
    out.report.value("max_route_gap", worst_gap);
    out.report.check(
        "henon_counts",
        ok,
        format!("{} pairs, 1 <= n, m <= {}; largest route gap {worst_gap:.2e}", p.pairs, p.max_level),
    );

    let psis = BoxTestFunction::standard_set();
    let mut gaps = Table::new("gaps", &["level", "gap"]);
    let mut diag = Vec::new();
    for l in 1..=p.max_level {
        let idx = levels.iter().position(|&x| x == (l, l)).unwrap_or_default();
        let measures: Vec<_> = clouds.iter().map(|row| row[idx].measure.clone()).collect();
        let g = cloud_gap(&measures, &psis);
        diag.push(g);
        gaps.push(vec![l.to_string(), num(g)]);
    }
    out.report.table(gaps);
    out.log_line("gaps", "level", "gap", None);
    let (first, last) = (diag[0], diag[diag.len() - 1]);
    out.report.check(
        "henon_gap_decreases",
        last < first,
        format!("gap {first:.4} at n = m = 1, {last:.4} at n = m = {}", p.max_level),
    );

    let top = levels.len() - 1;
    let name = format!("cloud_n{0}_m{0}", p.max_level);
    let mut cloud_table = Table::new(name.clone(), &["re_x", "im_x", "re_y", "im_y", "weight"]);
    let mut green = Table::new("green", &["pair", "atom", "g_plus", "g_minus"]);
    let mut g_max = 0.0f64;
    for (i, row) in clouds.iter().enumerate() {
        for (j, (q, w)) in row[top].measure.atoms().iter().enumerate() {
            cloud_table.push(vec![num(q[0].re), num(q[0].im), num(q[1].re), num(q[1].im), num(w / p.pairs as f64)]);
            let g = green_function(&f, *q, p.green_depth)?;
            g_max = g_max.max(g.g_plus).max(g.g_minus);
            green.push(vec![i.to_string(), j.to_string(), num(g.g_plus), num(g.g_minus)]);
        }
    }
    out.report.table(cloud_table);
    out.scatter(&name, "re_x", "re_y");
    out.report.table(green);
    out.report.value("green_max", g_max);
    out.report.check(
        "henon_green_small",
        g_max <= p.green_bound,
        format!("max of G+ and G- over the n = m = {} atoms at depth {} is {g_max:.4} (limit {})", p.max_level, p.green_depth, p.green_bound),
    );
    Ok(out)
}

fn measure_name(m: &ReferenceMeasure) -> &'static str {
    match m {
        ReferenceMeasure::Fs => "fs",
        ReferenceMeasure::RealFs => "real_fs",
        ReferenceMeasure::Empirical(_) => "empirical",
    }
}

fn kostlan_witness(k: usize, degree: u32, seed: SeedStream) -> Result<QpshWitness> {
    Ok(QpshWitness::new(FloatPoly::random_kostlan(k + 1, degree, false, &mut seed.rng(0)))?)
}

fn potential(p: &PotentialParams, seed: SeedStream) -> Result<Outcome> {
    let mut out = Outcome::default();
    if p.degree_pool.is_empty() || p.exceedance_degrees.is_empty() {
        return Err(anyhow!("degree pools must be nonempty"));
    }

    let mut r1 = Table::new("r1_audit", &["k", "witnesses", "max_sup", "bound", "pass"]);
    for &k in &p.ks {
        let a = r1_bound_audit(k, p.witnesses, &p.degree_pool, p.samples, seed.labeled("r1").child(k as u64))?;
        r1.push(vec![k.to_string(), p.witnesses.to_string(), num(a.max_sup), num(a.bound), a.pass.to_string()]);
        out.report.check(
            format!("r1_bound/k{k}"),
            a.pass,
            format!("max sup {:.4} against (1 + log k)/2 = {:.4} + 0.05", a.max_sup, a.bound),
        );
    }
    out.report.table(r1);

    let measures = [ReferenceMeasure::Fs, ReferenceMeasure::RealFs];
    let mut moderation =
        Table::new("moderation", &["measure", "k", "witness", "degree", "alpha", "estimate", "stderr", "heavy_tail"]);
    let mut finite = true;
    let mut monotone = true;
    for &k in &p.ks {
        let s = seed.labeled("moderation").child(k as u64);
        for i in 0..p.moderation_witnesses {
            let degree = p.degree_pool[i % p.degree_pool.len()];
            let w = kostlan_witness(k, degree, s.child(i as u64))?;
            let w = normalize_qpsh(&w, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, p.samples, s.child(i as u64).child(1))?
                .witness;
            for m in &measures {
                let rows = moderate_integral(m, &w, &p.alphas, p.moderation_samples, s.child(i as u64).child(2))?;
                for r in &rows {
                    finite &= r.estimate.mean.is_finite();
                    moderation.push(vec![
                        measure_name(m).into(),
                        k.to_string(),
                        i.to_string(),
                        degree.to_string(),
                        num(r.alpha),
                        num(r.estimate.mean),
                        num(r.estimate.stderr),
                        r.heavy_tail.to_string(),
                    ]);
                }
                let mut sorted = rows.clone();
                sorted.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
                monotone &= sorted.windows(2).all(|w| w[1].estimate.mean >= w[0].estimate.mean);
            }
        }
    }
    out.report.table(moderation);
    out.report.check(
        "moderation_finite_monotone",
        finite && monotone,
        format!("finite: {finite}, monotone in alpha: {monotone}"),
    );

    let mut exceed = Table::new("exceedance", &["measure", "k", "t", "hits", "trials", "fraction", "lower", "upper"]);
    for m in &measures {
        for &k in &p.ks {
            let s = seed.labeled("exceedance").labeled(measure_name(m)).child(k as u64);
            let ws = (0..p.exceedance_witnesses)
                .map(|i| {
                    let degree = p.exceedance_degrees[i % p.exceedance_degrees.len()];
                    let w = kostlan_witness(k, degree, s.child(i as u64))?;
                    Ok(normalize_qpsh(&w, NormalizationKind::MeanZero, m, p.samples, s.child(i as u64).child(1))?.witness)
                })
                .collect::<Result<Vec<_>>>()?;
            let prof = exceedance_profile(m, &ws, &p.exceedance_grid, p.exceedance_samples, s.labeled("profile"))?;
            for r in &prof.rows {
                exceed.push(vec![
                    measure_name(m).into(),
                    k.to_string(),
                    num(r.t),
                    r.hits.to_string(),
                    r.trials.to_string(),
                    num(r.fraction),
                    num(r.lower),
                    num(r.upper),
                ]);
            }
            out.report.check(
                format!("exceedance_decay/{}/k{k}", measure_name(m)),
                prof.slope.is_some_and(|s| s <= -p.exceedance_min_rate),
                format!("fitted slope {:?} (limit {})", prof.slope, -p.exceedance_min_rate),
            );
        }
    }
    out.report.table(exceed);
    out.log_line("exceedance", "t", "fraction", Some("measure"));

    capacity(p, seed.labeled("capacity"), &mut out)?;
    custom_witnesses(p, seed.labeled("custom"), &mut out)?;
    Ok(out)
}

const CAPACITY_WITNESSES: usize = 8;

fn capacity(p: &PotentialParams, seed: SeedStream, out: &mut Outcome) -> Result<()> {
    let mut t = Table::new("capacity", &["k", "region", "bound"]);
    let mut whole_ok = true;
    let mut antitone = true;
    for &k in &p.ks {
        let s = seed.child(k as u64);
        let ws = (0..CAPACITY_WITNESSES)
            .map(|i| {
                let degree = p.degree_pool[i % p.degree_pool.len()];
                let w = kostlan_witness(k, degree, s.child(i as u64))?;
                Ok(normalize_qpsh(&w, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, p.samples, s.child(i as u64).child(1))?
                    .witness)
            })
            .collect::<Result<Vec<_>>>()?;
        let center = ProjectivePoint::from_real(&vec![1.0; k + 1])?;
        let regions = [
            ("whole", Region::Whole),
            ("real", Region::Real),
            ("ball_0.8", Region::Ball { center: center.clone(), radius: 0.8 }),
            ("ball_0.6", Region::Ball { center, radius: 0.6 }),
        ];
        let mut bounds = Vec::new();
        for (name, r) in &regions {
            let b = capacity_upper_bound(r, &ws, p.samples, s.labeled(name))?;
            t.push(vec![k.to_string(), name.to_string(), num(b)]);
            bounds.push(b);
        }
        whole_ok &= bounds[0] == 1.0;
        // ball_0.6 ⊆ ball_0.8 ⊆ whole.
        antitone &= bounds[3] <= bounds[2] && bounds[2] <= bounds[0];
    }
    let line = QpshWitness::new(parse_poly("x0", 3)?.to_float())?;
    let line = normalize_qpsh(&line, NormalizationKind::MaxZero, &ReferenceMeasure::Fs, p.samples, seed.labeled("line"))?.witness;
    let hyperplane = capacity_upper_bound(&Region::Hyperplane, &[line], p.samples, seed.labeled("hyperplane"))?;
    t.push(vec!["2".into(), "hyperplane".into(), num(hyperplane)]);
    out.report.table(t);
    out.report.check("capacity_whole", whole_ok, format!("bound(P^k) = 1 for k in {:?}", p.ks));
    out.report.check("capacity_line", hyperplane == 0.0, format!("bound of a line in P^2 is {hyperplane}"));
    out.report.check("capacity_antitone", antitone, "nested balls give nested bounds");
    Ok(())
}

fn custom_witnesses(p: &PotentialParams, seed: SeedStream, out: &mut Outcome) -> Result<()> {
    if p.witness_specs.is_empty() {
        return Ok(());
    }
    let mut t = Table::new("witnesses", &["index", "poly", "k", "normalization", "shift", "stderr"]);
    for (i, spec) in p.witness_specs.iter().enumerate() {
        let form = parse_poly(&spec.poly, spec.k + 1).with_context(|| format!("witness_specs[{i}].poly"))?;
        let w = QpshWitness::new(form.to_float())?;
        let mode = match spec.normalization {
            WitnessMode::Max => NormalizationKind::MaxZero,
            WitnessMode::Mean => NormalizationKind::MeanZero,
        };
        let n = normalize_qpsh(&w, mode, &ReferenceMeasure::Fs, p.samples, seed.child(i as u64))?;
        t.push(vec![
            i.to_string(),
            spec.poly.clone(),
            spec.k.to_string(),
            format!("{:?}", spec.normalization).to_lowercase(),
            num(n.witness.shift()),
            num(n.stderr),
        ]);
    }
    out.report.table(t);
    Ok(())
}

fn constants(p: &ConstantsParams, seed: SeedStream) -> Result<Outcome> {
    let mut out = Outcome::default();
    let start = std::time::Instant::now();
    let mut t = Table::new("constants", &["k", "estimate", "stderr", "exact", "z"]);
    let mut ok = true;
    for &k in &p.ks {
        if k == 0 {
            return Err(anyhow!("k must be at least 1"));
        }
        let e = sphere_log_modulus_integral(k, p.samples, seed.labeled("sphere").child(k as u64));
        let exact = sphere_log_modulus_exact(k);
        let z = e.z_score(exact);
        ok &= z <= p.sigma;
        t.push(vec![k.to_string(), num(e.mean), num(e.stderr), num(exact), num(z)]);
    }
    let elapsed = start.elapsed().as_secs_f64();
    out.report.table(t);
    out.report.value("elapsed_seconds", elapsed);
    out.report.check("sphere_integral", ok, format!("every estimate within {} standard errors of -H_k/2", p.sigma));
    out.report.check(
        "sphere_integral_runtime",
        elapsed < p.max_seconds,
        format!("{elapsed:.2} s for {} samples per k (limit {} s)", p.samples, p.max_seconds),
    );
    Ok(out)
}
