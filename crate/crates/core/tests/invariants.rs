use eqlab_core::dynamics::{degree_growth, Preimage, RationalSelfMap};
use eqlab_core::henon::{AffineLine, RegularAutomorphism};
use eqlab_core::poly::{univariate_roots, FloatPoly};
use eqlab_core::potential::{chordal_potential_eval, QpshWitness};
use eqlab_core::projective::sample_point_fs;
use eqlab_core::stats::wilson_interval;
use eqlab_core::{EmpiricalMeasure, ProjectivePoint, SeedStream, TestFunction};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn log_modulus_is_scale_invariant(seed in any::<u64>(), k in 1usize..4, n in 1u32..6, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let mut rng = SeedStream::new(seed).rng(0);
        let f = FloatPoly::random_kostlan(k + 1, n, false, &mut rng);
        let p = sample_point_fs(k, &mut rng);
        let lambda = Complex64::new(re, im);
        let scaled: Vec<Complex64> = p.coords().iter().map(|z| z * lambda).collect();
        let a = f.log_scaled_coords(p.coords());
        let b = f.log_scaled_coords(&scaled);
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn coordinate_functions_sum_to_one(seed in any::<u64>(), k in 1usize..5) {
        let p = sample_point_fs(k, &mut SeedStream::new(seed).rng(0));
        let s: f64 = (0..=k).map(|j| TestFunction::coordinate(k, j).eval(&p)).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_binary_forms_have_n_roots(seed in any::<u64>(), n in 1u32..40) {
        let f = FloatPoly::random_kostlan(2, n, false, &mut SeedStream::new(seed).rng(0));
        prop_assert_eq!(univariate_roots(&f).unwrap().total_multiplicity(), n);
    }

    #[test]
    fn quadratic_fibers_have_two_points(seed in any::<u64>(), cr in -1.0f64..1.0, ci in -1.0f64..1.0) {
        let f = RationalSelfMap::quadratic(Complex64::new(cr, ci)).unwrap();
        let y = sample_point_fs(1, &mut SeedStream::new(seed).rng(0));
        let fiber = f.preimages(&y).unwrap();
        prop_assert_eq!(fiber.len(), 2);
        for x in &fiber {
            let image = f.apply(x).unwrap();
            prop_assert!(image.chordal(&y) < 1e-8);
        }
    }

    #[test]
    fn henon_inverse_undoes_forward(seed in any::<u64>(), steps in 1i32..4) {
        let f = RegularAutomorphism::standard();
        let line = AffineLine::random(&mut SeedStream::new(seed).rng(0));
        let q = line.point;
        let back = f.iterate_point(-steps, f.iterate_point(steps, q));
        let err = ((back[0] - q[0]).norm() + (back[1] - q[1]).norm()) / (1.0 + q[0].norm() + q[1].norm());
        prop_assert!(err < 1e-8, "{}", err);
    }

    #[test]
    fn wilson_interval_brackets_the_rate(trials in 1usize..5000, frac in 0.0f64..1.0) {
        let hits = ((trials as f64) * frac) as usize;
        let (lo, hi) = wilson_interval(hits, trials);
        let p = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn witness_values_stay_below_shift(seed in any::<u64>(), k in 1usize..4, n in 1u32..5) {
        let mut rng = SeedStream::new(seed).rng(0);
        let w = QpshWitness::new(FloatPoly::random_kostlan(k + 1, n, false, &mut rng)).unwrap();
        for _ in 0..200 {
            prop_assert!(w.value(&sample_point_fs(k, &mut rng)) <= w.shift());
        }
    }

    #[test]
    fn chordal_potential_is_nonpositive(seed in any::<u64>(), atoms in 1usize..20) {
        let mut rng = SeedStream::new(seed).rng(0);
        let nu = EmpiricalMeasure::uniform((0..atoms).map(|_| sample_point_fs(1, &mut rng)).collect());
        let u = chordal_potential_eval(&nu, &sample_point_fs(1, &mut rng)).unwrap();
        prop_assert!(u.value <= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn degrees_are_submultiplicative(a in 1i32..4, b in -3i32..4, c in -3i32..4) {
        let comps = [format!("x0^2 + {a}*x1*x2"), format!("x1^2 + {b}*x0*x2"), format!("x2^2 + {c}*x0*x1")];
        let f = RationalSelfMap::parse(&comps).unwrap();
        let g = degree_growth(&f, 4).unwrap();
        prop_assert!(g.submultiplicative);
        for w in g.degrees.windows(2) {
            prop_assert!(w[1] <= 2 * w[0]);
        }
    }
}

#[test]
fn monomial_map_follows_exponent_matrix() {
    // (x, y) ↦ (y, xy) has exponent matrix [[0, 1], [1, 1]].
    let f = RationalSelfMap::parse(&["x0^2", "x0*x2", "x1*x2"]).unwrap();
    let g = degree_growth(&f, 8).unwrap();
    let mut m = [[0u64, 1], [1, 1]];
    let mut oracle = Vec::new();
    for _ in 0..8 {
        oracle.push(m.iter().map(|r| r[0] + r[1]).max().unwrap() as u32);
        m = [[m[1][0], m[1][1]], [m[0][0] + m[1][0], m[0][1] + m[1][1]]];
    }
    assert_eq!(g.degrees, oracle);
    assert_eq!(&g.degrees[..4], &[2, 3, 5, 8]);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((g.d1_estimate / golden - 1.0).abs() < 0.05);
}

#[test]
fn square_map_moves_unit_circle_to_itself() {
    let f = RationalSelfMap::parse(&["x0^2", "x1^2"]).unwrap();
    let p = ProjectivePoint::from_affine(Complex64::from_polar(1.0, 0.3));
    for x in f.preimages(&p).unwrap() {
        let z = x.affine().unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-12);
    }
}
