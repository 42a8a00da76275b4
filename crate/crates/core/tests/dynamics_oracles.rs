use eqlab_core::dynamics::{tree_invariance_defect, RationalSelfMap};
use eqlab_core::henon::{line_intersection_cloud, LinePair, RegularAutomorphism};
use eqlab_core::{ProjectivePoint, SeedStream, TestFunction};
use num_complex::Complex64;

#[test]
fn tree_defect_decays_with_depth() {
    let x0 = ProjectivePoint::from_affine(Complex64::new(0.37, 0.61));
    let psis = TestFunction::builtin_set(1);
    for c in [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.3)] {
        let f = RationalSelfMap::quadratic(c).unwrap();
        let d: Vec<f64> = [5, 10, 20]
            .iter()
            .map(|&n| tree_invariance_defect(&f, &x0, n, &psis).unwrap().defect.value)
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "c = {c}: {d:?}");
    }
}

#[test]
fn henon_counts_are_bezout_numbers() {
    let f = RegularAutomorphism::standard();
    let mut rng = SeedStream::new(21).rng(0);
    for n in 1..=3 {
        for m in 1..=3 {
            let pair = LinePair::random(&mut rng);
            let c = line_intersection_cloud(&f, n, m, &pair).unwrap();
            assert_eq!(c.raw_count, 1 << (n + m));
            assert_eq!(c.parametric_count, c.raw_count);
            assert!(c.route_gap < 1e-8, "n={n} m={m}: {}", c.route_gap);
        }
    }
}
