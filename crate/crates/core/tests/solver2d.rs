use magrobin::error::Error;
use magrobin::solver2d::{
    assemble_polar, convergence_study, disk_fiber_solve, energy_and_count, form_lower_bound_probe, polar_solve,
    square_solve, GammaSpec, GridControls, LimitValues, PolarGrid, ProblemSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn coarse(mut spec: ProblemSpec, ppl: f64) -> ProblemSpec {
    spec.grid = GridControls {
        points_per_length: ppl,
        refine: false,
    };
    spec
}

#[test]
fn energy_and_count_examples() {
    assert_eq!(energy_and_count(&[], 1.2, 1.0, 0.1).unwrap(), (0.0, 0));
    let h = 0.1;
    let (e, n) = energy_and_count(&[0.5 * h, 0.9 * h], 1.2 * h, 1.0, h).unwrap();
    assert!((e - 0.6 * h).abs() < 1e-15 && n == 2);
    assert!(matches!(
        energy_and_count(&[0.5 * h], h, 1.0, h),
        Err(Error::IncompleteSpectrum { .. })
    ));
}

#[test]
fn polar_gauge_invariance() {
    let spec = ProblemSpec::disk(1.0, 0.2, 1.0, -1.0, 0.5, 1.0);
    let grid = PolarGrid::uniform(16, 48);
    let chi = |x: f64, y: f64| 0.3 * x * x * y + (2.0 * y).sin();
    let plain = polar_solve(&spec, &grid, 6, None).unwrap();
    let shifted = polar_solve(&spec, &grid, 6, Some(&chi)).unwrap();
    for (a, b) in plain.iter().zip(&shifted) {
        assert!((a - b).abs() < 1e-8 * a.abs().max(spec.h), "{a} vs {b}");
    }
}

#[test]
fn neumann_disk_has_boundary_states() {
    let spec = coarse(ProblemSpec::disk(1.0, 0.05, 1.0, 0.0, 1.0, 1.0), 10.0);
    let r = disk_fiber_solve(&spec, None).unwrap();
    assert!(r.result.energy > 0.0 && r.result.count > 0);
    // bottom above half the field energy
    assert!(r.result.eigenvalues[0] >= 0.5 * spec.h);
    assert!(r.result.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(r.labels.len(), r.result.eigenvalues.len());

    // every occupied fiber lies inside the audited range
    let (lo, hi) = r.m_range;
    let narrow = disk_fiber_solve(&spec, Some((lo + 2, hi - 2)));
    assert!(matches!(narrow, Err(Error::MRangeTooSmall(_))));
    let same = disk_fiber_solve(&spec, Some((lo, hi))).unwrap();
    assert_eq!(same.result.eigenvalues, r.result.eigenvalues);
}

#[test]
fn energy_slope_is_the_count() {
    let base = coarse(ProblemSpec::disk(1.0, 0.05, 1.0, -1.0, 0.5, 0.9), 10.0);
    let r = disk_fiber_solve(&base, None).unwrap();
    let list = &r.result.eigenvalues;
    let (lambda, h) = (base.lambda, base.h);
    let eps = 0.01 * lambda;
    let (e0, n0) = energy_and_count(list, r.result.threshold, lambda, h).unwrap();
    let (e1, _) = energy_and_count(list, r.result.threshold, lambda + eps, h).unwrap();
    let slope = (e1 - e0) / (eps * h);
    assert!((slope - n0 as f64).abs() <= 1.0, "{slope} vs {n0}");
}

#[test]
fn zero_coupling_probe_is_nonnegative() {
    let mut spec = coarse(ProblemSpec::disk(1.0, 0.2, 1.0, 0.0, 0.5, 1.0), 8.0);
    spec.gamma = GammaSpec::Samples(vec![0.0; 64]);
    let p = form_lower_bound_probe(&spec).unwrap();
    assert!(p.bottom >= 0.0 && p.coarse_bottom >= 0.0);
    assert!(p.relative_change <= 0.05);
}

#[test]
fn square_counts_small_instance() {
    let spec = coarse(ProblemSpec::square(1.0, 0.04, 1.0, 1.0), 10.0);
    let r = square_solve(&spec).unwrap();
    assert_eq!(r.count, 5);
    // corner states sit below the straight-edge value
    assert!(r.eigenvalues[0] > 0.4 * spec.h && r.eigenvalues[0] < 0.59 * spec.h);
}

#[test]
fn convergence_study_preconditions() {
    let spec = ProblemSpec::disk(1.0, 0.1, 1.0, 0.0, 1.0, 1.0);
    let limits = LimitValues {
        energy: None,
        count: None,
    };
    assert!(convergence_study(&spec, &[], limits, None).is_err());
    assert!(convergence_study(&spec, &[0.05, 0.1], limits, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shifted_energy_dominates_count(list in proptest::collection::vec(0.0f64..2.0, 0..40), lambda in 0.2f64..1.5) {
        let h = 0.1;
        let eps = 0.01;
        let list: Vec<f64> = list.iter().map(|e| e * h).collect();
        let thr = 2.0 * lambda * h;
        let (e0, n0) = energy_and_count(&list, thr, lambda, h).unwrap();
        let (e1, _) = energy_and_count(&list, thr, lambda + eps, h).unwrap();
        prop_assert!(e0 >= 0.0);
        prop_assert!(e1 - e0 >= eps * h * n0 as f64 - 1e-14);
    }

    #[test]
    fn polar_matrix_is_hermitian(
        re in proptest::collection::vec(-1.0f64..1.0, 2 * 72),
        gamma in -2.0f64..2.0,
        gauge in any::<bool>(),
    ) {
        let spec = ProblemSpec::disk(1.0, 0.3, 1.3, gamma, 0.5, 1.0);
        let grid = PolarGrid::uniform(6, 12);
        let chi = |x: f64, y: f64| x * y * y;
        let (a, _) = assemble_polar(&spec, &grid, if gauge { Some(&chi) } else { None }).unwrap();
        let n = a.dim();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(re[i], re[n + i])).collect();
        let y: Vec<Complex64> = (0..n).map(|i| Complex64::new(re[n + i], -re[i] * 0.5)).collect();
        let ax = a.matvec(&x);
        let ay = a.matvec(&y);
        let yax: Complex64 = y.iter().zip(&ax).map(|(u, v)| u.conj() * v).sum();
        let xay: Complex64 = x.iter().zip(&ay).map(|(u, v)| u.conj() * v).sum();
        prop_assert!((yax - xay.conj()).norm() < 1e-12 * (1.0 + yax.norm()));
    }
}
