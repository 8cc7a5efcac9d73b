use std::f64::consts::PI;

use magrobin::band1d::{mu_all, theta, HalfLineDiscretization, RobinOscillatorParams};
use magrobin::error::Error;
use magrobin::model_spectra::{
    cylinder_energy, cylinder_fiber_spectrum, cylinder_spectrum, dirichlet_square_count, fiber_spectrum,
    lt_bound_check, lt_classical_constant, nu_b, torus_count_below, torus_landau_spectrum, BoundaryPotential,
    CylinderGrid, CylinderModel, HalfPlaneModel, LtGrid, SquareGrid, TorusGrid, TorusModel,
};
use proptest::prelude::*;

fn disc() -> HalfLineDiscretization {
    HalfLineDiscretization::default()
}

#[test]
fn half_plane_fibers() {
    let xi = [-0.5, 0.3, 1.1];
    let unit = HalfPlaneModel {
        h: 1.0,
        b: 1.0,
        gamma: 0.0,
        alpha: 0.8,
    };
    let critical = HalfPlaneModel {
        h: 0.25,
        b: 1.0,
        gamma: -1.0,
        alpha: 0.5,
    };
    for (m, g, scale) in [(unit, 0.0, 1.0), (critical, -1.0, 0.25)] {
        let v = fiber_spectrum(&m, &xi, 2, &disc()).unwrap();
        assert_eq!(v.len(), 6);
        for f in v {
            let direct = mu_all(2, RobinOscillatorParams::new(g, f.xi), &disc()).unwrap()[f.j - 1];
            assert!((f.value - scale * direct).abs() < 1e-12);
        }
    }
    let weak = HalfPlaneModel {
        h: 0.01,
        b: 1.0,
        gamma: -1.0,
        alpha: 1.0,
    };
    assert!((weak.gamma_hb() + 0.1).abs() < 1e-14);
    // the fiber minimum in scaled units sits just below the Neumann one
    let grid: Vec<f64> = (0..=60).map(|k| 0.5 + 0.01 * k as f64).collect();
    let lowest = |m: &HalfPlaneModel| {
        fiber_spectrum(m, &grid, 1, &disc())
            .unwrap()
            .iter()
            .map(|f| f.value)
            .fold(f64::INFINITY, f64::min)
    };
    let neumann = HalfPlaneModel { gamma: 0.0, ..weak };
    let (a, b) = (lowest(&weak), lowest(&neumann));
    assert!(a < b && b - a < 0.05, "{a} {b}");
    let (th, _) = theta(weak.gamma_hb(), 1, &disc()).unwrap();
    let (th0, _) = theta(0.0, 1, &disc()).unwrap();
    assert!((a - weak.h * th).abs() < 1e-6 && (b - weak.h * th0).abs() < 1e-6);
}

#[test]
fn small_cylinder_matches_fibers() {
    let c = CylinderModel::neumann(0.25, 1.0, 1.5, 4.0);
    let grid = CylinderGrid {
        n_s: 48,
        n_t: 64,
        extrapolate: true,
    };
    let direct = cylinder_spectrum(&c, 8, &grid).unwrap();
    let fibers = cylinder_fiber_spectrum(&c, 8, &disc()).unwrap();
    for (d, f) in direct.iter().zip(&fibers) {
        assert!((d - f).abs() < 1e-3 * f.abs().max(c.hb()), "{d} vs {f}");
    }
}

#[test]
fn cylinder_energy_definition() {
    let c = CylinderModel::neumann(0.1, 2.0, 1.0, 5.0);
    let hb = c.hb();
    assert_eq!(cylinder_energy(&c, &[], 2.0 * hb, 0.1).unwrap(), 0.0);
    let e = cylinder_energy(&c, &[0.5 * hb, 0.9 * hb], 2.0 * hb, 0.1).unwrap();
    assert!((e - 0.8 * hb).abs() < 1e-14);
    assert!(matches!(
        cylinder_energy(&c, &[0.5 * hb], hb, 0.1),
        Err(Error::ThresholdTooLow { .. })
    ));
}

#[test]
fn torus_landau_level() {
    for n in [1, 5] {
        let t = TorusModel::with_flux(n);
        let s = torus_landau_spectrum(&t, n + 3, &TorusGrid { spacing: 0.05 }).unwrap();
        let first = s.clusters[0];
        assert_eq!(first.multiplicity, n);
        assert!((first.value - 1.0).abs() < 0.01, "{}", first.value);
        assert!(s.eigenvalues[n] >= 2.8, "{}", s.eigenvalues[n]);
        assert_eq!(torus_count_below(&t, 1.5, &TorusGrid { spacing: 0.05 }).unwrap(), n);
    }
    let bad = TorusModel { r: 3.0 };
    assert!(matches!(bad.flux(), Err(Error::PhaseMismatch { .. })));
}

#[test]
fn landau_counting_function() {
    assert_eq!(nu_b(0.5), 0.0);
    assert!((nu_b(1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((nu_b(5.5) - 3.0 / (2.0 * PI)).abs() < 1e-15);
    // right-continuous steps at the odd integers
    for k in [1.0, 3.0, 5.0] {
        assert!(nu_b(k) > nu_b(k - 1e-12));
        assert_eq!(nu_b(k), nu_b(k + 1e-12));
    }
}

#[test]
fn dirichlet_square_counts() {
    let grid = SquareGrid::default();
    assert_eq!(dirichlet_square_count(1.0, 4.0, &grid).unwrap(), 0);
    let n = dirichlet_square_count(2.9, 10.0, &grid).unwrap();
    assert!(n as f64 <= 100.0 * nu_b(2.9) + 1.0, "{n}");
    assert!(n > 0);
}

#[test]
fn classical_constants() {
    for alpha in [0.5, 1.0, 2.0, 3.7] {
        assert!((lt_classical_constant(alpha, 0) - 1.0).abs() < 1e-14);
    }
    // Gamma(3/2) / (2 sqrt(pi) Gamma(2))
    assert!((lt_classical_constant(0.5, 1) - 0.25).abs() < 1e-14);
    for alpha in [0.5, 1.0, 2.0] {
        for d in 1..=3 {
            let lhs = lt_classical_constant(alpha, 1) * lt_classical_constant(alpha + 0.5, d - 1);
            assert!((lhs - lt_classical_constant(alpha, d)).abs() < 1e-12 * lhs);
        }
    }
}

#[test]
fn half_line_lieb_thirring() {
    let grid = LtGrid::default();
    let c = lt_bound_check(1.0, 0, &BoundaryPotential::Constant { gamma: 2.0 }, &grid).unwrap();
    assert!((c.lhs - 4.0).abs() < 1e-12 && (c.rhs - 8.0).abs() < 1e-12 && c.holds);
    let c = lt_bound_check(1.0, 0, &BoundaryPotential::Constant { gamma: -1.0 }, &grid).unwrap();
    assert_eq!(c.lhs, 0.0);
    assert!(c.holds);
    assert!(lt_bound_check(0.3, 0, &BoundaryPotential::Constant { gamma: 1.0 }, &grid).is_err());
}

#[test]
fn strip_lieb_thirring() {
    let bump = BoundaryPotential::Bump {
        height: 3.0,
        half_width: 1.0,
        smoothing: 0.1,
    };
    let grid = LtGrid {
        spacing: 0.05,
        ..LtGrid::default()
    };
    let c = lt_bound_check(1.0, 1, &bump, &grid).unwrap();
    assert!(c.holds && c.margin > 0.0, "{c:?}");
    assert!(c.negative_eigenvalues > 0);
    assert!(c.truncation_change <= grid.truncation_tol);
}

proptest! {
    #[test]
    fn half_line_case_is_half_the_bound(gamma in 0.01f64..10.0, alpha in 0.5f64..4.0) {
        let c = lt_bound_check(alpha, 0, &BoundaryPotential::Constant { gamma }, &LtGrid::default()).unwrap();
        prop_assert!((c.lhs - 0.5 * c.rhs).abs() <= 1e-12 * c.rhs);
    }

    #[test]
    fn cylinder_energy_is_monotone_in_lambda(
        list in proptest::collection::vec(0.0f64..3.0, 0..30),
        l1 in 0.0f64..1.0,
        dl in 0.0f64..1.0,
    ) {
        let c = CylinderModel::neumann(0.1, 1.0, 1.0, 5.0);
        let vals: Vec<f64> = list.iter().map(|v| v * c.hb()).collect();
        let thr = 3.0 * c.hb();
        let a = cylinder_energy(&c, &vals, thr, l1).unwrap();
        let b = cylinder_energy(&c, &vals, thr, l1 + dl).unwrap();
        prop_assert!(b >= a);
    }
}
