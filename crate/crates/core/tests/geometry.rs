use std::f64::consts::PI;

use magrobin::error::Error;
use magrobin::geometry::{
    curvature, field_at, from_boundary_coords, gauge_normalize, to_boundary_coords, BoundaryCurve, Shape,
    TubularCoords,
};
use proptest::prelude::*;

fn unit_disk() -> TubularCoords {
    TubularCoords::new(BoundaryCurve::circle(1.0, 512).unwrap()).unwrap()
}

#[test]
fn circle_curvature() {
    let c = BoundaryCurve::circle(2.0, 400).unwrap();
    for s in [0.0, 0.3, 2.0, 11.0] {
        assert!((curvature(&c, s).unwrap() - 0.5).abs() < 1e-6);
    }
    assert!(curvature(&c, c.total_length).is_err());
}

#[test]
fn ellipse_curvature_at_vertex() {
    // k = ab / (a^2 sin^2 + b^2 cos^2)^{3/2}, so 2 at (2, 0) and 1/4 at (0, 1)
    let c = BoundaryCurve::ellipse(2.0, 1.0, 2048).unwrap();
    assert!((c.samples[0][0] - 2.0).abs() < 1e-9 && c.samples[0][1].abs() < 1e-9);
    assert!((curvature(&c, 0.0).unwrap() - 2.0).abs() < 1e-4);
    assert!((curvature(&c, 0.25 * c.total_length).unwrap() - 0.25).abs() < 1e-4);
}

#[test]
fn turning_number() {
    let table: String = (0..900)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / 900.0;
            let r = 1.0 + 0.2 * (3.0 * th).cos();
            format!("{} {}\n", r * th.cos(), r * th.sin())
        })
        .collect();
    for c in [
        BoundaryCurve::from_table(&table, 512).unwrap(),
        BoundaryCurve::ellipse(3.0, 1.0, 512).unwrap(),
        BoundaryCurve::circle(0.5, 128).unwrap(),
    ] {
        assert!((c.turning() - 2.0 * PI).abs() < 1e-3, "{}", c.turning());
    }
}

#[test]
fn coincident_samples_are_degenerate() {
    let mut pts = Shape::Ellipse { a: 2.0, b: 1.0 }.points(64);
    pts[10] = pts[9];
    assert!(matches!(BoundaryCurve::from_points(&pts, 64), Err(Error::DegenerateCurve(_))));
}

#[test]
fn radial_coordinates_on_the_disk() {
    let tc = unit_disk();
    for th in [0.0f64, 0.4, 2.5, 5.9] {
        let (s, t) = to_boundary_coords(&tc, [0.9 * th.cos(), 0.9 * th.sin()]).unwrap();
        let ds = (s - th).rem_euclid(2.0 * PI);
        assert!(ds.min(2.0 * PI - ds) < 1e-7 && (t - 0.1).abs() < 1e-7, "{s} {t}");
        let x = from_boundary_coords(&tc, th, 0.1).unwrap();
        assert!((x[0] - 0.9 * th.cos()).abs() < 1e-7 && (x[1] - 0.9 * th.sin()).abs() < 1e-7);
        let (_, t0) = to_boundary_coords(&tc, [th.cos(), th.sin()]).unwrap();
        assert!(t0.abs() < 1e-7);
        let m = from_boundary_coords(&tc, th, 0.0).unwrap();
        assert!((m[0] - th.cos()).abs() < 1e-7 && (m[1] - th.sin()).abs() < 1e-7);
    }
}

#[test]
fn outside_the_collar() {
    let tc = unit_disk();
    let r = 1.0 - 2.0 * tc.t0;
    assert!(matches!(to_boundary_coords(&tc, [r, 0.0]), Err(Error::OutsideCollar { .. })));
    assert!(matches!(to_boundary_coords(&tc, [1.1, 0.0]), Err(Error::OutsideCollar { .. })));
    assert!(matches!(from_boundary_coords(&tc, 0.3, tc.t0), Err(Error::OutsideCollar { .. })));
}

#[test]
fn collar_depth_keeps_jacobian_positive() {
    let tc = TubularCoords::new(BoundaryCurve::ellipse(2.0, 0.7, 1024).unwrap()).unwrap();
    for k in 0..200 {
        let s = tc.curve.total_length * k as f64 / 200.0;
        assert!(tc.jacobian(s, 0.999 * tc.t0).unwrap() > 0.0);
    }
}

#[test]
fn constant_field_gauge_remainder_is_quadratic() {
    let tc = unit_disk();
    let b = 1.3;
    // symmetric gauge plus a gradient term
    let a = move |x: [f64; 2]| [-0.5 * b * x[1] + x[0].cos(), 0.5 * b * x[0] + 2.0 * x[1]];
    assert!((field_at(&a, [0.2, -0.1]) - b).abs() < 1e-8);
    let mut consts = Vec::new();
    for (ns, nt) in [(41, 21), (81, 41)] {
        let g = gauge_normalize(&tc, &a, 1.0, (0.8, 1.2), 0.15, ns, nt).unwrap();
        assert!(g.a2.iter().all(|&v| v == 0.0));
        assert!((g.b0 - b).abs() < 1e-6);
        consts.push(g.beta_constant());
    }
    assert!((consts[1] / consts[0] - 1.0).abs() < 0.2, "{consts:?}");
}

#[test]
fn zero_field_gauge_is_curl_free() {
    let tc = unit_disk();
    let a = |x: [f64; 2]| [2.0 * x[0] * x[1], x[0] * x[0] + 3.0];
    let g = gauge_normalize(&tc, &a, 2.0, (1.7, 2.4), 0.2, 41, 21).unwrap();
    assert!(g.b0.abs() < 1e-8);
    assert!(g.a1.iter().zip(&g.beta).all(|(a, b)| (a - b).abs() < 1e-8));
    let worst = g.curl().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn curl_carries_the_jacobian() {
    // B = 1 + x on the disk; the normalized curl is (1 - t k) B in (s, t)
    let tc = unit_disk();
    let a = |x: [f64; 2]| [0.0, x[0] + 0.5 * x[0] * x[0]];
    let (ns, nt) = (33, 41);
    let g = gauge_normalize(&tc, &a, 0.5, (0.3, 0.7), 0.2, ns, nt).unwrap();
    let curl = g.curl();
    for i in 0..ns {
        for j in 1..nt - 1 {
            let (s, t) = (g.s_grid[i], g.t_grid[j]);
            let x = from_boundary_coords(&tc, s, t).unwrap();
            let expected = tc.jacobian(s, t).unwrap() * (1.0 + x[0]);
            assert!((curl[i * nt + j] - expected).abs() < 1e-4, "({s}, {t})");
        }
    }
}

#[test]
fn window_deeper_than_collar() {
    let tc = unit_disk();
    let a = |x: [f64; 2]| [-0.5 * x[1], 0.5 * x[0]];
    assert!(matches!(
        gauge_normalize(&tc, &a, 0.0, (-0.2, 0.2), tc.t0, 11, 11),
        Err(Error::WindowTooDeep { .. })
    ));
}

proptest! {
    #[test]
    fn collar_roundtrip(u in 0.0f64..1.0, v in 0.0f64..0.95) {
        let tc = TubularCoords::new(BoundaryCurve::ellipse(1.5, 1.0, 1024).unwrap()).unwrap();
        let s = u * tc.curve.total_length;
        let t = v * tc.t0;
        let x = from_boundary_coords(&tc, s, t).unwrap();
        let (s2, t2) = to_boundary_coords(&tc, x).unwrap();
        let ds = (s2 - s).abs().min(tc.curve.total_length - (s2 - s).abs());
        prop_assert!(ds < 1e-10 && (t2 - t).abs() < 1e-10, "{} {}", ds, (t2 - t).abs());
    }
}
