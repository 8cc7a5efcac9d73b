use std::f64::consts::PI;

use magrobin::band1d::{mu, DirectBands, HalfLineDiscretization, RobinOscillatorParams};
use magrobin::error::Error;
use magrobin::geometry::BoundaryCurve;
use magrobin::semiclassical::{
    count_limit, density_count, density_energy, energy_limit, energy_limit_unbounded, mollify, p_truncation,
    xi_window, FieldOnBoundary, RobinTrace,
};

fn bands() -> DirectBands {
    DirectBands::new(4, HalfLineDiscretization::default())
}

fn circle() -> BoundaryCurve {
    BoundaryCurve::circle(1.0, 64).unwrap()
}

/// `int (mu_1(0, xi) - level)_-` by a plain trapezoid on a fine grid.
fn neumann_negative_part(level: f64) -> f64 {
    let disc = HalfLineDiscretization::default();
    let (a, b, n) = (-1.0, 3.0, 800);
    let dx = (b - a) / n as f64;
    (0..=n)
        .map(|k| {
            let x = a + k as f64 * dx;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * (level - mu(1, RobinOscillatorParams::new(0.0, x), &disc).unwrap()).max(0.0)
        })
        .sum::<f64>()
        * dx
}

fn step_trace(curve: &BoundaryCurve) -> RobinTrace {
    let n = curve.len();
    let g = (0..n).map(|k| if k < n / 2 { -1.0 } else { 0.5 }).collect();
    RobinTrace::bounded(g, curve.spacing()).unwrap()
}

#[test]
fn density_examples() {
    let d = density_energy(0.0, 1.0, 0.0, &bands(), 1e-8).unwrap();
    assert_eq!(d.value, 0.0);
    let d = density_energy(0.0, 1.0, 1.0, &bands(), 1e-8).unwrap();
    assert_eq!(d.bands, 1);
    assert!((d.value - neumann_negative_part(1.0)).abs() < 1e-4, "{}", d.value);
    assert!(matches!(
        density_energy(0.0, 1.0, 1.2, &bands(), 1e-8),
        Err(Error::LevelAboveField { .. })
    ));
}

#[test]
fn large_alpha_ignores_the_coupling() {
    let c = circle();
    let (b, lambda) = (1.0, 0.9);
    let field = FieldOnBoundary::constant(b, c.len()).unwrap();
    let expected = c.total_length * b.powf(1.5) / (2.0 * PI) * neumann_negative_part(lambda / b);
    for g in [-1.0, 0.0, 2.0] {
        let trace = RobinTrace::constant(g, &c).unwrap();
        let r = energy_limit(&c, &field, &trace, lambda, 0.75, &bands(), 1e-8).unwrap();
        assert!((r.value - expected).abs() < 1e-4, "gamma {g}: {} vs {expected}", r.value);
    }
}

#[test]
fn critical_alpha_branches() {
    let c = circle();
    let field = FieldOnBoundary::constant(1.0, c.len()).unwrap();
    let zero = RobinTrace::constant(0.0, &c).unwrap();
    let a = energy_limit(&c, &field, &zero, 1.0, 0.5, &bands(), 1e-8).unwrap();
    let b = energy_limit(&c, &field, &zero, 1.0, 1.0, &bands(), 1e-8).unwrap();
    assert!((a.value - b.value).abs() < 1e-8);
    let attractive = RobinTrace::constant(-1.0, &c).unwrap();
    let m = energy_limit(&c, &field, &attractive, 1.0, 0.5, &bands(), 1e-8).unwrap();
    assert!(m.value > a.value + 0.1);
    assert!(m.quadrature_error_estimate < 1e-6);

    let rough = RobinTrace::unbounded(vec![-0.5; c.len()], c.spacing()).unwrap();
    assert!(matches!(
        energy_limit(&c, &field, &rough, 1.0, 0.5, &bands(), 1e-8),
        Err(Error::MissingSupBound)
    ));
    let flagged = energy_limit_unbounded(&c, &field, &rough, 1.0, 0.5, &bands(), 1e-8).unwrap();
    assert!(flagged.unproven_regime);
}

#[test]
fn field_scaling() {
    let c = circle();
    let (b, lambda, g) = (0.7, 0.6, -0.4);
    let at = |b: f64, lambda: f64, g: f64| {
        let field = FieldOnBoundary::constant(b, c.len()).unwrap();
        let trace = RobinTrace::constant(g, &c).unwrap();
        energy_limit(&c, &field, &trace, lambda, 0.5, &bands(), 1e-9).unwrap().value
    };
    let ratio = at(4.0 * b, 4.0 * lambda, 2.0 * g) / at(b, lambda, g);
    assert!((ratio - 8.0).abs() < 1e-5, "{ratio}");
}

#[test]
fn count_examples() {
    let c = circle();
    let field = FieldOnBoundary::constant(1.0, c.len()).unwrap();
    let zero = RobinTrace::constant(0.0, &c).unwrap();
    let r = count_limit(&c, &field, &zero, 0.5, 1.0, &bands(), 1e-8).unwrap();
    assert_eq!(r.value, 0.0);
    assert!(matches!(
        count_limit(&c, &field, &zero, 1.0, 1.0, &bands(), 1e-8),
        Err(Error::LevelNotBelowField { .. })
    ));
    let values: Vec<f64> = [0.7, 0.8, 0.9]
        .iter()
        .map(|&l| count_limit(&c, &field, &zero, l, 1.0, &bands(), 1e-8).unwrap().value)
        .collect();
    assert!(values[0] > 0.0 && values[0] <= values[1] && values[1] <= values[2], "{values:?}");
}

#[test]
fn energy_derivative_is_the_count() {
    let c = circle();
    let field = FieldOnBoundary::constant(1.0, c.len()).unwrap();
    let zero = RobinTrace::constant(0.0, &c).unwrap();
    let e = |l: f64| energy_limit(&c, &field, &zero, l, 1.0, &bands(), 1e-11).unwrap().value;
    for lambda in [0.7, 0.9] {
        let d = (e(lambda + 1e-3) - e(lambda - 1e-3)) / 2e-3;
        let n = count_limit(&c, &field, &zero, lambda, 1.0, &bands(), 1e-8).unwrap().value;
        assert!((d - n).abs() < 0.01 * n, "lambda {lambda}: {d} vs {n}");
    }
    // the pointwise densities obey the same relation
    let d0 = density_energy(-0.5, 1.0, 0.8 + 1e-3, &bands(), 1e-11).unwrap().value
        - density_energy(-0.5, 1.0, 0.8 - 1e-3, &bands(), 1e-11).unwrap().value;
    let n0 = density_count(-0.5, 1.0, 0.8, &bands()).unwrap().value;
    assert!((d0 / 2e-3 - n0).abs() < 0.01 * n0);
}

#[test]
fn mollifier_examples() {
    let c = BoundaryCurve::circle(1.0, 256).unwrap();
    let flat = RobinTrace::constant(-0.3, &c).unwrap();
    let m = mollify(&flat, 0.2).unwrap();
    assert!(m.gamma_samples.iter().all(|g| (g + 0.3).abs() < 1e-12));

    let step = step_trace(&c);
    let mut last = f64::INFINITY;
    for a in [0.4, 0.2, 0.1] {
        let m = mollify(&step, a).unwrap();
        assert!(m.essential_sup.unwrap() <= step.essential_sup.unwrap() + 1e-12);
        let d = m.l3_distance(&step);
        assert!(d < last, "a = {a}");
        last = d;
    }
    assert!(mollify(&step, 0.0).is_err());
}

#[test]
fn mollified_functional_converges() {
    let c = BoundaryCurve::circle(1.0, 32).unwrap();
    let field = FieldOnBoundary::constant(1.0, c.len()).unwrap();
    let step = step_trace(&c);
    let e = |t: &RobinTrace| energy_limit(&c, &field, t, 1.0, 0.5, &bands(), 1e-6).unwrap().value;
    let target = e(&step);
    let gaps: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&a| (e(&mollify(&step, a).unwrap()) - target).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn band_truncation() {
    assert_eq!(p_truncation(0.0, 1.0, &bands()).unwrap(), 1);
    let p: Vec<usize> = [0.0, -1.0, -2.0]
        .iter()
        .map(|&g| p_truncation(g, 1.0, &bands()).unwrap())
        .collect();
    assert!(p.windows(2).all(|w| w[0] <= w[1]), "{p:?}");
    assert!(p[2] >= 1 && p[2] <= 4);
}

#[test]
fn xi_windows() {
    let disc = HalfLineDiscretization::default();
    let k = xi_window((0.0, 0.0), 0.8, 1e-6, &bands()).unwrap();
    assert!(k.is_finite());
    for x in [-k - 0.01, k + 0.01] {
        assert!(mu(1, RobinOscillatorParams::new(0.0, x), &disc).unwrap() > 0.8);
    }
    let loose = xi_window((0.0, 0.0), 1.0, 1e-4, &bands()).unwrap();
    let tight = xi_window((0.0, 0.0), 1.0, 1e-8, &bands()).unwrap();
    assert!(tight >= loose);
    // the neglected tail at level one is below the tolerance
    let (n, dx) = (400, 0.01);
    let tail: f64 = (0..n)
        .map(|i| {
            let x = tight + (i as f64 + 0.5) * dx;
            (1.0 - mu(1, RobinOscillatorParams::new(0.0, x), &disc).unwrap()).max(0.0) * dx
        })
        .sum();
    assert!(tail < 1e-8, "{tail}");
}

#[test]
fn spectral_sum_is_continuous_in_gamma() {
    // for a constant coupling the functional is a single density
    for g in [-1.0, 0.0, 1.0] {
        let j = |g: f64| density_energy(g, 1.0, 1.0, &bands(), 1e-8).unwrap().value;
        let j0 = j(g);
        let jumps: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|t| (j(g + t) - j0).abs()).collect();
        assert!(jumps.windows(2).all(|w| w[1] < w[0]), "gamma {g}: {jumps:?}");
        assert!(jumps[2] < 1e-2);
    }
}
