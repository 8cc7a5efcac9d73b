//! Band functions against the parabolic cylinder function.
//!
//! The decaying solution of `-u'' + (t - xi)^2 u = mu u` is
//! `U(-mu/2, sqrt(2)(t - xi))`, so `mu` is an eigenvalue exactly when
//! `sqrt(2) U'(a, z0) = gamma U(a, z0)` at `z0 = -sqrt(2) xi`. `U` is built
//! from its Maclaurin representation through Kummer functions, which is
//! accurate for the moderate `|z0|` used here.

use magrobin::band1d::{mu, theta, HalfLineDiscretization, RobinOscillatorParams};
use statrs::function::gamma::gamma;

const THETA0: f64 = 0.590_106_124_950_234_128_728;
const XI0: f64 = 0.768_183_653_139_165_757_351;

fn kummer(a: f64, b: f64, x: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..400 {
        let k = k as f64;
        term *= (a + k) / (b + k) * x / (k + 1.0);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(U(a, z), U'(a, z))`
fn weber(a: f64, z: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let u0 = pi.sqrt() / (2f64.powf(0.5 * a + 0.25) * gamma(0.75 + 0.5 * a));
    let du0 = -pi.sqrt() / (2f64.powf(0.5 * a - 0.25) * gamma(0.25 + 0.5 * a));
    let (a1, a2) = (0.5 * a + 0.25, 0.5 * a + 0.75);
    let x = 0.5 * z * z;
    let e = (-0.25 * z * z).exp();
    let u1 = e * kummer(a1, 0.5, x);
    let du1 = e * (-0.5 * z * kummer(a1, 0.5, x) + z * 2.0 * a1 * kummer(a1 + 1.0, 1.5, x));
    let u2 = e * z * kummer(a2, 1.5, x);
    let du2 = e * ((1.0 - 0.5 * z * z) * kummer(a2, 1.5, x) + z * z * a2 / 1.5 * kummer(a2 + 1.0, 2.5, x));
    (u0 * u1 + du0 * u2, u0 * du1 + du0 * du2)
}

fn boundary_mismatch(m: f64, gamma_r: f64, xi: f64) -> f64 {
    let (u, du) = weber(-0.5 * m, -(2f64).sqrt() * xi);
    2f64.sqrt() * du - gamma_r * u
}

/// Lowest eigenvalue below 1 by scanning for the first sign change.
fn oracle_mu1(gamma_r: f64, xi: f64) -> f64 {
    let f = |m: f64| boundary_mismatch(m, gamma_r, xi);
    let mut lo = -6.0;
    let mut f_lo = f(lo);
    let step = 1e-3;
    loop {
        let hi = lo + step;
        assert!(hi < 1.0, "no eigenvalue below 1");
        let f_hi = f(hi);
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..80 {
                let c = 0.5 * (a + b);
                if f(c).signum() == f_lo.signum() {
                    a = c;
                } else {
                    b = c;
                }
            }
            return 0.5 * (a + b);
        }
        lo = hi;
        f_lo = f_hi;
    }
}

#[test]
fn oracle_reproduces_neumann_minimum() {
    // golden section on the oracle band
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.6, 0.95);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if oracle_mu1(0.0, c) < oracle_mu1(0.0, d) {
            b = d;
        } else {
            a = c;
        }
    }
    let xi = 0.5 * (a + b);
    assert!((oracle_mu1(0.0, xi) - THETA0).abs() < 1e-12);
    // a flat minimum pins xi to about the square root of the value accuracy
    assert!((xi - XI0).abs() < 1e-6, "{xi}");
}

#[test]
fn library_minimum_matches_oracle() {
    let (th, xm) = theta(0.0, 1, &HalfLineDiscretization::default()).unwrap();
    assert!((th - THETA0).abs() < 1e-9, "{th}");
    assert!((xm - XI0).abs() < 1e-6, "{xm}");
}

// (gamma, xi, mu_1) from mpmath's pcfu at 30 digits
const FROZEN: [(f64, f64, f64); 7] = [
    (0.0, 1.2, 0.680_580_307_259_802_069),
    (-1.0, 0.0, -0.684_837_893_562_577_355),
    (-1.0, 0.8, -0.699_366_931_043_800_582),
    (-0.5, 0.3, 0.110_442_425_022_821_068),
    (-1.5, -0.4, -1.675_935_289_602_035_584),
    (-2.0, 1.0, -3.381_080_672_619_865_834),
    (0.3, 0.9, 0.775_065_380_757_922_519),
];

#[test]
fn series_oracle_matches_frozen_values() {
    for (g, xi, v) in FROZEN {
        assert!((oracle_mu1(g, xi) - v).abs() < 1e-11, "({g}, {xi})");
    }
}

#[test]
fn robin_band_values_match_oracle() {
    let fd = HalfLineDiscretization::default();
    let sh = HalfLineDiscretization::shooting();
    for (g, xi, exact) in FROZEN {
        let p = RobinOscillatorParams::new(g, xi);
        let a = mu(1, p, &fd).unwrap();
        let b = mu(1, p, &sh).unwrap();
        assert!((a - exact).abs() < 1e-8, "fd ({g}, {xi}): {a} vs {exact}");
        assert!((b - exact).abs() < 1e-8, "shooting ({g}, {xi}): {b} vs {exact}");
    }
}
