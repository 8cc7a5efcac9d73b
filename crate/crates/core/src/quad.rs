//! One-dimensional quadrature, root finding and minimization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two Romberg diagonals.
    pub error: f64,
    pub evals: usize,
}

/// Romberg integration of a smooth integrand on `[a, b]`.
///
/// Stops when two successive extrapolated values differ by less than `tol`
/// (absolute) or after `max_level` halvings, whichever comes first. The
/// returned error is that last difference, so callers can check it.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_level: usize) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            evals: 0,
        };
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_level + 1);
    let mut h = b - a;
    let mut trap = 0.5 * h * (f(a) + f(b));
    let mut evals = 2;
    rows.push(vec![trap]);
    let mut best = trap;
    let mut err = f64::INFINITY;
    for level in 1..=max_level {
        let n_new = 1usize << (level - 1);
        let mut s = 0.0;
        for i in 0..n_new {
            s += f(a + (i as f64 + 0.5) * h);
        }
        evals += n_new;
        trap = 0.5 * trap + 0.5 * h * s;
        h *= 0.5;
        let prev = &rows[level - 1];
        let mut row = Vec::with_capacity(level + 1);
        row.push(trap);
        let mut p4 = 1.0;
        for k in 1..=level {
            p4 *= 4.0;
            let r = row[k - 1] + (row[k - 1] - prev[k - 1]) / (p4 - 1.0);
            row.push(r);
        }
        let cand = row[level];
        err = (cand - best).abs();
        best = cand;
        rows.push(row);
        // two quiet levels in a row guard against accidental agreement
        if level >= 4 && err <= tol && (rows[level - 1][level - 1] - rows[level - 2][level - 2]).abs() <= 10.0 * tol {
            break;
        }
    }
    Quadrature {
        value: best,
        error: err,
        evals,
    }
}

/// Trapezoid rule on a closed periodic grid (the first node is not repeated).
pub fn periodic_trapezoid(samples: &[f64], spacing: f64) -> f64 {
    samples.iter().sum::<f64>() * spacing
}

/// Brent's root finder on a sign-changing bracket.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{a}, {b}]: f = {fa}, {fb}"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::Numerical("Brent root finder did not converge".into()))
}

/// Brent's minimizer (golden section with parabolic steps) on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn brent_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let mut x = a + CGOLD * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = xtol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Richardson extrapolation of values computed at spacings `h, h/r, h/r^2,
/// ...` whose error expands in powers `h^p, h^{2p}, ...`.
pub fn richardson(values: &[f64], ratio: f64, p: f64) -> f64 {
    let mut t = values.to_vec();
    let mut factor = ratio.powf(p);
    for level in 1..values.len() {
        for i in (level..t.len()).rev() {
            t[i] = t[i] + (t[i] - t[i - 1]) / (factor - 1.0);
        }
        factor *= ratio.powf(p);
    }
    *t.last().unwrap_or(&f64::NAN)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn romberg_integrates_gaussian() {
        let q = romberg(|x| (-x * x).exp(), -6.0, 6.0, 1e-12, 20);
        assert!((q.value - std::f64::consts::PI.sqrt()).abs() < 1e-11, "{q:?}");
        assert!(q.error < 1e-10);
    }

    #[test]
    fn brent_root_finds_cube_root() {
        let r = brent_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn brent_min_parabola() {
        let (x, fx) = brent_min(|x| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 3.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-13);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let exact = 2.0;
        let vals: Vec<f64> = [0.1f64, 0.05, 0.025]
            .iter()
            .map(|h| exact + 3.0 * h * h - 7.0 * h.powi(4))
            .collect();
        assert!((richardson(&vals, 2.0, 2.0) - exact).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-13);
    }
}
