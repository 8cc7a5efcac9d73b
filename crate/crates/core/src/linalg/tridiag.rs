//! Real symmetric tridiagonal matrices.
//!
//! Eigenvalues come from bisection on the Sturm sequence (the count of
//! negative pivots of `T - x I` equals the number of eigenvalues below `x`),
//! eigenvectors from inverse iteration. A small implicit-shift QL routine is
//! kept for the projected matrices produced by Lanczos.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal length must be n - 1"
        );
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let scale = self.gershgorin().1.abs().max(1.0);
        let tiny = f64::EPSILON * f64::EPSILON * scale;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure `(lo, hi)` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (lo, hi) = self.gershgorin();
        self.eigenvalue_in(k, lo, hi)
    }

    /// Bisection for the `k`-th eigenvalue given a bracket that contains it.
    pub fn eigenvalue_in(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        assert!(k < self.len(), "eigenvalue index out of range");
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let tol = 4.0 * f64::EPSILON * scale;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues strictly below `x`, ascending.
    pub fn eigenvalues_below(&self, x: f64) -> Vec<f64> {
        let count = self.count_below(x);
        let (lo, _) = self.gershgorin();
        (0..count).map(|k| self.eigenvalue_in(k, lo, x)).collect()
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn lowest(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let count = count.min(self.len());
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let start = out.last().copied().unwrap_or(lo);
            out.push(self.eigenvalue_in(k, start - 1e-12 * start.abs().max(1.0), hi));
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Unit eigenvector for an (accurate) eigenvalue, by inverse iteration
    /// with a partially pivoted tridiagonal factorization.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Numerical("empty matrix".into()));
        }
        let (lo, hi) = self.gershgorin();
        let shift = lambda + 1e-10 * (hi - lo).max(1.0) * f64::EPSILON.sqrt();
        let lu = PivotedTridiagLu::new(self, shift);
        // Deterministic, non-symmetric start vector.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.37 * ((i as f64) * 0.618_033_988_7).fract())
            .collect();
        normalize(&mut x);
        for _ in 0..4 {
            let mut y = lu.solve(&x);
            let nrm = norm(&y);
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::Numerical("inverse iteration broke down".into()));
            }
            y.iter_mut().for_each(|v| *v /= nrm);
            x = y;
        }
        Ok(x)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    x.iter_mut().for_each(|v| *v /= n);
}

/// LU with partial pivoting of `T - shift I` (Gaussian elimination keeps at
/// most two super-diagonals).
struct PivotedTridiagLu {
    // U rows: u0 diagonal, u1 first super, u2 second super
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedTridiagLu {
    fn new(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        let tiny = f64::EPSILON * (t.gershgorin().1.abs() + t.gershgorin().0.abs()).max(1.0);
        // current row i holds (a, b, c) at columns (i, i+1, i+2)
        let mut a = t.diag[0] - shift;
        let mut b = if n > 1 { t.off[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if a.abs() < tiny { tiny } else { a };
                u1[i] = 0.0;
                u2[i] = 0.0;
                break;
            }
            // next row (i+1) entries at columns (i, i+1, i+2)
            let na = t.off[i];
            let nb = t.diag[i + 1] - shift;
            let nc = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if na.abs() > a.abs() {
                swapped[i] = true;
                let m = a / na;
                u0[i] = na;
                u1[i] = nb;
                u2[i] = nc;
                mult[i] = m;
                a = b - m * nb;
                b = c - m * nc;
                c = 0.0;
            } else {
                let piv = if a.abs() < tiny { tiny } else { a };
                let m = na / piv;
                u0[i] = piv;
                u1[i] = b;
                u2[i] = c;
                mult[i] = m;
                a = nb - m * b;
                b = nc - m * c;
                c = 0.0;
            }
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            if i + 1 < n {
                v -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * x[i + 2];
            }
            x[i] = v / self.u0[i];
        }
        x
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// Returns eigenvalues (ascending) and, for each requested row index of the
/// eigenvector matrix, the corresponding row. Passing every index yields the
/// full eigenvector matrix; passing only the last index yields the bottom
/// components used for Lanczos residual estimates.
pub fn ql_implicit(diag: &[f64], off: &[f64], rows: &[usize]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    // z[r][k]: row r (of the tracked rows) of eigenvector k
    let mut z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            row[r] = 1.0;
            row
        })
        .collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let fz = row[i + 1];
                    row[i + 1] = s * row[i] + c * fz;
                    row[i] = c * row[i] - s * fz;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let values = order.iter().map(|&k| d[k]).collect();
    let rows_out = z
        .into_iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok((values, rows_out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    fn exact_laplacian(n: usize, k: usize) -> f64 {
        let theta = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
        2.0 - 2.0 * theta.cos()
    }

    #[test]
    fn sturm_bisection_matches_closed_form() {
        let t = laplacian(50);
        for k in [0, 1, 7, 49] {
            assert!((t.eigenvalue(k) - exact_laplacian(50, k)).abs() < 1e-13);
        }
        assert_eq!(t.count_below(exact_laplacian(50, 3) + 1e-9), 4);
    }

    #[test]
    fn inverse_iteration_residual() {
        let t = laplacian(40);
        let lam = t.eigenvalue(2);
        let v = t.eigenvector(lam).unwrap();
        let tv = t.matvec(&v);
        let res: f64 = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lam * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn ql_agrees_with_bisection() {
        let diag: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin() + 2.0).collect();
        let off: Vec<f64> = (0..29).map(|i| 0.5 + 0.1 * (i as f64).cos()).collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone());
        let all: Vec<usize> = (0..30).collect();
        let (vals, z) = ql_implicit(&diag, &off, &all).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert!((v - t.eigenvalue(k)).abs() < 1e-12);
        }
        // columns orthonormal
        let dot: f64 = (0..30).map(|r| z[r][3] * z[r][5]).sum();
        assert!(dot.abs() < 1e-12);
    }
}
