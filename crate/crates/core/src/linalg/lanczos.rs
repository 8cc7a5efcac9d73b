//! Shift-invert Lanczos for the low end of a banded Hermitian pencil.
//!
//! The number of eigenvalues below the requested threshold is fixed up front
//! by Sylvester inertia, so the iteration knows exactly how many values it
//! owes. Multiplicities that a single Krylov sequence cannot see are picked up
//! by restarting orthogonally to the locked vectors.

use super::banded::{BandedHermitian, Mass};
use super::scalar::{axpy, dot, Scalar};
use super::tridiag::ql_implicit;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Relative tolerance on the shifted-inverse Ritz values.
    pub tol: f64,
    /// A value believed to lie below the spectrum; lowered until the inertia
    /// count confirms it.
    pub floor: f64,
    pub seed: u64,
    pub want_vectors: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            floor: 0.0,
            seed: 0x5eed,
            want_vectors: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenSlice<T: Scalar> {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<T>>,
    /// Inertia count below the threshold.
    pub count: usize,
    pub shift: f64,
}

/// Number of eigenvalues of `(a, mass)` strictly below `x`.
pub fn count_below<T: Scalar>(a: &BandedHermitian<T>, mass: &Mass<T>, x: f64) -> usize {
    a.shifted(x, mass).factor().negative_count()
}

/// Finds a shift with no eigenvalue below it, starting from `floor`.
pub fn safe_floor<T: Scalar>(a: &BandedHermitian<T>, mass: &Mass<T>, floor: f64) -> f64 {
    let mut sigma = floor;
    let mut step = floor.abs().max(1.0);
    while count_below(a, mass, sigma) > 0 {
        sigma -= step;
        step *= 2.0;
    }
    sigma
}

/// Moves a shift with nothing below it up towards the bottom of the
/// spectrum, which lies below `cap`. Clustered low eigenvalues separate far
/// better after inversion about a nearby shift.
fn tighten_shift<T: Scalar>(a: &BandedHermitian<T>, mass: &Mass<T>, sigma: f64, cap: f64) -> f64 {
    let (mut lo, mut hi) = (sigma, cap);
    for _ in 0..5 {
        let mid = 0.5 * (lo + hi);
        if count_below(a, mass, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // stay a fraction of the bracket below the lowest value so the inverted
    // operator is not dominated by it alone
    lo - 0.25 * (hi - lo)
}

/// All eigenvalues strictly below `threshold`, ascending.
pub fn eigenvalues_below<T: Scalar>(
    a: &BandedHermitian<T>,
    mass: &Mass<T>,
    threshold: f64,
    opts: &LanczosOptions,
) -> Result<EigenSlice<T>> {
    let count = count_below(a, mass, threshold);
    lowest_eigenpairs(a, mass, count, threshold, opts)
}

/// The `k` lowest eigenpairs; `cap` bounds them from above (pass the
/// threshold whose inertia produced `k`, or `f64::INFINITY`).
pub fn lowest_eigenpairs<T: Scalar>(
    a: &BandedHermitian<T>,
    mass: &Mass<T>,
    k: usize,
    cap: f64,
    opts: &LanczosOptions,
) -> Result<EigenSlice<T>> {
    let n = a.dim();
    let mut sigma = safe_floor(a, mass, opts.floor);
    if k > 0 && k <= n && cap.is_finite() {
        sigma = tighten_shift(a, mass, sigma, cap);
    }
    if k == 0 {
        return Ok(EigenSlice {
            values: vec![],
            vectors: vec![],
            count: 0,
            shift: sigma,
        });
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let ldl = a.shifted(sigma, mass).factor();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_vecs: Vec<Vec<T>> = Vec::new();
    let mut restarts = 0;
    let mut start: Option<Vec<T>> = None;
    while locked_vals.len() < k {
        restarts += 1;
        if restarts > 8 + k {
            return Err(Error::Numerical(format!(
                "Lanczos found {} of {k} eigenvalues",
                locked_vals.len()
            )));
        }
        let need = k - locked_vals.len();
        let run = run_lanczos(&ldl, mass, sigma, need, cap, &locked_vecs, start.take(), &mut rng, opts)?;
        start = run.restart;
        locked_vals.extend(run.values);
        locked_vecs.extend(run.vectors);
    }
    let mut order: Vec<usize> = (0..locked_vals.len()).collect();
    order.sort_by(|&i, &j| locked_vals[i].partial_cmp(&locked_vals[j]).unwrap());
    order.truncate(k);
    let values = order.iter().map(|&i| locked_vals[i]).collect();
    let vectors = if opts.want_vectors {
        order.iter().map(|&i| locked_vecs[i].clone()).collect()
    } else {
        vec![]
    };
    Ok(EigenSlice {
        values,
        vectors,
        count: k,
        shift: sigma,
    })
}

/// The `k` lowest eigenvalues, with a threshold found by inertia so that the
/// Lanczos run is told exactly how many values lie below it.
pub fn lowest_by_inertia<T: Scalar>(
    a: &BandedHermitian<T>,
    mass: &Mass<T>,
    k: usize,
    guess: f64,
    opts: &LanczosOptions,
) -> Result<EigenSlice<T>> {
    if k == 0 || k > a.dim() {
        return Err(Error::InvalidArgument(format!("cannot take {k} eigenvalues of a {}x{} pencil", a.dim(), a.dim())));
    }
    let floor = safe_floor(a, mass, opts.floor);
    let mut lo = floor;
    let mut hi = guess.max(floor + 1e-3 * floor.abs().max(1e-3));
    let mut step = (hi - floor).max(1e-3);
    let mut count = count_below(a, mass, hi);
    while count < k {
        lo = hi;
        hi += step;
        step *= 2.0;
        count = count_below(a, mass, hi);
    }
    // an overshoot would make Lanczos owe many unwanted values
    let slack = k + (k / 2).max(2);
    for _ in 0..12 {
        if count <= slack {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let c = count_below(a, mass, mid);
        if c >= k {
            hi = mid;
            count = c;
        } else {
            lo = mid;
        }
    }
    let opts = LanczosOptions {
        floor,
        ..opts.clone()
    };
    let mut s = eigenvalues_below(a, mass, hi, &opts)?;
    s.values.truncate(k);
    if opts.want_vectors {
        s.vectors.truncate(k);
    }
    Ok(s)
}

fn m_dot<T: Scalar>(mass: &Mass<T>, x: &[T], y: &[T]) -> T {
    match mass {
        Mass::Identity => dot(x, y),
        _ => dot(x, &mass.apply(y)),
    }
}

fn orthogonalize<T: Scalar>(mass: &Mass<T>, w: &mut [T], basis: &[Vec<T>]) {
    // two passes of classical Gram-Schmidt in the M inner product
    for _ in 0..2 {
        let mw = mass.apply(w);
        let coeffs: Vec<T> = basis.iter().map(|q| dot(q, &mw)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(-c, q, w);
        }
    }
}

struct Run<T> {
    values: Vec<f64>,
    vectors: Vec<Vec<T>>,
    restart: Option<Vec<T>>,
}

#[allow(clippy::too_many_arguments)]
fn run_lanczos<T: Scalar>(
    ldl: &super::banded::BandLdl<T>,
    mass: &Mass<T>,
    sigma: f64,
    need: usize,
    cap: f64,
    locked: &[Vec<T>],
    start: Option<Vec<T>>,
    rng: &mut ChaCha8Rng,
    opts: &LanczosOptions,
) -> Result<Run<T>> {
    let n = ldl.dim();
    let available = n - locked.len();
    let max_dim = available.min((4 * need + 150).max(need + 20));
    let mut q: Vec<T> = start.unwrap_or_else(|| (0..n).map(|_| T::from_real(rng.gen::<f64>() - 0.5)).collect());
    orthogonalize(mass, &mut q, locked);
    let nrm = m_dot(mass, &q, &q).re().sqrt();
    q.iter_mut().for_each(|v| *v = v.scale(1.0 / nrm));

    let mut basis: Vec<Vec<T>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let theta_cut = if cap.is_finite() {
        1.0 / (cap - sigma)
    } else {
        0.0
    };
    let check_every = 5usize;
    loop {
        let j = basis.len() - 1;
        let mq = mass.apply(&basis[j]);
        let mut w = ldl.solve(&mq);
        let a = dot(&basis[j], &mass.apply(&w)).re();
        alpha.push(a);
        axpy(T::from_real(-a), &basis[j], &mut w);
        if j > 0 {
            let b = beta[j - 1];
            axpy(T::from_real(-b), &basis[j - 1], &mut w);
        }
        orthogonalize(mass, &mut w, &basis);
        orthogonalize(mass, &mut w, locked);
        let b = m_dot(mass, &w, &w).re().max(0.0).sqrt();
        let dim = basis.len();
        let exhausted = b <= 1e-14 * alpha.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        let at_cap = dim >= max_dim;
        if dim % check_every == 0 || exhausted || at_cap {
            let (theta, last) = ql_implicit(&alpha, &beta, &[dim - 1])?;
            let mut good = Vec::new();
            for (i, &t) in theta.iter().enumerate() {
                if t <= theta_cut {
                    continue;
                }
                let resid = (b * last[0][i]).abs();
                if resid <= opts.tol * t.abs() || exhausted {
                    good.push(i);
                }
            }
            // wanted Ritz values are the largest ones; accept when the top
            // `need` are converged, or when the space can grow no further
            let wanted: Vec<usize> = (0..theta.len())
                .rev()
                .filter(|&i| theta[i] > theta_cut)
                .take(need)
                .collect();
            let all_good = wanted.len() == need && wanted.iter().all(|i| good.contains(i));
            if all_good || exhausted || at_cap {
                let all_rows: Vec<usize> = (0..dim).collect();
                let (_, z) = ql_implicit(&alpha, &beta, &all_rows)?;
                let ritz = |i: usize| {
                    let mut x = vec![T::zero(); n];
                    for (r, qr) in basis.iter().enumerate() {
                        axpy(T::from_real(z[r][i]), qr, &mut x);
                    }
                    x
                };
                let mut run = Run {
                    values: vec![],
                    vectors: vec![],
                    restart: None,
                };
                let mut rest = vec![T::zero(); n];
                let mut any_rest = false;
                for i in wanted {
                    let x = ritz(i);
                    if all_good || good.contains(&i) {
                        run.values.push(sigma + 1.0 / theta[i]);
                        run.vectors.push(x);
                    } else {
                        axpy(T::from_real(1.0), &x, &mut rest);
                        any_rest = true;
                    }
                }
                if any_rest {
                    // explicit restart from the unconverged wanted directions
                    run.restart = Some(rest);
                }
                return Ok(run);
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|v| *v = v.scale(1.0 / b));
        basis.push(w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tridiag::SymTridiagonal;
    use num_complex::Complex64;

    #[test]
    fn recovers_lowest_of_laplacian() {
        let n = 200;
        let mut a = BandedHermitian::<f64>::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
        }
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        let s = lowest_eigenpairs(&a, &Mass::Identity, 6, f64::INFINITY, &LanczosOptions::default()).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            assert!((v - t.eigenvalue(k)).abs() < 1e-11, "{k}: {v}");
        }
    }

    #[test]
    fn finds_repeated_eigenvalues() {
        // block-diagonal copy of the same matrix: every eigenvalue doubled
        let m = 30;
        let n = 2 * m;
        let mut a = BandedHermitian::<Complex64>::zeros(n, m);
        for blk in 0..2 {
            for i in 0..m {
                let g = blk * m + i;
                a.add(g, g, Complex64::new(2.0 + 0.01 * i as f64, 0.0));
                if i + 1 < m {
                    a.add(g + 1, g, Complex64::new(0.0, -1.0));
                }
            }
        }
        let opts = LanczosOptions::default();
        let s = eigenvalues_below(&a, &Mass::Identity, 0.5, &opts).unwrap();
        assert_eq!(s.values.len(), s.count);
        assert!(s.count >= 2 && s.count % 2 == 0);
        for pair in s.values.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-10);
        }
    }
}
