//! Hermitian band matrices, `L D L^H` factorization and Sylvester inertia.
//!
//! The factorization is unpivoted. For the shifted operators we factor, the
//! number of negative pivots equals the number of eigenvalues of the pencil
//! `(A, M)` below the shift, which is what the spectral counting in this crate
//! relies on.

use super::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct BandedHermitian<T: Scalar> {
    n: usize,
    kd: usize,
    // row-major lower band: entry (i, j), j <= i <= j + kd, at i*(kd+1) + (i-j)
    data: Vec<T>,
}

impl<T: Scalar> BandedHermitian<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            data: vec![T::zero(); n * (kd + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kd + 1) + (i - j)
    }

    /// Adds `v` at `(i, j)` and, implicitly, `conj(v)` at `(j, i)`.
    ///
    /// Diagonal contributions must be real.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (r, c, v) = if i >= j { (i, j, v) } else { (j, i, v.conj()) };
        assert!(r - c <= self.kd, "entry ({i},{j}) outside bandwidth {}", self.kd);
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c, conj) = if i >= j { (i, j, false) } else { (j, i, true) };
        if r - c > self.kd {
            return T::zero();
        }
        let v = self.data[self.idx(r, c)];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.n;
        let kd = self.kd;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let row = &self.data[i * (kd + 1)..(i + 1) * (kd + 1)];
            y[i] += row[0] * x[i];
            let jmin = i.saturating_sub(kd);
            for j in jmin..i {
                let a = row[i - j];
                y[i] += a * x[j];
                y[j] += a.conj() * x[i];
            }
        }
        y
    }

    /// `self - sigma * mass`.
    pub fn shifted(&self, sigma: f64, mass: &Mass<T>) -> Self {
        let mut out = self.clone();
        match mass {
            Mass::Identity => {
                for i in 0..self.n {
                    let k = out.idx(i, i);
                    out.data[k] -= T::from_real(sigma);
                }
            }
            Mass::Diagonal(w) => {
                for i in 0..self.n {
                    let k = out.idx(i, i);
                    out.data[k] -= T::from_real(sigma * w[i]);
                }
            }
            Mass::Banded(m) => {
                assert!(m.kd <= self.kd, "mass bandwidth exceeds stiffness bandwidth");
                for i in 0..self.n {
                    for j in i.saturating_sub(m.kd)..=i {
                        let k = out.idx(i, j);
                        out.data[k] -= m.data[m.idx(i, j)].scale(sigma);
                    }
                }
            }
        }
        out
    }

    /// Largest deviation from Hermitian symmetry on the diagonal (the
    /// off-diagonal part is Hermitian by storage).
    pub fn max_diag_imag(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let d = self.data[self.idx(i, i)];
                (d - T::from_real(d.re())).abs_sq().sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn factor(&self) -> BandLdl<T> {
        BandLdl::new(self.clone())
    }
}

/// Mass (Gram) matrix of a generalized eigenproblem `A x = e M x`.
#[derive(Debug, Clone)]
pub enum Mass<T: Scalar> {
    Identity,
    Diagonal(Vec<f64>),
    Banded(BandedHermitian<T>),
}

impl<T: Scalar> Mass<T> {
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        match self {
            Mass::Identity => x.to_vec(),
            Mass::Diagonal(w) => x.iter().zip(w).map(|(v, &wi)| v.scale(wi)).collect(),
            Mass::Banded(m) => m.matvec(x),
        }
    }
}

/// `L D L^H` factors stored in place of the band.
#[derive(Debug, Clone)]
pub struct BandLdl<T: Scalar> {
    band: BandedHermitian<T>,
    pivots: Vec<f64>,
    perturbed: usize,
}

impl<T: Scalar> BandLdl<T> {
    fn new(mut a: BandedHermitian<T>) -> Self {
        let n = a.n;
        let kd = a.kd;
        let w = kd + 1;
        let norm = a
            .data
            .iter()
            .map(|v| v.abs_sq().sqrt())
            .fold(0.0, f64::max)
            .max(1e-300);
        let tiny = norm * 1e-14;
        let mut pivots = vec![0.0; n];
        let mut perturbed = 0;
        let mut col = vec![T::zero(); kd + 1];
        for j in 0..n {
            let mut d = a.data[j * w].re();
            if d.abs() < tiny {
                d = if d < 0.0 { -tiny } else { tiny };
                perturbed += 1;
            }
            pivots[j] = d;
            let iend = (j + kd).min(n - 1);
            for k in j + 1..=iend {
                col[k - j] = a.data[k * w + (k - j)].conj().scale(1.0 / d);
            }
            for i in j + 1..=iend {
                let aij = a.data[i * w + (i - j)];
                let base = i * w + i;
                // a[i][k] for k in j+1..=i lives at base - k
                for k in j + 1..=i {
                    let upd = aij * col[k - j];
                    a.data[base - k] -= upd;
                }
            }
            for i in j + 1..=iend {
                let k = i * w + (i - j);
                a.data[k] = a.data[k].scale(1.0 / d);
            }
        }
        Self {
            band: a,
            pivots,
            perturbed,
        }
    }

    pub fn dim(&self) -> usize {
        self.band.n
    }

    /// Number of negative pivots: eigenvalues below the shift.
    pub fn negative_count(&self) -> usize {
        self.pivots.iter().filter(|&&d| d < 0.0).count()
    }

    /// Pivots that had to be nudged away from zero.
    pub fn perturbed_pivots(&self) -> usize {
        self.perturbed
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.band.n;
        let kd = self.band.kd;
        let w = kd + 1;
        let data = &self.band.data;
        let mut y = b.to_vec();
        for i in 0..n {
            let jmin = i.saturating_sub(kd);
            let mut acc = y[i];
            for j in jmin..i {
                acc -= data[i * w + (i - j)] * y[j];
            }
            y[i] = acc;
        }
        for i in 0..n {
            y[i] = y[i].scale(1.0 / self.pivots[i]);
        }
        for i in (0..n).rev() {
            let kmax = (i + kd).min(n - 1);
            let mut acc = y[i];
            for k in i + 1..=kmax {
                acc -= data[k * w + (k - i)].conj() * y[k];
            }
            y[i] = acc;
        }
        y
    }
}

/// Collects Hermitian entries before the bandwidth is known.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder<T: Scalar> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `v` at `(i, j)` and `conj(v)` at `(j, i)` (only once on the
    /// diagonal).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.entries.push((i, j, v));
    }

    /// Adds the Hermitian rank-one link term `w |c_q u_q - u_p|^2` to the
    /// quadratic form: `w` on both diagonals and `-w c_q` at `(p, q)`.
    pub fn add_link(&mut self, p: usize, q: usize, w: f64, c_q: T) {
        self.add(p, p, T::from_real(w));
        self.add(q, q, T::from_real(w));
        // conj(u_p) * (-w c_q) * u_q  is the (p, q) entry
        self.add(p, q, -(c_q.scale(w)));
    }

    pub fn build(&self) -> BandedHermitian<T> {
        let kd = self
            .entries
            .iter()
            .map(|&(i, j, _)| i.abs_diff(j))
            .max()
            .unwrap_or(0);
        self.build_with_bandwidth(kd)
    }

    pub fn build_with_bandwidth(&self, kd: usize) -> BandedHermitian<T> {
        let mut m = BandedHermitian::zeros(self.n, kd);
        for &(i, j, v) in &self.entries {
            m.add(i, j, v);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn random_hermitian(n: usize, kd: usize, seed: u64) -> BandedHermitian<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = BandedHermitian::zeros(n, kd);
        for i in 0..n {
            m.add(i, i, Complex64::new(4.0 * next(), 0.0));
            for j in i.saturating_sub(kd)..i {
                m.add(i, j, Complex64::new(next(), next()));
            }
        }
        m
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = random_hermitian(40, 5, 7).shifted(-10.0, &Mass::Identity);
        let x: Vec<Complex64> = (0..40).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b = a.matvec(&x);
        let y = a.factor().solve(&b);
        let err: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn inertia_counts_tridiagonal_spectrum() {
        use crate::linalg::tridiag::SymTridiagonal;
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 0.3 + 0.1 * (i as f64).cos()).collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone());
        let mut b = BandedHermitian::<f64>::zeros(n, 1);
        for i in 0..n {
            b.add(i, i, diag[i]);
            if i + 1 < n {
                b.add(i + 1, i, off[i]);
            }
        }
        for x in [-0.9, -0.2, 0.0, 0.35, 1.1] {
            let c = b.shifted(x, &Mass::Identity).factor().negative_count();
            assert_eq!(c, t.count_below(x));
        }
    }
}
