//! Half-plane fibers and the periodic strip (cylinder) operator.
//!
//! Everything is assembled in magnetic units: with `sigma = sqrt(b/h) s` and
//! `tau = sqrt(b/h) t` the operator `(-ih d_s - b t)^2 - h^2 d_t^2` becomes
//! `hb [(-i d_sigma - tau)^2 - d_tau^2]`, and the boundary condition
//! `h du/dnu + h^alpha gamma u = 0` becomes `d_tau u = gamma_{h,b} u`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band1d::{fd_eigenvalues, mu_all, HalfLineDiscretization, RobinOscillatorParams};
use crate::error::{Error, Result};
use crate::linalg::{lowest_by_inertia, BandedHermitian, LanczosOptions, Mass, TripletBuilder};

/// Constant-field half-plane with a constant Robin coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneModel {
    pub h: f64,
    pub b: f64,
    pub gamma: f64,
    pub alpha: f64,
}

impl HalfPlaneModel {
    /// `h^{alpha - 1/2} b^{-1/2} gamma`.
    pub fn gamma_hb(&self) -> f64 {
        self.h.powf(self.alpha - 0.5) * self.gamma / self.b.sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.b > 0.0) || self.alpha < 0.5 || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid half-plane model {self:?}")));
        }
        if !self.gamma_hb().is_finite() {
            return Err(Error::InvalidArgument("effective Robin coefficient is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberValue {
    pub j: usize,
    pub xi: f64,
    pub value: f64,
}

/// `hb mu_j(gamma_{h,b}, xi)` for `j <= p_max` and every `xi`.
pub fn fiber_spectrum(
    m: &HalfPlaneModel,
    xi_grid: &[f64],
    p_max: usize,
    disc: &HalfLineDiscretization,
) -> Result<Vec<FiberValue>> {
    m.validate()?;
    let g = m.gamma_hb();
    let mut out = Vec::with_capacity(xi_grid.len() * p_max);
    for &xi in xi_grid {
        let v = mu_all(p_max, RobinOscillatorParams::new(g, xi), disc)?;
        for (j, mu) in v.into_iter().enumerate() {
            out.push(FiberValue {
                j: j + 1,
                xi,
                value: m.h * m.b * mu,
            });
        }
    }
    Ok(out)
}

/// `[0, S) x (0, h^{1/2} T)`: periodic in `s`, Robin (Neumann for
/// `gamma = 0`) at `t = 0`, Dirichlet at the top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderModel {
    pub h: f64,
    pub b: f64,
    pub s_len: f64,
    pub t_factor: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub alpha: f64,
}

fn one() -> f64 {
    1.0
}

impl CylinderModel {
    pub fn neumann(h: f64, b: f64, s_len: f64, t_factor: f64) -> Self {
        Self {
            h,
            b,
            s_len,
            t_factor,
            gamma: 0.0,
            alpha: 1.0,
        }
    }

    pub fn gamma_hb(&self) -> f64 {
        HalfPlaneModel {
            h: self.h,
            b: self.b,
            gamma: self.gamma,
            alpha: self.alpha,
        }
        .gamma_hb()
    }

    pub fn hb(&self) -> f64 {
        self.h * self.b
    }

    /// Circumference in magnetic units.
    pub fn scaled_period(&self) -> f64 {
        self.s_len * (self.b / self.h).sqrt()
    }

    /// Height in magnetic units.
    pub fn scaled_height(&self) -> f64 {
        self.b.sqrt() * self.t_factor
    }

    /// Quantized fiber momentum `2 pi n h^{1/2} b^{-1/2} / S`.
    pub fn momentum(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.scaled_period()
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.b > 0.0 && self.s_len > 0.0 && self.t_factor > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid cylinder {self:?}")));
        }
        Ok(())
    }
}

/// Grid for the direct 2D solve. With `extrapolate`, a second solve on the
/// twice-refined grid is combined by Richardson extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub n_s: usize,
    pub n_t: usize,
    pub extrapolate: bool,
}

/// Form-based five-point discretization in magnetic units, `s` fastest.
///
/// Nodes sit at `tau_i = i dtau`, `i < n_t`, with the Dirichlet node at the
/// top omitted and half weight on the boundary row.
pub fn assemble_cylinder(c: &CylinderModel, n_s: usize, n_t: usize) -> (BandedHermitian<Complex64>, Mass<Complex64>) {
    let ds = c.scaled_period() / n_s as f64;
    let dt = c.scaled_height() / n_t as f64;
    let g = c.gamma_hb();
    let n = n_s * n_t;
    let idx = |i: usize, k: usize| i * n_s + k;
    let mut tb = TripletBuilder::new(n);
    let mut mass = vec![0.0; n];
    for i in 0..n_t {
        let tau = i as f64 * dt;
        let wrow = if i == 0 { 0.5 } else { 1.0 };
        let phase = Complex64::from_polar(1.0, -tau * ds);
        for k in 0..n_s {
            let p = idx(i, k);
            mass[p] = wrow * ds * dt;
            // |e^{-i tau ds} u_{k+1} - u_k|^2 / ds^2, weighted by the row cell
            tb.add_link(p, idx(i, (k + 1) % n_s), wrow * dt / ds, phase);
            if i + 1 < n_t {
                tb.add_link(p, idx(i + 1, k), ds / dt, Complex64::new(1.0, 0.0));
            } else {
                tb.add(p, p, Complex64::new(ds / dt, 0.0));
            }
            if i == 0 {
                tb.add(p, p, Complex64::new(g * ds, 0.0));
            }
        }
    }
    (tb.build_with_bandwidth(n_s), Mass::Diagonal(mass))
}

fn direct_lowest(c: &CylinderModel, count: usize, n_s: usize, n_t: usize) -> Result<Vec<f64>> {
    if n_s < 8 || n_t < 8 || count > n_s * n_t / 4 {
        return Err(Error::GridTooCoarse(format!("{n_s}x{n_t} grid for {count} eigenvalues")));
    }
    let (a, m) = assemble_cylinder(c, n_s, n_t);
    let g = c.gamma_hb().min(0.0);
    let opts = LanczosOptions {
        floor: -g * g - 1.0,
        ..Default::default()
    };
    Ok(lowest_by_inertia(&a, &m, count, 1.5, &opts)?.values)
}

/// Lowest `count` eigenvalues (physical units) of the direct 2D solve.
pub fn cylinder_spectrum(c: &CylinderModel, count: usize, grid: &CylinderGrid) -> Result<Vec<f64>> {
    c.validate()?;
    let coarse = direct_lowest(c, count, grid.n_s, grid.n_t)?;
    let vals = if grid.extrapolate {
        let fine = direct_lowest(c, count, 2 * grid.n_s, 2 * grid.n_t)?;
        coarse.iter().zip(&fine).map(|(e1, e2)| (4.0 * e2 - e1) / 3.0).collect()
    } else {
        coarse
    };
    Ok(vals.into_iter().map(|v| v * c.hb()).collect())
}

/// Eigenvalues strictly below `hb * level` (physical units), plus the
/// threshold up to which the list is complete.
pub fn cylinder_spectrum_below(c: &CylinderModel, level: f64, grid: &CylinderGrid) -> Result<(Vec<f64>, f64)> {
    c.validate()?;
    let (a, m) = assemble_cylinder(c, grid.n_s, grid.n_t);
    let g = c.gamma_hb().min(0.0);
    let opts = LanczosOptions {
        floor: -g * g - 1.0,
        ..Default::default()
    };
    // a little headroom so the list is provably complete at `level`
    let top = level * 1.05 + 0.05;
    let s = crate::linalg::eigenvalues_below(&a, &m, top, &opts)?;
    Ok((s.values.into_iter().map(|v| v * c.hb()).collect(), top * c.hb()))
}

/// The same spectrum from the quantized-momentum fibers: the 1D problems on
/// `(0, sqrt(b) T)` with the Robin condition below and Dirichlet above.
pub fn cylinder_fiber_spectrum(c: &CylinderModel, count: usize, disc: &HalfLineDiscretization) -> Result<Vec<f64>> {
    c.validate()?;
    let height = c.scaled_height();
    let g = c.gamma_hb();
    // every fiber value is at least dist(xi, [0, height])^2 + min(0, bottom)
    let ceiling = 4.0 * count as f64 + 10.0;
    let reach = height + ceiling.sqrt() + 1.0;
    let n_max = (reach * c.scaled_period() / (2.0 * PI)).ceil() as i64;
    let p = count.min(((ceiling + 1.0) / 2.0).ceil() as usize + 2);
    let mut all = Vec::new();
    for n in -n_max..=n_max {
        let xi = c.momentum(n);
        let v = fd_eigenvalues(p, g, xi, height, disc)?;
        all.extend(v);
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if all.len() < count || all[count - 1] > ceiling {
        return Err(Error::GridTooCoarse("fiber enumeration did not reach the requested count".into()));
    }
    all.truncate(count);
    Ok(all.into_iter().map(|v| v * c.hb()).collect())
}

/// `sum_j (hb (1 + lambda) - e_j)_+` on a spectrum complete below `threshold`.
pub fn cylinder_energy(c: &CylinderModel, eigenvalues: &[f64], threshold: f64, lambda: f64) -> Result<f64> {
    let level = c.hb() * (1.0 + lambda);
    if threshold < level {
        return Err(Error::ThresholdTooLow {
            computed: threshold,
            required: level,
        });
    }
    Ok(eigenvalues.iter().map(|e| (level - e).max(0.0)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_scaling_is_identity() {
        let m = HalfPlaneModel {
            h: 1.0,
            b: 1.0,
            gamma: 0.0,
            alpha: 0.75,
        };
        let d = HalfLineDiscretization::default();
        let v = fiber_spectrum(&m, &[0.0], 2, &d).unwrap();
        assert!((v[0].value - 1.0).abs() < 1e-8 && (v[1].value - 5.0).abs() < 1e-8);
    }

    #[test]
    fn energy_of_synthetic_list() {
        let c = CylinderModel::neumann(0.1, 1.0, 2.0, 8.0);
        let hb = c.hb();
        let e = cylinder_energy(&c, &[0.5 * hb, 0.9 * hb], 2.0 * hb, 0.1).unwrap();
        assert!((e - 0.8 * hb).abs() < 1e-14);
        assert_eq!(cylinder_energy(&c, &[], 2.0 * hb, 0.1).unwrap(), 0.0);
        assert!(cylinder_energy(&c, &[], 1.0 * hb, 0.1).is_err());
    }

    #[test]
    fn assembled_matrix_is_hermitian() {
        let c = CylinderModel {
            gamma: -1.0,
            alpha: 0.5,
            ..CylinderModel::neumann(0.1, 1.0, 2.0, 8.0)
        };
        let (a, _) = assemble_cylinder(&c, 16, 12);
        assert_eq!(a.max_diag_imag(), 0.0);
        for (i, j) in [(0, 1), (3, 19), (17, 1), (15, 0)] {
            assert_eq!(a.get(i, j), a.get(j, i).conj());
        }
    }
}
