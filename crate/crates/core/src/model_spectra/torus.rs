//! Constant-field magnetic Laplacian on a torus of flux `R^2 / (2 pi)`.
//!
//! Gauge `A = (-x2, 0)`, operator `(-i grad + A)^2`. Functions are periodic
//! in `x1` and pick up a phase when `x2` wraps around; that phase is only
//! single valued when `R^2` is a multiple of `2 pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{count_below, lowest_by_inertia, BandedHermitian, LanczosOptions, Mass, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusModel {
    pub r: f64,
}

impl TorusModel {
    /// The torus carrying `n` flux quanta.
    pub fn with_flux(n: usize) -> Self {
        Self {
            r: (2.0 * PI * n as f64).sqrt(),
        }
    }

    /// `R^2 / (2 pi)`, checked to be a positive integer.
    pub fn flux(&self) -> Result<usize> {
        let q = self.r * self.r / (2.0 * PI);
        let n = q.round();
        if !(self.r > 0.0) || n < 1.0 || (q - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::PhaseMismatch { r_sq: self.r * self.r });
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    /// Target spacing; the actual spacing is `R / ceil(R / spacing)`.
    pub spacing: f64,
}

impl Default for TorusGrid {
    fn default() -> Self {
        Self { spacing: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    /// Spread of the eigenvalues inside the cluster.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSpectrum {
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub spacing: f64,
    pub cluster_tol: f64,
}

/// Five-point magnetic Laplacian with Peierls phases.
///
/// Rows in `x2` are stored in folded order `0, M-1, 1, M-2, ...` so that the
/// wrap-around link stays inside a band of width about `2M`.
pub fn assemble_torus(t: &TorusModel, grid: &TorusGrid) -> Result<(BandedHermitian<Complex64>, f64)> {
    t.flux()?;
    let m = (t.r / grid.spacing).ceil() as usize;
    if m < 8 {
        return Err(Error::GridTooCoarse(format!("{m} nodes per side")));
    }
    let d = t.r / m as f64;
    let w = 1.0 / (d * d);
    let mut slot = vec![0usize; m];
    for (pos, row) in (0..m).map(|k| if k % 2 == 0 { k / 2 } else { m - 1 - k / 2 }).enumerate() {
        slot[row] = pos;
    }
    let idx = |l: usize, k: usize| slot[l] * m + k;
    let mut tb = TripletBuilder::new(m * m);
    for l in 0..m {
        let x2 = l as f64 * d;
        let along = Complex64::from_polar(1.0, -x2 * d);
        for k in 0..m {
            let x1 = k as f64 * d;
            tb.add_link(idx(l, k), idx(l, (k + 1) % m), w, along);
            let up = if l + 1 < m {
                Complex64::new(1.0, 0.0)
            } else {
                // u(x1, R) = e^{i R x1} u(x1, 0)
                Complex64::from_polar(1.0, t.r * x1)
            };
            tb.add_link(idx(l, k), idx((l + 1) % m, k), w, up);
        }
    }
    Ok((tb.build(), d))
}

/// Groups a sorted list into clusters of mutually close values.
pub fn clusters(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i > start {
                out.push(Cluster {
                    value: values[start..i].iter().sum::<f64>() / (i - start) as f64,
                    multiplicity: i - start,
                    width: values[i - 1] - values[start],
                });
            }
            start = i;
        }
    }
    out
}

/// The lowest `count` eigenvalues and their clusters.
pub fn torus_landau_spectrum(t: &TorusModel, count: usize, grid: &TorusGrid) -> Result<TorusSpectrum> {
    let (a, d) = assemble_torus(t, grid)?;
    let s = lowest_by_inertia(&a, &Mass::Identity, count, 1.5, &LanczosOptions::default())?;
    let tol = (10.0 * d * d).max(1e-8);
    Ok(TorusSpectrum {
        clusters: clusters(&s.values, tol),
        eigenvalues: s.values,
        spacing: d,
        cluster_tol: tol,
    })
}

/// Number of eigenvalues strictly below `lambda`, by inertia.
pub fn torus_count_below(t: &TorusModel, lambda: f64, grid: &TorusGrid) -> Result<usize> {
    let (a, _) = assemble_torus(t, grid)?;
    Ok(count_below(&a, &Mass::Identity, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_fractional_flux() {
        assert!(matches!(TorusModel { r: 3.0 }.flux(), Err(Error::PhaseMismatch { .. })));
        assert_eq!(TorusModel::with_flux(7).flux().unwrap(), 7);
    }

    #[test]
    fn cluster_grouping() {
        let c = clusters(&[1.0, 1.0 + 1e-10, 3.0, 3.1], 1e-6);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].multiplicity, 2);
    }

    #[test]
    fn single_flux_quantum_ground_state() {
        let t = TorusModel::with_flux(1);
        let s = torus_landau_spectrum(&t, 2, &TorusGrid { spacing: 0.1 }).unwrap();
        assert_eq!(s.clusters[0].multiplicity, 1);
        assert!((s.eigenvalues[0] - 1.0).abs() < 0.01, "{:?}", s.eigenvalues);
        assert!(s.eigenvalues[1] > 2.8);
    }
}
