//! Dirichlet magnetic square `(0, R)^2` with unit field, and the Landau
//! counting function it is compared against.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{count_below, BandedHermitian, Mass};
use crate::quad::gauss_legendre;

/// `(1 / 2 pi) #{n >= 1 : 2n - 1 <= lambda}`.
pub fn nu_b(lambda: f64) -> f64 {
    if lambda < 1.0 {
        return 0.0;
    }
    ((lambda + 1.0) / 2.0).floor() / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareGrid {
    pub spacing: f64,
    /// Also count on the mesh of twice the spacing and check monotonicity.
    pub audit: bool,
}

impl Default for SquareGrid {
    fn default() -> Self {
        Self {
            spacing: 0.05,
            audit: true,
        }
    }
}

/// Bilinear finite elements in the symmetric gauge centred in the square.
///
/// The element matrices integrate `|grad u|^2 + |A|^2 |u|^2 + 2 A . Im(conj(u)
/// grad u)` exactly with 3x3 Gauss points. Only interior nodes are kept.
pub fn assemble_dirichlet_square(r: f64, m: usize) -> (BandedHermitian<Complex64>, BandedHermitian<Complex64>) {
    let d = r / m as f64;
    let c = 0.5 * r;
    let ni = m - 1;
    let kd = ni + 1;
    let mut a = BandedHermitian::zeros(ni * ni, kd);
    let mut mass = BandedHermitian::zeros(ni * ni, kd);
    let (gx, gw) = gauss_legendre(3);
    let node = |i: usize, j: usize| -> Option<usize> {
        if i == 0 || j == 0 || i == m || j == m {
            None
        } else {
            Some((j - 1) * ni + (i - 1))
        }
    };
    let corners = [(0usize, 0usize), (1, 0), (0, 1), (1, 1)];
    for ej in 0..m {
        for ei in 0..m {
            let mut ke = [[Complex64::new(0.0, 0.0); 4]; 4];
            let mut me = [[0.0f64; 4]; 4];
            for (qa, &xa) in gx.iter().enumerate() {
                for (qb, &xb) in gx.iter().enumerate() {
                    let (xi, eta) = (0.5 * (xa + 1.0), 0.5 * (xb + 1.0));
                    let wq = gw[qa] * gw[qb] * 0.25 * d * d;
                    let x = (ei as f64 + xi) * d;
                    let y = (ej as f64 + eta) * d;
                    let ax = -0.5 * (y - c);
                    let ay = 0.5 * (x - c);
                    let mut phi = [0.0; 4];
                    let mut grad = [[0.0; 2]; 4];
                    for (n, &(ci, cj)) in corners.iter().enumerate() {
                        let fx = if ci == 1 { xi } else { 1.0 - xi };
                        let fy = if cj == 1 { eta } else { 1.0 - eta };
                        let dfx = if ci == 1 { 1.0 } else { -1.0 } / d;
                        let dfy = if cj == 1 { 1.0 } else { -1.0 } / d;
                        phi[n] = fx * fy;
                        grad[n] = [dfx * fy, fx * dfy];
                    }
                    for p in 0..4 {
                        for q in 0..4 {
                            let re = grad[p][0] * grad[q][0] + grad[p][1] * grad[q][1] + (ax * ax + ay * ay) * phi[p] * phi[q];
                            let adp = ax * grad[p][0] + ay * grad[p][1];
                            let adq = ax * grad[q][0] + ay * grad[q][1];
                            let im = phi[q] * adp - phi[p] * adq;
                            ke[p][q] += Complex64::new(re, im) * wq;
                            me[p][q] += phi[p] * phi[q] * wq;
                        }
                    }
                }
            }
            for (p, &(pi, pj)) in corners.iter().enumerate() {
                let Some(gp) = node(ei + pi, ej + pj) else { continue };
                for (q, &(qi, qj)) in corners.iter().enumerate() {
                    let Some(gq) = node(ei + qi, ej + qj) else { continue };
                    // each unordered pair once: row index >= column index
                    if gp >= gq {
                        a.add(gp, gq, ke[p][q]);
                        mass.add(gp, gq, Complex64::new(me[p][q], 0.0));
                    }
                }
            }
        }
    }
    (a, mass)
}

/// Number of eigenvalues below `lambda` of the Dirichlet square of side `r`.
pub fn dirichlet_square_count(lambda: f64, r: f64, grid: &SquareGrid) -> Result<usize> {
    if !(r > 0.0) || grid.spacing <= 0.0 {
        return Err(Error::InvalidArgument(format!("square side {r}, spacing {}", grid.spacing)));
    }
    let count_on = |m: usize| {
        let (a, mass) = assemble_dirichlet_square(r, m);
        count_below(&a, &Mass::Banded(mass), lambda)
    };
    let mut m = (r / grid.spacing).ceil() as usize;
    m += m % 2;
    if m < 8 {
        return Err(Error::GridTooCoarse(format!("{m} cells per side")));
    }
    let fine = count_on(m);
    if grid.audit {
        // conforming refinement can only lower the discrete eigenvalues
        let coarse = count_on(m / 2);
        if coarse > fine {
            return Err(Error::GridTooCoarse(format!(
                "count dropped from {coarse} to {fine} under refinement"
            )));
        }
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn landau_counting_steps() {
        assert_eq!(nu_b(0.5), 0.0);
        assert_eq!(nu_b(1.0), 1.0 / (2.0 * PI));
        assert_eq!(nu_b(5.5), 3.0 / (2.0 * PI));
        assert_eq!(nu_b(2.999), 1.0 / (2.0 * PI));
        assert_eq!(nu_b(3.0), 2.0 / (2.0 * PI));
    }

    #[test]
    fn nothing_below_the_landau_level() {
        let g = SquareGrid {
            spacing: 0.1,
            audit: true,
        };
        assert_eq!(dirichlet_square_count(1.0, 5.0, &g).unwrap(), 0);
    }

    #[test]
    fn zero_field_limit_of_the_element_matrices() {
        // a tiny square is dominated by the Dirichlet Laplacian: 2 pi^2 / R^2
        let r = 0.2;
        let (a, mass) = assemble_dirichlet_square(r, 16);
        let lam = 2.0 * PI * PI / (r * r);
        let m = Mass::Banded(mass);
        assert_eq!(count_below(&a, &m, 0.99 * lam), 0);
        assert_eq!(count_below(&a, &m, 1.02 * lam), 1);
    }
}
