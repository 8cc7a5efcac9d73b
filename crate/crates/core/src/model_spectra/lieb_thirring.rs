//! Lieb-Thirring checks for a boundary potential on the half-space
//! `{t > 0}` in dimension `d + 1`, with `d` the boundary dimension.
//!
//! The operator is `-Laplacian` with the boundary condition `du/dt = -gamma u`
//! at `t = 0`, i.e. the form `int |grad u|^2 - int_{t=0} gamma |u|^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_below, LanczosOptions, Mass, TripletBuilder};
use crate::quad::romberg;

/// `Gamma(alpha + 1) / (2^d pi^{d/2} Gamma(1 + alpha + d/2))`.
pub fn lt_classical_constant(alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    (ln_gamma(alpha + 1.0) - ln_gamma(1.0 + alpha + 0.5 * d)).exp() / (2f64.powf(d) * PI.powf(0.5 * d))
}

/// Boundary coupling `gamma(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryPotential {
    Constant { gamma: f64 },
    /// `height * 1_[-half_width, half_width]` mollified by an error function
    /// of width `smoothing`.
    Bump { height: f64, half_width: f64, smoothing: f64 },
    /// Piecewise-linear samples, zero outside `[s[0], s[last]]`.
    Samples { s: Vec<f64>, gamma: Vec<f64> },
}

impl BoundaryPotential {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Constant { gamma } => *gamma,
            Self::Bump {
                height,
                half_width,
                smoothing,
            } => 0.5 * height * (erf((s + half_width) / smoothing) - erf((s - half_width) / smoothing)),
            Self::Samples { s: xs, gamma } => {
                if xs.is_empty() || s < xs[0] || s > xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&x| x <= s).clamp(1, xs.len() - 1);
                let w = (s - xs[k - 1]) / (xs[k] - xs[k - 1]);
                (1.0 - w) * gamma[k - 1] + w * gamma[k]
            }
        }
    }

    /// An interval outside of which the potential vanishes (to rounding).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Bump {
                half_width, smoothing, ..
            } => (-half_width - 6.0 * smoothing, half_width + 6.0 * smoothing),
            Self::Samples { s, .. } => (s[0], s[s.len() - 1]),
        }
    }

    fn sup(&self) -> f64 {
        match self {
            Self::Constant { gamma } => gamma.max(0.0),
            Self::Bump { height, .. } => height.max(0.0),
            Self::Samples { gamma, .. } => gamma.iter().cloned().fold(0.0, f64::max),
        }
    }
}

/// Truncated half-strip `[-half_width, half_width] x (0, depth)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtGrid {
    pub half_width: f64,
    pub depth: f64,
    pub spacing: f64,
    /// Relative change of the lhs tolerated when the strip is enlarged by 1.5.
    pub truncation_tol: f64,
}

impl Default for LtGrid {
    fn default() -> Self {
        Self {
            half_width: 4.0,
            depth: 4.0,
            spacing: 0.025,
            truncation_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub margin: f64,
    pub negative_eigenvalues: usize,
    /// Relative change of the lhs under enlargement (zero for `d = 0`).
    pub truncation_change: f64,
}

impl LtCheck {
    fn new(lhs: f64, rhs: f64, negative_eigenvalues: usize, truncation_change: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs,
            margin: rhs - lhs,
            negative_eigenvalues,
            truncation_change,
        }
    }
}

/// Compares `tr H^alpha_-` with `2 L^cl_{alpha,d} int gamma_+^{2 alpha + d}`.
pub fn lt_bound_check(alpha: f64, d: usize, gamma: &BoundaryPotential, grid: &LtGrid) -> Result<LtCheck> {
    if alpha < 0.5 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} below 1/2")));
    }
    match (d, gamma) {
        (0, BoundaryPotential::Constant { gamma }) => {
            // the half-line has the single eigenvalue -gamma_+^2
            let gp = gamma.max(0.0);
            let lhs = (gp * gp).powf(alpha);
            let rhs = 2.0 * lt_classical_constant(alpha, 0) * gp.powf(2.0 * alpha);
            Ok(LtCheck::new(lhs, rhs, usize::from(gp > 0.0), 0.0))
        }
        (1, BoundaryPotential::Constant { .. }) => Err(Error::InvalidArgument(
            "d = 1 needs a compactly supported potential".into(),
        )),
        (1, g) => {
            let (a, b) = g.support();
            let p = 2.0 * alpha + 1.0;
            let q = romberg(|s| g.eval(s).max(0.0).powf(p), a, b, 1e-12, 18);
            let rhs = 2.0 * lt_classical_constant(alpha, 1) * q.value;
            let (lhs, count) = strip_trace(alpha, g, grid.half_width, grid.depth, grid.spacing)?;
            let (big, _) = strip_trace(alpha, g, 1.5 * grid.half_width, 1.5 * grid.depth, grid.spacing)?;
            let change = if big == 0.0 { 0.0 } else { (big - lhs).abs() / big };
            if change > grid.truncation_tol {
                return Err(Error::TruncationTooSmall { relative_change: change });
            }
            Ok(LtCheck::new(lhs, rhs, count, change))
        }
        _ => Err(Error::InvalidArgument(format!("boundary dimension {d} not supported"))),
    }
}

/// `sum |e_k|^alpha` over the negative eigenvalues of the truncated strip,
/// Dirichlet on the far sides, `t` fastest.
fn strip_trace(alpha: f64, g: &BoundaryPotential, half_width: f64, depth: f64, spacing: f64) -> Result<(f64, usize)> {
    let ns = (2.0 * half_width / spacing).ceil() as usize;
    let nt = (depth / spacing).ceil() as usize;
    let ds = 2.0 * half_width / ns as f64;
    let dt = depth / nt as f64;
    // interior s nodes 1..ns-1, t nodes 0..nt-1
    let cols = ns - 1;
    let n = cols * nt;
    let idx = |k: usize, i: usize| k * nt + i;
    let mut tb = TripletBuilder::<f64>::new(n);
    let mut mass = vec![0.0; n];
    for k in 0..cols {
        let s = -half_width + (k + 1) as f64 * ds;
        for i in 0..nt {
            let p = idx(k, i);
            let wrow = if i == 0 { 0.5 } else { 1.0 };
            mass[p] = wrow * ds * dt;
            let ws = wrow * dt / ds;
            if k + 1 < cols {
                tb.add_link(p, idx(k + 1, i), ws, 1.0);
            } else {
                tb.add(p, p, ws);
            }
            if k == 0 {
                tb.add(p, p, ws);
            }
            if i + 1 < nt {
                tb.add_link(p, idx(k, i + 1), ds / dt, 1.0);
            } else {
                tb.add(p, p, ds / dt);
            }
            if i == 0 {
                tb.add(p, p, -g.eval(s) * ds);
            }
        }
    }
    let a = tb.build_with_bandwidth(nt);
    let sup = g.sup();
    let opts = LanczosOptions {
        floor: -sup * sup - 1.0,
        ..Default::default()
    };
    let e = eigenvalues_below(&a, &Mass::Diagonal(mass), 0.0, &opts)?;
    Ok((e.values.iter().map(|v| (-v).powf(alpha)).sum(), e.values.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_constants() {
        for alpha in [0.5, 1.0, 2.0] {
            assert!((lt_classical_constant(alpha, 0) - 1.0).abs() < 1e-14);
        }
        assert!((lt_classical_constant(0.5, 1) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn half_line_case_is_sharp_up_to_two() {
        let g = LtGrid::default();
        let c = lt_bound_check(1.0, 0, &BoundaryPotential::Constant { gamma: 2.0 }, &g).unwrap();
        assert_eq!((c.lhs, c.rhs), (4.0, 8.0));
        assert!(c.holds);
        let c = lt_bound_check(1.0, 0, &BoundaryPotential::Constant { gamma: -1.0 }, &g).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn sampled_potential_interpolates() {
        let p = BoundaryPotential::Samples {
            s: vec![0.0, 1.0, 2.0],
            gamma: vec![0.0, 2.0, 0.0],
        };
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(2.5), 0.0);
    }
}
