//! The disk with a radial field and constant coupling, one angular
//! momentum at a time.
//!
//! With `u = f(r) e^{-i m theta}` in the rotationally symmetric gauge the
//! form becomes
//! `int (h^2 |f'|^2 + (hm/r - a(r))^2 |f|^2) r dr + h^{1+alpha} gamma R |f(R)|^2`.

use serde::{Deserialize, Serialize};

use super::{Geometry, ProblemSpec, SpectrumResult};
use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

/// Radial grid `r_i = (i + 1/2) delta`, `i < n`, whose last node sits on the
/// boundary. The first face is the origin, where the flux weight vanishes.
struct RadialGrid {
    r: Vec<f64>,
    /// `int r dr` over the cell of each node.
    w: Vec<f64>,
    delta: f64,
}

impl RadialGrid {
    fn new(radius: f64, n: usize) -> Self {
        let delta = radius / (n as f64 - 0.5);
        let r: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * delta).collect();
        let mut w: Vec<f64> = r.iter().map(|ri| ri * delta).collect();
        w[n - 1] = 0.5 * delta * (radius - 0.25 * delta);
        Self { r, w, delta }
    }

    fn radius(&self) -> f64 {
        *self.r.last().unwrap()
    }
}

fn fiber_matrix(spec: &ProblemSpec, grid: &RadialGrid, gamma: f64, m: i64) -> SymTridiagonal {
    let h = spec.h;
    let n = grid.r.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        let v = h * m as f64 / grid.r[i] - spec.field.tangential_potential(grid.r[i]);
        diag[i] += v * v * grid.w[i];
        if i + 1 < n {
            let face = (i + 1) as f64 * grid.delta;
            let c = h * h * face / grid.delta;
            diag[i] += c;
            diag[i + 1] += c;
            off[i] = -c;
        }
    }
    diag[n - 1] += h.powf(1.0 + spec.alpha) * gamma * grid.radius();
    // symmetric form of the pencil with the diagonal mass
    let s: Vec<f64> = grid.w.iter().map(|w| 1.0 / w.sqrt()).collect();
    for i in 0..n {
        diag[i] *= s[i] * s[i];
        if i + 1 < n {
            off[i] *= s[i] * s[i + 1];
        }
    }
    SymTridiagonal::new(diag, off)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSolve {
    pub result: SpectrumResult,
    pub m_range: (i64, i64),
    /// Angular momentum of each listed eigenvalue.
    pub labels: Vec<i64>,
    pub radial_nodes: usize,
    /// Largest relative change of the lowest ten values between the two
    /// grids (zero without refinement).
    pub refinement_change: f64,
}

struct Grids {
    coarse: RadialGrid,
    fine: Option<RadialGrid>,
    ratio: f64,
}

/// Eigenvalues of one fiber below the threshold, extrapolated when a
/// second grid is present, with the coarse values for the audit.
fn fiber_values(spec: &ProblemSpec, grids: &Grids, gamma: f64, m: i64, threshold: f64) -> (Vec<f64>, Vec<f64>) {
    let tc = fiber_matrix(spec, &grids.coarse, gamma, m);
    let Some(fine) = &grids.fine else {
        let v = tc.eigenvalues_below(threshold);
        return (v.clone(), v);
    };
    let tf = fiber_matrix(spec, fine, gamma, m);
    // a little headroom so values that extrapolate below the threshold are seen
    let vf = tf.eigenvalues_below(threshold + 0.05 * threshold.abs());
    let k = vf.len().min(tc.len());
    let (lo, hi) = tc.gershgorin();
    let vc: Vec<f64> = (0..k).map(|j| tc.eigenvalue_in(j, lo, hi)).collect();
    let q = grids.ratio * grids.ratio;
    let ex: Vec<f64> = vf
        .iter()
        .zip(&vc)
        .map(|(f, c)| f + (f - c) / (q - 1.0))
        .filter(|&e| e < threshold)
        .collect();
    (ex, vc)
}

/// Union over angular momenta of the fiber eigenvalues below
/// `THRESHOLD_FACTOR * lambda * h`.
///
/// With `m_range = None` the range grows from the momentum of the boundary
/// until ten consecutive fibers on each side are empty; an explicit range is
/// audited the same way and rejected if the extension finds anything.
pub fn disk_fiber_solve(spec: &ProblemSpec, m_range: Option<(i64, i64)>) -> Result<FiberSolve> {
    spec.validate()?;
    let Geometry::Disk { radius } = spec.geometry else {
        return Err(Error::InvalidArgument("fiber solve needs a disk".into()));
    };
    let gamma = spec
        .gamma
        .constant()
        .ok_or_else(|| Error::InvalidArgument("fiber solve needs a constant coupling".into()))?;
    let n = (radius / spec.spacing()).ceil() as usize + 1;
    let coarse = RadialGrid::new(radius, n);
    let grids = if spec.grid.refine {
        let fine = RadialGrid::new(radius, 2 * n);
        let ratio = coarse.delta / fine.delta;
        Grids {
            coarse,
            fine: Some(fine),
            ratio,
        }
    } else {
        Grids {
            coarse,
            fine: None,
            ratio: 1.0,
        }
    };
    let threshold = spec.threshold();
    let solve = |m: i64| fiber_values(spec, &grids, gamma, m, threshold);

    let m_centre = (spec.field.tangential_potential(radius) * radius / spec.h).round() as i64;
    let (lo, hi) = match m_range {
        Some((lo, hi)) => {
            if lo > hi {
                return Err(Error::InvalidArgument(format!("empty m range {lo}..={hi}")));
            }
            for m in (lo - 10..lo).chain(hi + 1..=hi + 10) {
                if !solve(m).0.is_empty() {
                    return Err(Error::MRangeTooSmall(format!(
                        "m = {m} outside {lo}..={hi} has eigenvalues below {threshold}"
                    )));
                }
            }
            (lo, hi)
        }
        None => {
            // guiding centres inside the disk have momenta between 0 and
            // m_centre; scan all of those, then extend past the emptiness test
            let limit = 10 * (m_centre.abs() + 100);
            let occupied: Vec<i64> = (m_centre.min(0)..=m_centre.max(0)).filter(|&m| !solve(m).0.is_empty()).collect();
            let (first, last) = match (occupied.first(), occupied.last()) {
                (Some(&a), Some(&b)) => (a, b),
                _ => (m_centre, m_centre),
            };
            let edge = |start: i64, dir: i64| -> Result<i64> {
                let mut last = start;
                let mut m = start;
                while (m - last).abs() < 10 {
                    m += dir;
                    if !solve(m).0.is_empty() {
                        last = m;
                    }
                    if (m - m_centre).abs() > limit {
                        return Err(Error::MRangeTooSmall(format!("no empty fibers within {limit} of {m_centre}")));
                    }
                }
                Ok(last)
            };
            (edge(first.min(m_centre.min(0)), -1)?, edge(last.max(m_centre.max(0)), 1)?)
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut low: Vec<(f64, f64)> = Vec::new();
    for m in lo..=hi {
        let (ex, vc) = solve(m);
        for (k, e) in ex.iter().enumerate() {
            values.push(*e);
            labels.push(m);
            low.push((*e, vc[k]));
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let labels: Vec<i64> = order.iter().map(|&i| labels[i]).collect();
    let scale = spec.lambda * spec.h;
    let refinement_change = if spec.grid.refine {
        order
            .iter()
            .take(10)
            .map(|&i| (low[i].0 - low[i].1).abs() / low[i].0.abs().max(scale))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    if refinement_change > 5e-3 {
        return Err(Error::GridTooCoarse(format!(
            "lowest fiber values move by {refinement_change:.2e} under refinement"
        )));
    }
    let result = SpectrumResult::new(values, threshold, spec.h, spec.lambda)?;
    Ok(FiberSolve {
        result,
        m_range: (lo, hi),
        labels,
        radial_nodes: n,
        refinement_change,
    })
}
