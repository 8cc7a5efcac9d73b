//! Semiclassical limit functionals: spectral densities of the half-plane
//! fibers integrated along the boundary.
//!
//! For a boundary point with field `B` and coupling `gamma` the energy
//! density at level `lambda` is
//! `sum_p int (mu_p(B^{-1/2} gamma, xi) - lambda / B)_- dxi`, and the counting
//! density is the total length of the sublevel sets `{mu_p < lambda / B}`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band1d::{BandSource, XI_FAR};
use crate::error::{Error, Result};
use crate::geometry::BoundaryCurve;
use crate::quad::{brent_min, brent_root, romberg};

/// Magnetic field sampled at the boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldOnBoundary {
    pub b_samples: Vec<f64>,
    /// Infimum of the field over the closed domain.
    pub b: f64,
}

impl FieldOnBoundary {
    pub fn constant(b: f64, n: usize) -> Result<Self> {
        Self::new(vec![b; n], b)
    }

    pub fn new(b_samples: Vec<f64>, b: f64) -> Result<Self> {
        if !(b > 0.0) || b_samples.iter().any(|&v| !(v >= b)) {
            return Err(Error::InvalidArgument(format!("field samples must be >= b = {b} > 0")));
        }
        Ok(Self { b_samples, b })
    }

    /// Uses the smallest sample as the infimum; only valid when the field
    /// attains its minimum on the boundary.
    pub fn from_boundary_minimum(b_samples: Vec<f64>) -> Result<Self> {
        let b = b_samples.iter().cloned().fold(f64::INFINITY, f64::min);
        Self::new(b_samples, b)
    }
}

/// Robin coupling sampled at the boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinTrace {
    pub gamma_samples: Vec<f64>,
    pub spacing: f64,
    pub p3_norm: f64,
    /// `Some` when the coupling is known to be bounded.
    pub essential_sup: Option<f64>,
}

impl RobinTrace {
    fn build(gamma_samples: Vec<f64>, spacing: f64, bounded: bool) -> Result<Self> {
        if !(spacing > 0.0) || gamma_samples.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("Robin samples must be finite on a positive spacing".into()));
        }
        let p3_norm = (gamma_samples.iter().map(|g| g.abs().powi(3)).sum::<f64>() * spacing).cbrt();
        let essential_sup = bounded.then(|| gamma_samples.iter().map(|g| g.abs()).fold(0.0, f64::max));
        Ok(Self {
            gamma_samples,
            spacing,
            p3_norm,
            essential_sup,
        })
    }

    pub fn bounded(gamma_samples: Vec<f64>, spacing: f64) -> Result<Self> {
        Self::build(gamma_samples, spacing, true)
    }

    /// Samples of a coupling that is only known to be in `L^3`.
    pub fn unbounded(gamma_samples: Vec<f64>, spacing: f64) -> Result<Self> {
        Self::build(gamma_samples, spacing, false)
    }

    pub fn constant(gamma: f64, curve: &BoundaryCurve) -> Result<Self> {
        Self::bounded(vec![gamma; curve.len()], curve.spacing())
    }

    pub fn min(&self) -> f64 {
        self.gamma_samples.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `L^3` distance to another trace on the same nodes.
    pub fn l3_distance(&self, other: &RobinTrace) -> f64 {
        let s: f64 = self
            .gamma_samples
            .iter()
            .zip(&other.gamma_samples)
            .map(|(a, b)| (a - b).abs().powi(3))
            .sum();
        (s * self.spacing).cbrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub value: f64,
    pub p_max_used: usize,
    pub k_window: f64,
    pub quadrature_error_estimate: f64,
    /// Coupling exponent 1/2 with a coupling not known to be bounded.
    pub unproven_regime: bool,
}

/// A pointwise density with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub value: f64,
    pub bands: usize,
    pub k_window: f64,
    pub error: f64,
}

// ---------------------------------------------------------------------------
// band queries through a BandSource

struct Band<'a> {
    src: &'a dyn BandSource,
    j: usize,
    gamma: f64,
    err: RefCell<Option<Error>>,
}

impl<'a> Band<'a> {
    fn new(src: &'a dyn BandSource, j: usize, gamma: f64) -> Result<Self> {
        if j > src.p_max() {
            return Err(Error::TableTooSmall { p_max: src.p_max() });
        }
        Ok(Self {
            src,
            j,
            gamma,
            err: RefCell::new(None),
        })
    }

    fn at(&self, xi: f64) -> Result<f64> {
        self.src.mu(self.j, self.gamma, xi)
    }

    /// Infallible evaluation for the quadrature and root closures; the first
    /// error is kept and reported by `check`.
    fn eval(&self, xi: f64) -> f64 {
        match self.at(xi) {
            Ok(v) => v,
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn check(&self) -> Result<()> {
        match self.err.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// `(infimum, argmin)`; the argmin is `XI_FAR` when the band decreases
    /// all the way to its limit.
    fn minimum(&self) -> Result<(f64, f64)> {
        let step = 0.25;
        let xs: Vec<f64> = (0..=((XI_FAR + 6.0) / step) as usize).map(|k| -6.0 + k as f64 * step).collect();
        let vals = xs.iter().map(|&x| self.at(x)).collect::<Result<Vec<_>>>()?;
        let k = (0..vals.len()).fold(0, |b, i| if vals[i] < vals[b] { i } else { b });
        if k + 1 == xs.len() {
            return Ok((vals[k], xs[k]));
        }
        if k == 0 {
            return Err(Error::NoInteriorMinimum {
                band: self.j,
                gamma: self.gamma,
            });
        }
        let (x, v) = brent_min(|x| self.eval(x), xs[k - 1], xs[k + 1], 1e-9);
        self.check()?;
        Ok((v, x))
    }

    /// Crossing of `level` on the side `dir` of `xm`, or `None` if the band
    /// stays below the level up to `XI_FAR`.
    fn crossing(&self, level: f64, xm: f64, dir: f64) -> Result<Option<f64>> {
        let mut near = xm;
        let mut step = 0.25;
        loop {
            let far = if dir > 0.0 { (xm + step).min(XI_FAR) } else { xm - step };
            if self.at(far)? >= level {
                let r = brent_root(|x| self.eval(x) - level, near.min(far), near.max(far), 1e-11)?;
                self.check()?;
                return Ok(Some(r));
            }
            if dir > 0.0 && far >= XI_FAR {
                return Ok(None);
            }
            near = far;
            step *= 2.0;
        }
    }

    /// Right end of the integration window when the band approaches the
    /// level from below: `(K, tail)` from the envelope `C xi exp(-xi^2)`.
    fn envelope_window(&self, level: f64, tol: f64) -> Result<(f64, f64)> {
        let x0 = 3.0;
        let gap = level - self.at(x0)?;
        if gap <= 0.0 {
            return Ok((x0, 0.0));
        }
        let c = gap / (x0 * (-x0 * x0).exp());
        let k = (c / (2.0 * tol)).ln().max(x0 * x0).sqrt().min(XI_FAR);
        Ok((k, 0.5 * c * (-k * k).exp()))
    }
}

/// The sublevel interval of one band at `level`, with the envelope tail
/// when it is unbounded on the right.
struct Sublevel {
    left: f64,
    right: f64,
    tail: f64,
}

fn sublevel(band: &Band, level: f64, tol: f64) -> Result<Option<Sublevel>> {
    let (th, xm) = band.minimum()?;
    if th >= level {
        return Ok(None);
    }
    let left = band
        .crossing(level, xm, -1.0)?
        .ok_or(Error::Numerical("band does not grow to the left".into()))?;
    // a level at the band limit would otherwise "cross" in rounding noise
    let at_limit = level > band.at(XI_FAR)? - 1e-8;
    let crossing = if at_limit { None } else { band.crossing(level, xm, 1.0)? };
    let (right, tail) = match crossing {
        Some(r) => (r, 0.0),
        None => band.envelope_window(level, tol)?,
    };
    Ok(Some(Sublevel { left, right, tail }))
}

fn check_level(lambda: f64, b: f64) -> Result<()> {
    if lambda > b {
        return Err(Error::LevelAboveField { lambda, b });
    }
    Ok(())
}

/// `sum_p int (mu_p(b^{-1/2} gamma, xi) - lambda / b)_- dxi`.
pub fn density_energy(gamma: f64, b: f64, lambda: f64, bands: &dyn BandSource, tol: f64) -> Result<Density> {
    check_level(lambda, b)?;
    let g = gamma / b.sqrt();
    let level = lambda / b;
    let mut out = Density {
        value: 0.0,
        bands: 0,
        k_window: 0.0,
        error: 0.0,
    };
    for j in 1.. {
        let band = Band::new(bands, j, g)?;
        let Some(set) = sublevel(&band, level, tol)? else { break };
        let q = romberg(|x| (level - band.eval(x)).max(0.0), set.left, set.right, 0.5 * tol, 12);
        band.check()?;
        out.value += q.value + set.tail;
        out.error += q.error + set.tail;
        out.bands = j;
        out.k_window = out.k_window.max(set.left.abs()).max(set.right.abs());
    }
    Ok(out)
}

/// Total length of the sublevel sets `{mu_p(b^{-1/2} gamma, .) < lambda / b}`.
pub fn density_count(gamma: f64, b: f64, lambda: f64, bands: &dyn BandSource) -> Result<Density> {
    if lambda >= b {
        return Err(Error::LevelNotBelowField { lambda, b });
    }
    let g = gamma / b.sqrt();
    let level = lambda / b;
    let mut out = Density {
        value: 0.0,
        bands: 0,
        k_window: 0.0,
        error: 0.0,
    };
    for j in 1.. {
        let band = Band::new(bands, j, g)?;
        let Some(set) = sublevel(&band, level, 1e-12)? else { break };
        if set.tail > 0.0 {
            let limit = band.at(XI_FAR)?;
            return Err(Error::UnboundedSublevel { level, limit });
        }
        out.value += set.right - set.left;
        out.bands = j;
        out.k_window = out.k_window.max(set.left.abs()).max(set.right.abs());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// boundary integrals

fn effective_gamma(trace: &RobinTrace, alpha: f64) -> Result<(Vec<f64>, bool)> {
    if alpha < 0.5 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} below 1/2")));
    }
    if alpha > 0.5 {
        // the coupling drops out of the leading term
        return Ok((vec![0.0; trace.gamma_samples.len()], false));
    }
    Ok((trace.gamma_samples.clone(), trace.essential_sup.is_none()))
}

fn check_sizes(curve: &BoundaryCurve, field: &FieldOnBoundary, trace: &RobinTrace) -> Result<()> {
    if field.b_samples.len() != curve.len() || trace.gamma_samples.len() != curve.len() {
        return Err(Error::InvalidArgument(format!(
            "{} boundary nodes but {} field and {} Robin samples",
            curve.len(),
            field.b_samples.len(),
            trace.gamma_samples.len()
        )));
    }
    Ok(())
}

/// Evaluates `f` once per distinct `(gamma, B)` pair.
fn node_densities<F>(gammas: &[f64], field: &FieldOnBoundary, f: F) -> Result<Vec<Density>>
where
    F: Fn(f64, f64) -> Result<Density> + Sync,
{
    let mut keys: Vec<(u64, u64)> = gammas
        .iter()
        .zip(&field.b_samples)
        .map(|(g, b)| (g.to_bits(), b.to_bits()))
        .collect();
    let nodes = keys.clone();
    keys.sort_unstable();
    keys.dedup();
    let vals = keys
        .par_iter()
        .map(|&(g, b)| f(f64::from_bits(g), f64::from_bits(b)))
        .collect::<Result<Vec<_>>>()?;
    let table: HashMap<(u64, u64), Density> = keys.into_iter().zip(vals).collect();
    Ok(nodes.iter().map(|k| table[k]).collect())
}

/// Periodic trapezoid sum and the difference to the rule on every other node.
fn boundary_sum(values: &[f64], spacing: f64) -> (f64, f64) {
    let full: f64 = values.iter().sum::<f64>() * spacing;
    if values.len() % 2 != 0 || values.len() < 4 {
        return (full, 0.0);
    }
    let half: f64 = values.iter().step_by(2).sum::<f64>() * 2.0 * spacing;
    (full, (full - half).abs())
}

fn limit_from_nodes(curve: &BoundaryCurve, dens: &[Density], weights: &[f64], unproven: bool) -> LimitResult {
    let vals: Vec<f64> = dens.iter().zip(weights).map(|(d, w)| w * d.value).collect();
    let (sum, quad_err) = boundary_sum(&vals, curve.spacing());
    let node_err: f64 = dens.iter().zip(weights).map(|(d, w)| w * d.error).sum::<f64>() * curve.spacing();
    LimitResult {
        value: sum / (2.0 * PI),
        p_max_used: dens.iter().map(|d| d.bands).max().unwrap_or(0),
        k_window: dens.iter().map(|d| d.k_window).fold(0.0, f64::max),
        quadrature_error_estimate: (quad_err + node_err) / (2.0 * PI),
        unproven_regime: unproven,
    }
}

/// `(1 / 2 pi) int_{boundary} B^{3/2} density_energy ds`.
pub fn energy_limit(
    curve: &BoundaryCurve,
    field: &FieldOnBoundary,
    trace: &RobinTrace,
    lambda: f64,
    alpha: f64,
    bands: &dyn BandSource,
    tol: f64,
) -> Result<LimitResult> {
    check_sizes(curve, field, trace)?;
    check_level(lambda, field.b)?;
    let (gammas, unproven) = effective_gamma(trace, alpha)?;
    if unproven {
        return Err(Error::MissingSupBound);
    }
    let total_len = curve.total_length;
    let dens = node_densities(&gammas, field, |g, b| {
        density_energy(g, b, lambda, bands, tol / (total_len * b.powf(1.5)))
    })?;
    let w: Vec<f64> = field.b_samples.iter().map(|b| b.powf(1.5)).collect();
    Ok(limit_from_nodes(curve, &dens, &w, false))
}

/// Same as `energy_limit` but accepts a coupling that is only in `L^3` at
/// exponent 1/2; the result is flagged as outside the proven regime.
pub fn energy_limit_unbounded(
    curve: &BoundaryCurve,
    field: &FieldOnBoundary,
    trace: &RobinTrace,
    lambda: f64,
    alpha: f64,
    bands: &dyn BandSource,
    tol: f64,
) -> Result<LimitResult> {
    check_sizes(curve, field, trace)?;
    check_level(lambda, field.b)?;
    let (gammas, unproven) = effective_gamma(trace, alpha)?;
    let total_len = curve.total_length;
    let dens = node_densities(&gammas, field, |g, b| {
        density_energy(g, b, lambda, bands, tol / (total_len * b.powf(1.5)))
    })?;
    let w: Vec<f64> = field.b_samples.iter().map(|b| b.powf(1.5)).collect();
    Ok(limit_from_nodes(curve, &dens, &w, unproven))
}

/// `(1 / 2 pi) int_{boundary} B^{1/2} |{xi : B mu_p < lambda}| ds`.
pub fn count_limit(
    curve: &BoundaryCurve,
    field: &FieldOnBoundary,
    trace: &RobinTrace,
    lambda: f64,
    alpha: f64,
    bands: &dyn BandSource,
    _tol: f64,
) -> Result<LimitResult> {
    check_sizes(curve, field, trace)?;
    if lambda >= field.b {
        return Err(Error::LevelNotBelowField { lambda, b: field.b });
    }
    let (gammas, unproven) = effective_gamma(trace, alpha)?;
    if unproven {
        return Err(Error::MissingSupBound);
    }
    let dens = node_densities(&gammas, field, |g, b| density_count(g, b, lambda, bands))?;
    let w: Vec<f64> = field.b_samples.iter().map(|b| b.sqrt()).collect();
    Ok(limit_from_nodes(curve, &dens, &w, false))
}

// ---------------------------------------------------------------------------
// auxiliary

/// Periodic convolution with the normalized Gaussian `exp(-(s/a)^2)`.
pub fn mollify(trace: &RobinTrace, a: f64) -> Result<RobinTrace> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("mollifier width {a}")));
    }
    let n = trace.gamma_samples.len();
    let h = trace.spacing;
    let reach = ((8.0 * a / h).ceil() as usize).min(n / 2);
    let mut w: Vec<f64> = (0..=reach).map(|k| (-(k as f64 * h / a).powi(2)).exp()).collect();
    let norm = w[0] + 2.0 * w[1..].iter().sum::<f64>() - if 2 * reach == n && reach > 0 { w[reach] } else { 0.0 };
    for v in &mut w {
        *v /= norm;
    }
    let g = &trace.gamma_samples;
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = w[0] * g[i];
            for k in 1..=reach {
                let right = g[(i + k) % n];
                let left = g[(i + n - k) % n];
                if 2 * k == n {
                    s += w[k] * right;
                } else {
                    s += w[k] * (right + left);
                }
            }
            s
        })
        .collect();
    RobinTrace::build(out, h, trace.essential_sup.is_some())
}

/// Smallest `p0` such that `mu_{p0+1}(gamma, .) > level` for every
/// `gamma >= gamma_min` (the bands increase with `gamma`).
pub fn p_truncation(gamma_min: f64, level: f64, bands: &dyn BandSource) -> Result<usize> {
    if !gamma_min.is_finite() {
        return Err(Error::InvalidArgument("gamma_min must be finite".into()));
    }
    for p0 in 0.. {
        let band = Band::new(bands, p0 + 1, gamma_min)?;
        if band.minimum()?.0 > level {
            return Ok(p0);
        }
    }
    unreachable!()
}

/// `K` such that the part of the first-band energy density outside
/// `[-K, K]` is below `tol` for every `gamma` in the range.
pub fn xi_window(gamma_range: (f64, f64), level: f64, tol: f64, bands: &dyn BandSource) -> Result<f64> {
    // the band increases with gamma, so the lowest coupling is the worst case
    let band = Band::new(bands, 1, gamma_range.0.min(gamma_range.1))?;
    let (th, xm) = band.minimum()?;
    if th >= level {
        return Ok(xm.abs());
    }
    let left = band.crossing(level, xm, -1.0)?.unwrap_or(-XI_FAR).abs();
    let right = match band.crossing(level, xm, 1.0)? {
        Some(r) => r,
        None => band.envelope_window(level, tol)?.0,
    };
    Ok(left.max(right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band1d::{DirectBands, HalfLineDiscretization};

    fn bands() -> DirectBands {
        DirectBands::new(4, HalfLineDiscretization::default())
    }

    #[test]
    fn empty_below_the_ground_state() {
        let d = density_energy(0.0, 1.0, 0.0, &bands(), 1e-8).unwrap();
        assert_eq!((d.value, d.bands), (0.0, 0));
        assert!(matches!(
            density_energy(0.0, 1.0, 1.5, &bands(), 1e-8),
            Err(Error::LevelAboveField { .. })
        ));
    }

    #[test]
    fn mollifier_preserves_constants_and_sup() {
        let t = RobinTrace::bounded(vec![-0.7; 64], 0.1).unwrap();
        let m = mollify(&t, 0.3).unwrap();
        assert!(m.gamma_samples.iter().all(|g| (g + 0.7).abs() < 1e-14));
        let step: Vec<f64> = (0..64).map(|k| if k < 32 { 1.0 } else { -2.0 }).collect();
        let t = RobinTrace::bounded(step, 0.1).unwrap();
        let m = mollify(&t, 0.2).unwrap();
        assert!(m.essential_sup.unwrap() <= t.essential_sup.unwrap() + 1e-14);
    }

    #[test]
    fn neumann_truncates_after_one_band() {
        assert_eq!(p_truncation(0.0, 1.0, &bands()).unwrap(), 1);
    }
}
