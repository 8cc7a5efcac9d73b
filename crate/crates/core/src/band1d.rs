//! Band functions of the half-line Robin oscillator
//! `-u'' + (t - xi)^2 u` on `t > 0` with `u'(0) = gamma u(0)`.
//!
//! Two independent schemes are provided. The finite-difference scheme uses a
//! vertex grid whose first cell carries half weight, which is the symmetric
//! form of the usual ghost-point Robin row; eigenvalues come from Sturm
//! bisection, are polished by a Rayleigh quotient of the discrete quadratic
//! form, and are Richardson-extrapolated over halved spacings. The shooting
//! scheme integrates the Prüfer angle from the truncation point back to the
//! boundary with an adaptive Runge-Kutta method.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;
use crate::ode::Dopri;
use crate::quad::{brent_min, brent_root, richardson};

/// Parameter pair at which a band function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinOscillatorParams {
    pub gamma: f64,
    pub xi: f64,
}

impl RobinOscillatorParams {
    pub fn new(gamma: f64, xi: f64) -> Self {
        Self { gamma, xi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    FiniteDifference,
    Shooting,
}

/// Truncation and grid controls for the half-line problem.
///
/// The half-line is cut at `L = ceil(|xi| + margin)` with a Dirichlet
/// condition there. Rounding `L` up to an integer keeps the grid nodes fixed
/// as `xi` moves, so the discrete band functions stay smooth in `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineDiscretization {
    pub margin: f64,
    /// Coarsest spacing; must divide 1.
    pub spacing: f64,
    /// Number of halvings used by the Richardson extrapolation.
    pub levels: usize,
    pub scheme: Scheme,
}

impl Default for HalfLineDiscretization {
    fn default() -> Self {
        Self {
            margin: 12.0,
            spacing: 0.02,
            levels: 3,
            scheme: Scheme::FiniteDifference,
        }
    }
}

impl HalfLineDiscretization {
    pub fn shooting() -> Self {
        Self {
            scheme: Scheme::Shooting,
            ..Self::default()
        }
    }

    pub fn length(&self, xi: f64) -> f64 {
        (xi.abs() + self.margin).ceil()
    }

    /// Grid points at the finest level for the given `xi`.
    pub fn points(&self, xi: f64) -> usize {
        let n0 = (self.length(xi) / self.spacing).round() as usize;
        n0 << (self.levels.max(1) - 1)
    }

    pub fn validate(&self) -> Result<()> {
        let inv = 1.0 / self.spacing;
        if self.margin < 10.0 {
            return Err(Error::InvalidArgument(format!("margin {} < 10", self.margin)));
        }
        if !(self.spacing > 0.0 && self.spacing <= 0.05) || (inv - inv.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "spacing {} must be at most 0.05 and divide 1",
                self.spacing
            )));
        }
        if self.levels == 0 || self.levels > 5 {
            return Err(Error::InvalidArgument(format!("levels {} outside 1..=5", self.levels)));
        }
        Ok(())
    }
}

fn check_band(j: usize) -> Result<()> {
    if j == 0 {
        return Err(Error::InvalidArgument("band index is 1-based".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// finite differences

/// Lowest `p_max` eigenvalues of the discrete problem on `[0, length]` with
/// `n` cells, polished by the Rayleigh quotient of the discrete form.
fn fd_single(p_max: usize, gamma: f64, xi: f64, length: f64, n: usize) -> Result<Vec<f64>> {
    let d = length / n as f64;
    // unknowns u_0..u_{n-1}; u_n = 0
    let pot = |i: usize| {
        let t = i as f64 * d - xi;
        t * t
    };
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    diag.push(2.0 / (d * d) + pot(0) + 2.0 * gamma / d);
    for i in 1..n {
        diag.push(2.0 / (d * d) + pot(i));
    }
    off.push(-(2f64).sqrt() / (d * d));
    for _ in 1..n - 1 {
        off.push(-1.0 / (d * d));
    }
    let tri = SymTridiagonal::new(diag, off);
    let raw = tri.lowest(p_max);
    let mut out = Vec::with_capacity(p_max);
    for &lam in &raw {
        let v = tri.eigenvector(lam)?;
        // undo the mass scaling: m_0 = d/2, m_i = d
        let u: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(i, x)| x / (if i == 0 { 0.5 * d } else { d }).sqrt())
            .collect();
        let mut num = gamma * u[0] * u[0];
        let mut den = 0.5 * d * u[0] * u[0];
        num += 0.5 * d * pot(0) * u[0] * u[0];
        for i in 0..n {
            let next = if i + 1 < n { u[i + 1] } else { 0.0 };
            let diff = next - u[i];
            num += diff * diff / d;
            if i > 0 {
                num += d * pot(i) * u[i] * u[i];
                den += d * u[i] * u[i];
            }
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Richardson-extrapolated finite-difference eigenvalues on `[0, length]`.
pub fn fd_eigenvalues(p_max: usize, gamma: f64, xi: f64, length: f64, disc: &HalfLineDiscretization) -> Result<Vec<f64>> {
    let n0 = (length / disc.spacing).round().max(1.0) as usize;
    let levels = disc.levels.max(1);
    let n_fine = n0 << (levels - 1);
    if p_max == 0 || 4 * p_max > n0 {
        return Err(Error::UnresolvedBand {
            band: p_max,
            gamma,
            xi,
            detail: format!("grid of {n0} cells cannot resolve {p_max} bands"),
        });
    }
    let mut per_level: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for k in 0..levels {
        per_level.push(fd_single(p_max, gamma, xi, length, n0 << k)?);
    }
    let mut out = Vec::with_capacity(p_max);
    for j in 0..p_max {
        let seq: Vec<f64> = per_level.iter().map(|v| v[j]).collect();
        out.push(richardson(&seq, 2.0, 2.0));
    }
    for w in out.windows(2) {
        if w[1] - w[0] < 1e-12 * w[0].abs().max(1.0) {
            return Err(Error::UnresolvedBand {
                band: p_max,
                gamma,
                xi,
                detail: format!("near-degenerate discrete eigenvalues on {n_fine} cells"),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// shooting

/// Boundary angle of a Robin condition: `cot(phi) = gamma`, `phi in (0, pi)`.
fn robin_angle(gamma: f64) -> f64 {
    1f64.atan2(gamma)
}

/// Prüfer angle at `t = 0` of the solution vanishing at `t = length`.
/// Strictly decreasing in `mu`.
fn prufer_angle(mu: f64, xi: f64, length: f64) -> Result<f64> {
    let f = |t: f64, y: &[f64; 1]| {
        let (s, c) = y[0].sin_cos();
        let v = (t - xi) * (t - xi);
        [c * c + (mu - v) * s * s]
    };
    let mut ode = Dopri::new(1e-12, 1e-13);
    Ok(ode.advance(&f, length, [0.0], 0.0)?[0])
}

/// `j`-th eigenvalue on `[0, length]` by Prüfer shooting. The bracket, when
/// given, is only a hint.
pub fn shoot_eigenvalue(j: usize, gamma: f64, xi: f64, length: f64, hint: Option<(f64, f64)>) -> Result<f64> {
    check_band(j)?;
    let target = robin_angle(gamma) - j as f64 * PI;
    let g = |mu: f64| prufer_angle(mu, xi, length).map(|p| p - target);
    let (mut lo, mut hi) = match hint {
        Some(b) => b,
        None => {
            let vmin = if xi < 0.0 { xi * xi } else { 0.0 };
            let gm = gamma.min(0.0);
            let lo = vmin - gm * gm - 1.0;
            (lo, lo + 4.0 * j as f64 + 4.0)
        }
    };
    let mut step = (hi - lo).max(1.0);
    let mut glo = g(lo)?;
    while glo <= 0.0 {
        lo -= step;
        step *= 2.0;
        glo = g(lo)?;
    }
    step = (hi - lo).max(1.0);
    let mut ghi = g(hi)?;
    while ghi >= 0.0 {
        hi += step;
        step *= 2.0;
        ghi = g(hi)?;
        if hi > 1e8 {
            return Err(Error::UnresolvedBand {
                band: j,
                gamma,
                xi,
                detail: "shooting bracket diverged".into(),
            });
        }
    }
    let mut err = None;
    let root = brent_root(
        |mu| match g(mu) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        lo,
        hi,
        1e-13 * lo.abs().max(hi.abs()).max(1.0),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

// ---------------------------------------------------------------------------
// public band-function API

/// The lowest `p_max` band values at one parameter point.
pub fn mu_all(p_max: usize, p: RobinOscillatorParams, disc: &HalfLineDiscretization) -> Result<Vec<f64>> {
    disc.validate()?;
    let length = disc.length(p.xi);
    match disc.scheme {
        Scheme::FiniteDifference => fd_eigenvalues(p_max, p.gamma, p.xi, length, disc),
        Scheme::Shooting => (1..=p_max)
            .map(|j| shoot_eigenvalue(j, p.gamma, p.xi, length, None))
            .collect(),
    }
}

/// `mu_j(gamma, xi)` with the scheme selected by `disc`.
pub fn mu(j: usize, p: RobinOscillatorParams, disc: &HalfLineDiscretization) -> Result<f64> {
    check_band(j)?;
    disc.validate()?;
    let length = disc.length(p.xi);
    match disc.scheme {
        Scheme::FiniteDifference => Ok(fd_eigenvalues(j, p.gamma, p.xi, length, disc)?[j - 1]),
        Scheme::Shooting => shoot_eigenvalue(j, p.gamma, p.xi, length, None),
    }
}

/// Both schemes, cross-checked. Retries once with a halved spacing before
/// reporting an unresolved band. Returns the shooting value.
pub fn mu_checked(j: usize, p: RobinOscillatorParams, disc: &HalfLineDiscretization) -> Result<f64> {
    check_band(j)?;
    let mut d = HalfLineDiscretization {
        scheme: Scheme::FiniteDifference,
        ..*disc
    };
    let length = d.length(p.xi);
    let shot = shoot_eigenvalue(j, p.gamma, p.xi, length, None)?;
    let mut diff = f64::INFINITY;
    for _ in 0..2 {
        let fd = mu(j, p, &d)?;
        diff = (fd - shot).abs();
        if diff <= 1e-6 {
            return Ok(shot);
        }
        d.spacing *= 0.5;
    }
    Err(Error::UnresolvedBand {
        band: j,
        gamma: p.gamma,
        xi: p.xi,
        detail: format!("schemes differ by {diff:.3e}"),
    })
}

/// Accurate eigenvalue for eigenfunction work: shooting, bracketed from the
/// finite-difference value when that is the active scheme.
fn precise_mu(j: usize, p: RobinOscillatorParams, disc: &HalfLineDiscretization) -> Result<f64> {
    let length = disc.length(p.xi);
    match disc.scheme {
        Scheme::Shooting => shoot_eigenvalue(j, p.gamma, p.xi, length, None),
        Scheme::FiniteDifference => {
            let fd = mu(j, p, disc)?;
            let w = 1e-7 * fd.abs().max(1.0);
            shoot_eigenvalue(j, p.gamma, p.xi, length, Some((fd - w, fd + w)))
        }
    }
}

/// L²-normalized eigenfunction sampled on `[0, L]`.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub mu: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `|u'(0) - gamma u(0)| / max|u|`.
    pub robin_residual: f64,
}

impl Eigenfunction {
    /// `int_a^L u^2` by the trapezoid rule on the samples.
    pub fn tail_mass(&self, a: f64) -> f64 {
        let mut s = 0.0;
        for k in 1..self.t.len() {
            if self.t[k] <= a {
                continue;
            }
            let t0 = self.t[k - 1].max(a);
            s += 0.5 * (self.t[k] - t0) * (self.u[k - 1].powi(2) + self.u[k].powi(2));
        }
        s
    }
}

type LinearState = [f64; 3];

fn linear_rhs(mu: f64, xi: f64) -> impl Fn(f64, &LinearState) -> LinearState {
    move |t, y| {
        let v = (t - xi) * (t - xi);
        [y[1], (v - mu) * y[0], y[0] * y[0]]
    }
}

pub fn eigenfunction(j: usize, p: RobinOscillatorParams, disc: &HalfLineDiscretization) -> Result<Eigenfunction> {
    check_band(j)?;
    disc.validate()?;
    let mu = precise_mu(j, p, disc)?;
    let length = disc.length(p.xi);
    let n = (length / disc.spacing).round() as usize;
    let dt = length / n as f64;
    let f = linear_rhs(mu, p.xi);
    let mut ode = Dopri::new(1e-12, 1e-300);
    let mut y = [0.0, 1.0, 0.0];
    let mut us = vec![0.0; n + 1];
    let mut dus = vec![0.0; n + 1];
    dus[n] = 1.0;
    for k in (0..n).rev() {
        y = ode.advance(&f, (k + 1) as f64 * dt, y, k as f64 * dt)?;
        us[k] = y[0];
        dus[k] = y[1];
    }
    let norm = (-y[2]).sqrt();
    let sign = if us[0] < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / norm;
    us.iter_mut().for_each(|v| *v *= scale);
    dus.iter_mut().for_each(|v| *v *= scale);
    let umax = us.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let robin_residual = (dus[0] - p.gamma * us[0]).abs() / umax;
    if robin_residual > 1e-6 {
        return Err(Error::UnresolvedBand {
            band: j,
            gamma: p.gamma,
            xi: p.xi,
            detail: format!("Robin residual {robin_residual:.2e}"),
        });
    }
    Ok(Eigenfunction {
        mu,
        t: (0..=n).map(|k| k as f64 * dt).collect(),
        u: us,
        du: dus,
        robin_residual,
    })
}

/// `u_j(0)^2` for the normalized eigenfunction, checked against the bound
/// `4 mu + 8 gamma_-^2 + 2`.
pub fn boundary_value_sq(j: usize, p: RobinOscillatorParams, disc: &HalfLineDiscretization) -> Result<f64> {
    check_band(j)?;
    disc.validate()?;
    let mu = precise_mu(j, p, disc)?;
    let length = disc.length(p.xi);
    let f = linear_rhs(mu, p.xi);
    let mut ode = Dopri::new(1e-12, 1e-300);
    let y = ode.advance(&f, length, [0.0, 1.0, 0.0], 0.0)?;
    let value = y[0] * y[0] / (-y[2]);
    let gm = p.gamma.min(0.0);
    let bound = 4.0 * mu + 8.0 * gm * gm + 2.0;
    if value > bound {
        return Err(Error::Numerical(format!(
            "boundary value {value} exceeds the bound {bound} at band {j}, {p:?}"
        )));
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// minima and sublevel sets

/// Momentum far enough out that `mu_j(gamma, XI_FAR)` equals the large-xi
/// limit to rounding for the bands used here.
pub const XI_FAR: f64 = 12.0;

/// Numerically computed `lim_{xi -> +inf} mu_j(gamma, xi)`.
pub fn band_limit(j: usize, gamma: f64, disc: &HalfLineDiscretization) -> Result<f64> {
    mu(j, RobinOscillatorParams::new(gamma, XI_FAR), disc)
}

fn scan_argmin(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64, step: f64) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = ((hi - lo) / step).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for k in 1..vals.len() {
        if vals[k] < vals[best] {
            best = k;
        }
    }
    Ok((xs, vals, best))
}

/// `(Theta_j(gamma), argmin)`: minimum of `mu_j(gamma, .)` over `xi`.
///
/// A coarse scan brackets the minimum, Brent's method narrows it, and two
/// Newton steps on a five-point derivative stencil polish the minimizer.
pub fn theta(gamma: f64, j: usize, disc: &HalfLineDiscretization) -> Result<(f64, f64)> {
    check_band(j)?;
    let f = |x: f64| mu(j, RobinOscillatorParams::new(gamma, x), disc);
    let mut window = (-2.0, 6.0);
    let mut found = None;
    for attempt in 0..2 {
        let (xs, _, k) = scan_argmin(&f, window.0, window.1, 0.25)?;
        if k > 0 && k + 1 < xs.len() {
            found = Some((xs[k - 1], xs[k + 1]));
            break;
        }
        if attempt == 0 {
            window = (window.0 - 4.0, window.1 + 6.0);
        }
    }
    let (a, b) = found.ok_or(Error::NoInteriorMinimum { band: j, gamma })?;
    let mut err = None;
    let (mut x, _) = brent_min(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::INFINITY
            }
        },
        a,
        b,
        1e-8,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let h = 0.01;
    for _ in 0..2 {
        let v: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|k| f(x + k * h))
            .collect::<Result<_>>()?;
        let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
        let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
        if d2 <= 0.0 {
            break;
        }
        let dx = -d1 / d2;
        if dx.abs() > h {
            break;
        }
        x += dx;
    }
    Ok((f(x)?, x))
}

/// The two solutions of `mu_j(gamma, xi) = b0` flanking the minimum.
pub fn xi_roots(j: usize, gamma: f64, b0: f64, disc: &HalfLineDiscretization) -> Result<(f64, f64)> {
    let (th, xm) = theta(gamma, j, disc)?;
    if b0 <= th {
        return Err(Error::EmptyInterval { level: b0, minimum: th });
    }
    let limit = band_limit(j, gamma, disc)?;
    if b0 >= limit {
        return Err(Error::UnboundedSublevel { level: b0, limit });
    }
    let left = branch_root(j, gamma, b0, xm, -1.0, disc)?;
    let right = branch_root(j, gamma, b0, xm, 1.0, disc)?;
    Ok((left, right))
}

/// Root of `mu_j = b0` on the monotone branch on side `dir` of `xm`.
pub(crate) fn branch_root(j: usize, gamma: f64, b0: f64, xm: f64, dir: f64, disc: &HalfLineDiscretization) -> Result<f64> {
    let f = |x: f64| mu(j, RobinOscillatorParams::new(gamma, x), disc).map(|v| v - b0);
    let mut step = 0.5;
    let mut near = xm;
    let mut far = xm + dir * step;
    while f(far)? < 0.0 {
        near = far;
        step *= 2.0;
        far = xm + dir * step;
        if step > 4.0 * XI_FAR {
            return Err(Error::UnboundedSublevel { level: b0, limit: f64::NAN });
        }
    }
    let mut err = None;
    let r = brent_root(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        near.min(far),
        near.max(far),
        1e-12,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

// ---------------------------------------------------------------------------
// tables

/// Read access to band functions, either tabulated or computed on demand.
pub trait BandSource: Sync {
    fn mu(&self, j: usize, gamma: f64, xi: f64) -> Result<f64>;
    fn p_max(&self) -> usize;
    fn disc(&self) -> &HalfLineDiscretization;
}

/// Sampled band functions on a `(gamma, xi)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTable {
    pub gamma_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub p_max: usize,
    /// Flattened `(j, gamma, xi)` with `xi` fastest.
    pub mu: Vec<f64>,
    pub disc: HalfLineDiscretization,
}

fn strictly_sorted(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Tabulates `mu_1..mu_{p_max}` on the product grid.
pub fn band_table(gamma_grid: &[f64], xi_grid: &[f64], p_max: usize, disc: &HalfLineDiscretization) -> Result<BandTable> {
    if gamma_grid.is_empty() || xi_grid.is_empty() || !strictly_sorted(gamma_grid) || !strictly_sorted(xi_grid) {
        return Err(Error::InvalidArgument("grids must be nonempty and strictly increasing".into()));
    }
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be at least 1".into()));
    }
    let ng = gamma_grid.len();
    let nx = xi_grid.len();
    let nodes: Vec<(usize, usize)> = (0..ng).flat_map(|g| (0..nx).map(move |x| (g, x))).collect();
    let cols = nodes
        .par_iter()
        .map(|&(g, x)| mu_all(p_max, RobinOscillatorParams::new(gamma_grid[g], xi_grid[x]), disc))
        .collect::<Result<Vec<_>>>()?;
    let mut mu = vec![0.0; p_max * ng * nx];
    for (k, &(g, x)) in nodes.iter().enumerate() {
        for j in 0..p_max {
            mu[(j * ng + g) * nx + x] = cols[k][j];
        }
    }
    let table = BandTable {
        gamma_grid: gamma_grid.to_vec(),
        xi_grid: xi_grid.to_vec(),
        p_max,
        mu,
        disc: *disc,
    };
    table.audit()?;
    Ok(table)
}

impl BandTable {
    fn at(&self, j: usize, g: usize, x: usize) -> f64 {
        let ng = self.gamma_grid.len();
        let nx = self.xi_grid.len();
        self.mu[((j - 1) * ng + g) * nx + x]
    }

    /// Strict increase in `j` and monotonicity in `gamma` at every node.
    pub fn audit(&self) -> Result<()> {
        let ng = self.gamma_grid.len();
        let nx = self.xi_grid.len();
        for g in 0..ng {
            for x in 0..nx {
                for j in 1..self.p_max {
                    if self.at(j + 1, g, x) <= self.at(j, g, x) {
                        return Err(Error::Numerical(format!(
                            "band {} not above band {j} at gamma={}, xi={}",
                            j + 1,
                            self.gamma_grid[g],
                            self.xi_grid[x]
                        )));
                    }
                }
            }
        }
        for j in 1..=self.p_max {
            for x in 0..nx {
                for g in 1..ng {
                    let (a, b) = (self.at(j, g - 1, x), self.at(j, g, x));
                    // differences far out in xi are exponentially small
                    if b < a - 1e-10 * a.abs().max(1.0) {
                        return Err(Error::Numerical(format!(
                            "band {j} decreases in gamma at xi={}: {a} -> {b}",
                            self.xi_grid[x]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn locate(grid: &[f64], v: f64) -> Option<(usize, f64)> {
        let n = grid.len();
        if n == 1 {
            return (v == grid[0]).then_some((0, 0.0));
        }
        if v < grid[0] || v > grid[n - 1] {
            return None;
        }
        let k = grid.partition_point(|&g| g <= v).clamp(1, n - 1) - 1;
        Some((k, (v - grid[k]) / (grid[k + 1] - grid[k])))
    }

    /// Bilinear interpolation; errors outside the tabulated range.
    pub fn interpolate(&self, j: usize, gamma: f64, xi: f64) -> Result<f64> {
        if j == 0 || j > self.p_max {
            return Err(Error::TableTooSmall { p_max: self.p_max });
        }
        let (g, wg) = Self::locate(&self.gamma_grid, gamma)
            .ok_or_else(|| Error::InvalidArgument(format!("gamma {gamma} outside the table")))?;
        let (x, wx) = Self::locate(&self.xi_grid, xi)
            .ok_or_else(|| Error::InvalidArgument(format!("xi {xi} outside the table")))?;
        let g1 = (g + 1).min(self.gamma_grid.len() - 1);
        let x1 = (x + 1).min(self.xi_grid.len() - 1);
        let v00 = self.at(j, g, x);
        let v01 = self.at(j, g, x1);
        let v10 = self.at(j, g1, x);
        let v11 = self.at(j, g1, x1);
        Ok((1.0 - wg) * ((1.0 - wx) * v00 + wx * v01) + wg * ((1.0 - wx) * v10 + wx * v11))
    }

    /// Columnar text `j gamma xi mu`, one node per line, after a metadata
    /// comment and a header.
    pub fn to_columnar(&self) -> String {
        let mut s = String::new();
        let d = &self.disc;
        let scheme = match d.scheme {
            Scheme::FiniteDifference => "finite-difference",
            Scheme::Shooting => "shooting",
        };
        let _ = writeln!(
            s,
            "# margin={} spacing={} levels={} scheme={scheme}",
            d.margin, d.spacing, d.levels
        );
        s.push_str("j gamma xi mu\n");
        for j in 1..=self.p_max {
            for (g, &gv) in self.gamma_grid.iter().enumerate() {
                for (x, &xv) in self.xi_grid.iter().enumerate() {
                    let _ = writeln!(s, "{j} {gv:.17e} {xv:.17e} {:.17e}", self.at(j, g, x));
                }
            }
        }
        s
    }

    pub fn from_columnar(text: &str) -> Result<BandTable> {
        let bad = |m: String| Error::ConfigInvalid {
            field: "band table".into(),
            message: m,
        };
        let mut disc = HalfLineDiscretization::default();
        let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
        let mut header_seen = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else { continue };
                    let num = || v.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
                    match k {
                        "margin" => disc.margin = num()?,
                        "spacing" => disc.spacing = num()?,
                        "levels" => disc.levels = num()? as usize,
                        "scheme" => {
                            disc.scheme = if v == "shooting" {
                                Scheme::Shooting
                            } else {
                                Scheme::FiniteDifference
                            }
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line.split_whitespace().collect::<Vec<_>>() != ["j", "gamma", "xi", "mu"] {
                    return Err(bad(format!("line {}: expected header 'j gamma xi mu'", ln + 1)));
                }
                header_seen = true;
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(format!("line {}: expected 4 columns", ln + 1)));
            }
            let p = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", ln + 1)));
            let j = f[0].parse::<usize>().map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
            rows.push((j, p(f[1])?, p(f[2])?, p(f[3])?));
        }
        let uniq = |mut v: Vec<f64>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup();
            v
        };
        let gamma_grid = uniq(rows.iter().map(|r| r.1).collect());
        let xi_grid = uniq(rows.iter().map(|r| r.2).collect());
        let p_max = rows.iter().map(|r| r.0).max().unwrap_or(0);
        let (ng, nx) = (gamma_grid.len(), xi_grid.len());
        if p_max == 0 || rows.len() != p_max * ng * nx {
            return Err(bad(format!("{} rows do not fill a {p_max}x{ng}x{nx} grid", rows.len())));
        }
        let mut mu = vec![f64::NAN; rows.len()];
        for (j, g, x, v) in rows {
            let gi = gamma_grid.partition_point(|&a| a < g);
            let xi = xi_grid.partition_point(|&a| a < x);
            mu[((j - 1) * ng + gi) * nx + xi] = v;
        }
        if mu.iter().any(|v| v.is_nan()) {
            return Err(bad("duplicate or missing nodes".into()));
        }
        Ok(BandTable {
            gamma_grid,
            xi_grid,
            p_max,
            mu,
            disc,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_columnar())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<BandTable> {
        Self::from_columnar(&std::fs::read_to_string(path)?)
    }

    /// Names the first node where two tables differ beyond `tol`.
    pub fn diff(&self, other: &BandTable, tol: f64) -> Option<String> {
        if self.gamma_grid != other.gamma_grid || self.xi_grid != other.xi_grid || self.p_max != other.p_max {
            return Some("grid shape differs".into());
        }
        let ng = self.gamma_grid.len();
        let nx = self.xi_grid.len();
        for j in 1..=self.p_max {
            for g in 0..ng {
                for x in 0..nx {
                    let (a, b) = (self.at(j, g, x), other.at(j, g, x));
                    if (a - b).abs() > tol {
                        return Some(format!(
                            "mu_{j}(gamma={}, xi={}): {a} vs {b}",
                            self.gamma_grid[g], self.xi_grid[x]
                        ));
                    }
                }
            }
        }
        None
    }
}

impl BandSource for BandTable {
    fn mu(&self, j: usize, gamma: f64, xi: f64) -> Result<f64> {
        self.interpolate(j, gamma, xi)
    }
    fn p_max(&self) -> usize {
        self.p_max
    }
    fn disc(&self) -> &HalfLineDiscretization {
        &self.disc
    }
}

/// Band functions evaluated on demand, caching every computed column.
#[derive(Debug)]
pub struct DirectBands {
    pub disc: HalfLineDiscretization,
    pub p_max: usize,
    cache: Mutex<HashMap<(u64, u64), Vec<f64>>>,
}

impl DirectBands {
    pub fn new(p_max: usize, disc: HalfLineDiscretization) -> Self {
        Self {
            disc,
            p_max,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn column(&self, gamma: f64, xi: f64) -> Result<Vec<f64>> {
        self.bands_upto(self.p_max, gamma, xi)
    }

    /// At least the lowest `j` values; cached columns are extended on demand
    /// so that sums over the first band do not pay for the higher ones.
    fn bands_upto(&self, j: usize, gamma: f64, xi: f64) -> Result<Vec<f64>> {
        let key = (gamma.to_bits(), xi.to_bits());
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            if v.len() >= j {
                return Ok(v.clone());
            }
        }
        let v = mu_all(j, RobinOscillatorParams::new(gamma, xi), &self.disc)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

impl BandSource for DirectBands {
    fn mu(&self, j: usize, gamma: f64, xi: f64) -> Result<f64> {
        if j == 0 || j > self.p_max {
            return Err(Error::TableTooSmall { p_max: self.p_max });
        }
        Ok(self.bands_upto(j, gamma, xi)?[j - 1])
    }
    fn p_max(&self) -> usize {
        self.p_max
    }
    fn disc(&self) -> &HalfLineDiscretization {
        &self.disc
    }
}
