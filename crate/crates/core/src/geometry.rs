//! Closed boundary curves, curvature, tubular coordinates near the boundary
//! and the normal-form gauge on a boundary window.
//!
//! Conventions: curves run counterclockwise, `nu` is the outward unit normal,
//! `Phi(s, t) = M(s) - t nu(s)` enters the domain for `t > 0` and the area
//! element there is `1 - t k(s)`, with `k > 0` on a disk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

pub type Point = [f64; 2];

/// Built-in boundary shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    Square { side: f64 },
}

impl Shape {
    /// Dense counterclockwise polyline, starting on the positive x-axis for
    /// the smooth shapes and at the lower-left corner for the square.
    pub fn points(&self, n: usize) -> Vec<Point> {
        match *self {
            Shape::Circle { r } => (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n as f64;
                    [r * th.cos(), r * th.sin()]
                })
                .collect(),
            Shape::Ellipse { a, b } => (0..n)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n as f64;
                    [a * th.cos(), b * th.sin()]
                })
                .collect(),
            Shape::Square { side } => {
                let per = n.max(4) / 4;
                let corners = [[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]];
                let mut out = Vec::with_capacity(4 * per);
                for c in 0..4 {
                    let p = corners[c];
                    let q = corners[(c + 1) % 4];
                    for k in 0..per {
                        let w = k as f64 / per as f64;
                        out.push([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]);
                    }
                }
                out
            }
        }
    }
}

// ---------------------------------------------------------------------------
// periodic cubic spline

#[derive(Debug, Clone)]
struct PeriodicSpline {
    knots: Vec<f64>, // n + 1 entries, last = first + period
    px: Vec<f64>,
    py: Vec<f64>,
    mx: Vec<f64>,
    my: Vec<f64>,
}

/// Solves a cyclic tridiagonal system with constant structure
/// `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = r_i` (indices mod n).
fn cyclic_solve(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let gamma = -b[0];
    let alpha = c[n - 1];
    let beta = a[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let thomas = |rhs: &[f64]| {
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c[0] / bb[0];
        dp[0] = rhs[0] / bb[0];
        for i in 1..n {
            let m = bb[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / m;
            dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    };
    let x = thomas(r);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(&u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

impl PeriodicSpline {
    fn new(knots_open: &[f64], period: f64, pts: &[Point]) -> Self {
        let n = pts.len();
        let mut knots = knots_open.to_vec();
        knots.push(knots_open[0] + period);
        let h: Vec<f64> = (0..n).map(|i| knots[i + 1] - knots[i]).collect();
        let px: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let py: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        let second = |v: &[f64]| {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            let mut c = vec![0.0; n];
            let mut r = vec![0.0; n];
            for i in 0..n {
                let hm = h[(i + n - 1) % n];
                let hp = h[i];
                a[i] = hm / 6.0;
                b[i] = (hm + hp) / 3.0;
                c[i] = hp / 6.0;
                r[i] = (v[(i + 1) % n] - v[i]) / hp - (v[i] - v[(i + n - 1) % n]) / hm;
            }
            cyclic_solve(&a, &b, &c, &r)
        };
        let mx = second(&px);
        let my = second(&py);
        Self { knots, px, py, mx, my }
    }

    fn period(&self) -> f64 {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }

    /// Value, first and second derivative at parameter `u`.
    fn eval(&self, u: f64) -> (Point, Point, Point) {
        let n = self.px.len();
        let per = self.period();
        let u = self.knots[0] + (u - self.knots[0]).rem_euclid(per);
        let i = (self.knots.partition_point(|&k| k <= u).max(1) - 1).min(n - 1);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - u) / h;
        let b = (u - self.knots[i]) / h;
        let j = (i + 1) % n;
        let comp = |p: &[f64], m: &[f64]| {
            let v = a * p[i] + b * p[j] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[j]) * h * h / 6.0;
            let d = (p[j] - p[i]) / h - (3.0 * a * a - 1.0) * h * m[i] / 6.0 + (3.0 * b * b - 1.0) * h * m[j] / 6.0;
            let dd = a * m[i] + b * m[j];
            (v, d, dd)
        };
        let (x, dx, ddx) = comp(&self.px, &self.mx);
        let (y, dy, ddy) = comp(&self.py, &self.my);
        ([x, y], [dx, dy], [ddx, ddy])
    }
}

// ---------------------------------------------------------------------------
// boundary curve

/// Closed counterclockwise curve resampled at uniform arc length.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    /// Nodes `M(k |dOmega| / n)`, `k = 0..n`; the closing node is implicit.
    pub samples: Vec<Point>,
    pub total_length: f64,
    pub curvature_samples: Vec<f64>,
    /// Orientation of the input polyline; samples are always counterclockwise.
    pub input_counterclockwise: bool,
    spline: PeriodicSpline,
}

fn signed_area(p: &[Point]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let q = p[(i + 1) % n];
            p[i][0] * q[1] - q[0] * p[i][1]
        })
        .sum::<f64>()
        * 0.5
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl BoundaryCurve {
    /// Resamples a closed polyline (repeated closing point optional) to
    /// `n_out` nodes at uniform arc length of its periodic cubic spline.
    pub fn from_points(points: &[Point], n_out: usize) -> Result<Self> {
        let mut pts: Vec<Point> = points.to_vec();
        if pts.len() >= 2 && dist(pts[0], pts[pts.len() - 1]) < 1e-12 {
            pts.pop();
        }
        if pts.len() < 8 || n_out < 8 {
            return Err(Error::DegenerateCurve(format!(
                "need at least 8 samples, got {} in and {n_out} out",
                pts.len()
            )));
        }
        let scale = pts.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max).max(1e-300);
        for i in 0..pts.len() {
            if dist(pts[i], pts[(i + 1) % pts.len()]) <= 1e-12 * scale {
                return Err(Error::DegenerateCurve(format!("samples {i} and {} coincide", i + 1)));
            }
        }
        let ccw = signed_area(&pts) > 0.0;
        if !ccw {
            pts.reverse();
        }
        // chord-length parametrization of the input
        let mut chord = vec![0.0];
        for i in 1..pts.len() {
            chord.push(chord[i - 1] + dist(pts[i - 1], pts[i]));
        }
        let period = chord[pts.len() - 1] + dist(pts[pts.len() - 1], pts[0]);
        let raw = PeriodicSpline::new(&chord, period, &pts);
        let (gx, gw) = gauss_legendre(10);
        let seg_len = |u0: f64, u1: f64| {
            let (c, r) = (0.5 * (u0 + u1), 0.5 * (u1 - u0));
            gx.iter()
                .zip(&gw)
                .map(|(x, w)| {
                    let (_, d, _) = raw.eval(c + r * x);
                    w * r * d[0].hypot(d[1])
                })
                .sum::<f64>()
        };
        let m = pts.len();
        let mut cum = vec![0.0; m + 1];
        for i in 0..m {
            cum[i + 1] = cum[i] + seg_len(raw.knots[i], raw.knots[i + 1]);
        }
        let total = cum[m];
        let mut samples = Vec::with_capacity(n_out);
        for k in 0..n_out {
            let target = total * k as f64 / n_out as f64;
            let i = (cum.partition_point(|&c| c <= target).max(1) - 1).min(m - 1);
            let (u0, u1) = (raw.knots[i], raw.knots[i + 1]);
            let mut u = u0 + (u1 - u0) * (target - cum[i]) / (cum[i + 1] - cum[i]);
            for _ in 0..30 {
                let g = cum[i] + seg_len(u0, u) - target;
                let (_, d, _) = raw.eval(u);
                let du = g / d[0].hypot(d[1]);
                u = (u - du).clamp(u0, u1);
                if du.abs() < 1e-15 * period {
                    break;
                }
            }
            samples.push(raw.eval(u).0);
        }
        Self::from_uniform(samples, total, ccw)
    }

    fn from_uniform(samples: Vec<Point>, total: f64, ccw: bool) -> Result<Self> {
        let n = samples.len();
        let ds = total / n as f64;
        let knots: Vec<f64> = (0..n).map(|k| k as f64 * ds).collect();
        let spline = PeriodicSpline::new(&knots, total, &samples);
        let curvature_samples = fd_curvature(&samples, ds);
        if curvature_samples.iter().any(|k| !k.is_finite()) {
            return Err(Error::DegenerateCurve("non-finite curvature".into()));
        }
        Ok(Self {
            samples,
            total_length: total,
            curvature_samples,
            input_counterclockwise: ccw,
            spline,
        })
    }

    pub fn from_shape(shape: Shape, n_out: usize) -> Result<Self> {
        if let Shape::Square { .. } = shape {
            return Err(Error::DegenerateCurve(
                "the square has corners; use the dedicated square solvers".into(),
            ));
        }
        Self::from_points(&shape.points(8 * n_out.max(64)), n_out)
    }

    pub fn circle(r: f64, n: usize) -> Result<Self> {
        Self::from_shape(Shape::Circle { r }, n)
    }

    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_shape(Shape::Ellipse { a, b }, n)
    }

    /// Reads whitespace- or comma-separated `x y` rows; `#` starts a comment.
    pub fn from_table(text: &str, n_out: usize) -> Result<Self> {
        let mut pts = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("curve line {}: {e}", ln + 1)))?;
            if v.len() != 2 {
                return Err(Error::InvalidArgument(format!("curve line {}: expected x y", ln + 1)));
            }
            pts.push([v[0], v[1]]);
        }
        Self::from_points(&pts, n_out)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.total_length / self.len() as f64
    }

    pub fn node_s(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    pub fn point(&self, s: f64) -> Point {
        self.spline.eval(s).0
    }

    /// Unit tangent.
    pub fn tangent(&self, s: f64) -> Point {
        let (_, d, _) = self.spline.eval(s);
        let l = d[0].hypot(d[1]);
        [d[0] / l, d[1] / l]
    }

    /// Outward unit normal.
    pub fn normal(&self, s: f64) -> Point {
        let t = self.tangent(s);
        [t[1], -t[0]]
    }

    /// Curvature of the arc-length spline itself; a cross-check for the
    /// finite-difference samples.
    pub fn spline_curvature(&self, s: f64) -> f64 {
        let (_, d, dd) = self.spline.eval(s);
        (d[0] * dd[1] - d[1] * dd[0]) / d[0].hypot(d[1]).powi(3)
    }

    /// `|M'(s)|` at every node; equals 1 for an arc-length parametrization.
    pub fn speed_samples(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let (_, d, _) = self.spline.eval(self.node_s(k));
                d[0].hypot(d[1])
            })
            .collect()
    }

    /// `int k ds` over the curve (trapezoid on the nodes).
    pub fn turning(&self) -> f64 {
        self.curvature_samples.iter().sum::<f64>() * self.spacing()
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.curvature_samples.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Periodic fourth-order centered differences for the signed curvature.
fn fd_curvature(p: &[Point], ds: f64) -> Vec<f64> {
    let n = p.len();
    let at = |i: isize, c: usize| p[i.rem_euclid(n as isize) as usize][c];
    (0..n as isize)
        .map(|i| {
            let d1 = |c| (at(i - 2, c) - 8.0 * at(i - 1, c) + 8.0 * at(i + 1, c) - at(i + 2, c)) / (12.0 * ds);
            let d2 = |c| {
                (-at(i - 2, c) + 16.0 * at(i - 1, c) - 30.0 * at(i, c) + 16.0 * at(i + 1, c) - at(i + 2, c))
                    / (12.0 * ds * ds)
            };
            let (x1, y1, x2, y2) = (d1(0), d1(1), d2(0), d2(1));
            (x1 * y2 - y1 * x2) / (x1 * x1 + y1 * y1).powf(1.5)
        })
        .collect()
}

/// Signed curvature at arc length `s`, by local cubic interpolation of the
/// finite-difference samples.
pub fn curvature(curve: &BoundaryCurve, s: f64) -> Result<f64> {
    if !(0.0..curve.total_length).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "arc length {s} outside [0, {})",
            curve.total_length
        )));
    }
    let n = curve.len() as isize;
    let x = s / curve.spacing();
    let i = x.floor() as isize;
    let w = x - i as f64;
    let k = |j: isize| curve.curvature_samples[j.rem_euclid(n) as usize];
    // four-point Lagrange on i-1..i+2
    let (km, k0, k1, k2) = (k(i - 1), k(i), k(i + 1), k(i + 2));
    Ok(-w * (w - 1.0) * (w - 2.0) / 6.0 * km + (w + 1.0) * (w - 1.0) * (w - 2.0) / 2.0 * k0
        - (w + 1.0) * w * (w - 2.0) / 2.0 * k1
        + (w + 1.0) * w * (w - 1.0) / 6.0 * k2)
}

// ---------------------------------------------------------------------------
// tubular coordinates

#[derive(Debug, Clone)]
pub struct TubularCoords {
    pub curve: BoundaryCurve,
    pub t0: f64,
}

impl TubularCoords {
    /// Collar depth `0.5 / max|k|`, halved until a nearest-node audit of
    /// sampled collar points passes.
    pub fn new(curve: BoundaryCurve) -> Result<Self> {
        let kmax = curve.max_abs_curvature().max(1e-12);
        let mut t0 = (0.5 / kmax).min(0.25 * curve.total_length);
        for _ in 0..12 {
            let tc = Self {
                curve: curve.clone(),
                t0,
            };
            if tc.injectivity_audit() {
                return Ok(tc);
            }
            t0 *= 0.5;
        }
        Err(Error::DegenerateCurve("no collar depth passed the injectivity audit".into()))
    }

    pub fn with_depth(curve: BoundaryCurve, t0: f64) -> Result<Self> {
        if !(t0 > 0.0) || 1.0 - t0 * curve.max_abs_curvature() <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "collar depth {t0} incompatible with max curvature {}",
                curve.max_abs_curvature()
            )));
        }
        Ok(Self { curve, t0 })
    }

    /// Every sampled collar point must have its own foot point as nearest
    /// boundary node (up to one node) at the expected distance.
    fn injectivity_audit(&self) -> bool {
        let n = self.curve.len();
        let stride = (n / 128).max(1);
        for k in (0..n).step_by(stride) {
            let s = self.curve.node_s(k);
            for frac in [0.25, 0.5, 0.75, 0.99] {
                let t = frac * self.t0;
                let x = self.phi(s, t);
                let (best, d) = self.nearest_node(x);
                let off = (best as isize - k as isize).rem_euclid(n as isize);
                let off = off.min(n as isize - off);
                if off > 1 || (d - t).abs() > 2.0 * self.curve.spacing() {
                    return false;
                }
            }
        }
        true
    }

    fn nearest_node(&self, x: Point) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, p) in self.curve.samples.iter().enumerate() {
            let d = dist(*p, x);
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    fn phi(&self, s: f64, t: f64) -> Point {
        let m = self.curve.point(s);
        let nu = self.curve.normal(s);
        [m[0] - t * nu[0], m[1] - t * nu[1]]
    }

    /// Jacobian `1 - t k(s)`.
    pub fn jacobian(&self, s: f64, t: f64) -> Result<f64> {
        Ok(1.0 - t * curvature(&self.curve, s.rem_euclid(self.curve.total_length))?)
    }
}

pub fn from_boundary_coords(tc: &TubularCoords, s: f64, t: f64) -> Result<Point> {
    if t >= tc.t0 || t < 0.0 {
        return Err(Error::OutsideCollar {
            distance: t,
            depth: tc.t0,
        });
    }
    Ok(tc.phi(s, t))
}

/// `(s, t)` with `M(s)` the nearest boundary point and `t` the distance.
pub fn to_boundary_coords(tc: &TubularCoords, x: Point) -> Result<(f64, f64)> {
    let c = &tc.curve;
    let (k, _) = tc.nearest_node(x);
    let mut s = c.node_s(k);
    // Newton on (M(s) - x) . M'(s) = 0
    for _ in 0..50 {
        let (m, d, dd) = c.spline.eval(s);
        let r = [m[0] - x[0], m[1] - x[1]];
        let g = r[0] * d[0] + r[1] * d[1];
        let gp = d[0] * d[0] + d[1] * d[1] + r[0] * dd[0] + r[1] * dd[1];
        let step = g / gp;
        s -= step.clamp(-c.spacing(), c.spacing());
        if step.abs() < 1e-15 * c.total_length {
            break;
        }
    }
    let s = s.rem_euclid(c.total_length);
    let m = c.point(s);
    let nu = c.normal(s);
    let t = -((x[0] - m[0]) * nu[0] + (x[1] - m[1]) * nu[1]);
    let d = dist(x, m);
    // points just outside the spline, e.g. exact boundary points of a
    // sampled shape, count as boundary points
    if t < -1e-6 * c.spacing() || d >= tc.t0 {
        return Err(Error::OutsideCollar {
            distance: if t < 0.0 { -d } else { d },
            depth: tc.t0,
        });
    }
    Ok((s, t.max(0.0)))
}

// ---------------------------------------------------------------------------
// gauge normalization

/// Normal-form vector potential on a boundary window, in `(s, t)` components.
#[derive(Debug, Clone)]
pub struct GaugeField {
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// First component, `t` fastest.
    pub a1: Vec<f64>,
    /// Second component: identically zero.
    pub a2: Vec<f64>,
    pub b0: f64,
    /// `a1 + b0 t`.
    pub beta: Vec<f64>,
    pub s0: f64,
}

impl GaugeField {
    pub fn sup_beta(&self) -> f64 {
        self.beta.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    /// `sup|beta| / (S^2 + T^2)` with `S` the largest `|s - s0|`.
    pub fn beta_constant(&self) -> f64 {
        let s = self.s_grid.iter().map(|s| (s - self.s0).abs()).fold(0.0, f64::max);
        let t = *self.t_grid.last().unwrap();
        self.sup_beta() / (s * s + t * t)
    }

    /// `-d a1 / dt` at interior nodes, the curl in `(s, t)` coordinates.
    pub fn curl(&self) -> Vec<f64> {
        let nt = self.t_grid.len();
        let mut out = vec![0.0; self.a1.len()];
        for i in 0..self.s_grid.len() {
            for j in 0..nt {
                let (a, b) = if j == 0 {
                    (0, 1)
                } else if j + 1 == nt {
                    (nt - 2, nt - 1)
                } else {
                    (j - 1, j + 1)
                };
                out[i * nt + j] =
                    -(self.a1[i * nt + b] - self.a1[i * nt + a]) / (self.t_grid[b] - self.t_grid[a]);
            }
        }
        out
    }
}

/// Magnetic field `dA2/dx - dA1/dy` by centered differences.
pub fn field_at(a: &dyn Fn(Point) -> Point, x: Point) -> f64 {
    let h = 1e-5 * x[0].abs().max(x[1].abs()).max(1.0);
    let d2x = (a([x[0] + h, x[1]])[1] - a([x[0] - h, x[1]])[1]) / (2.0 * h);
    let d1y = (a([x[0], x[1] + h])[0] - a([x[0], x[1] - h])[0]) / (2.0 * h);
    d2x - d1y
}

/// Transforms `a_xy` to boundary coordinates on `[s1, s2] x [0, t_max]` and
/// removes the gauge `phi(s, t) = int_0^t A2 + int_{s0}^s A1(., 0)`, so the
/// second component vanishes and the first is `-b0 t + beta`.
#[allow(clippy::too_many_arguments)]
pub fn gauge_normalize(
    tc: &TubularCoords,
    a_xy: &dyn Fn(Point) -> Point,
    s0: f64,
    window: (f64, f64),
    t_max: f64,
    ns: usize,
    nt: usize,
) -> Result<GaugeField> {
    if t_max >= tc.t0 {
        return Err(Error::WindowTooDeep {
            depth: t_max,
            collar: tc.t0,
        });
    }
    if ns < 3 || nt < 3 || window.1 <= window.0 || s0 < window.0 || s0 > window.1 {
        return Err(Error::InvalidArgument("gauge window needs s1 <= s0 <= s2 and >= 3 nodes per side".into()));
    }
    let c = &tc.curve;
    let s_grid: Vec<f64> = (0..ns)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (ns - 1) as f64)
        .collect();
    let t_grid: Vec<f64> = (0..nt).map(|j| t_max * j as f64 / (nt - 1) as f64).collect();
    // pulled-back components: A . dPhi/ds and A . dPhi/dt
    let pull = |s: f64, t: f64| -> Result<(f64, f64)> {
        let x = tc.phi(s, t);
        let a = a_xy(x);
        let tg = c.tangent(s);
        let nu = c.normal(s);
        let jac = tc.jacobian(s, t)?;
        Ok((
            jac * (a[0] * tg[0] + a[1] * tg[1]),
            -(a[0] * nu[0] + a[1] * nu[1]),
        ))
    };
    // Gauss-Legendre line integrals in t
    let (gx, gw) = gauss_legendre(12);
    let line = |f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64| -> Result<f64> {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in gx.iter().zip(&gw) {
            acc += w * r * f(m + r * x)?;
        }
        Ok(acc)
    };
    // the s-derivative of phi is needed at each node; integrate the
    // s-derivative of A2 instead of differencing phi
    let ds = 1e-5 * c.total_length.max(1.0);
    let mut a1 = vec![0.0; ns * nt];
    for (i, &s) in s_grid.iter().enumerate() {
        let a1_base = pull(s, 0.0)?.0;
        for (j, &t) in t_grid.iter().enumerate() {
            let d_int = if t == 0.0 {
                0.0
            } else {
                line(
                    &|tau| Ok((pull(s + ds, tau)?.1 - pull(s - ds, tau)?.1) / (2.0 * ds)),
                    0.0,
                    t,
                )?
            };
            // d/ds of int_{s0}^s A1(., 0) is A1(s, 0)
            a1[i * nt + j] = pull(s, t)?.0 - a1_base - d_int;
        }
    }
    let b0 = field_at(a_xy, c.point(s0));
    let beta: Vec<f64> = (0..ns * nt).map(|k| a1[k] + b0 * t_grid[k % nt]).collect();
    Ok(GaugeField {
        s_grid,
        t_grid,
        a2: vec![0.0; ns * nt],
        a1,
        b0,
        beta,
        s0,
    })
}
