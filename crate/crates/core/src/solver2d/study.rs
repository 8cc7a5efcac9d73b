//! Scaled eigenvalue sums along a sequence of semiclassical parameters.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{disk_fiber_solve, square_solve, Geometry, ProblemSpec, SpectrumResult};
use crate::error::{Error, Result};
use crate::quad::richardson;

/// Reference values of `h^{-1/2} E` and `h^{1/2} N` as `h -> 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitValues {
    pub energy: Option<f64>,
    pub count: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub h: f64,
    pub energy: f64,
    pub count: usize,
    /// `h^{-1/2} E`
    pub scaled_energy: f64,
    /// `h^{1/2} N`
    pub scaled_count: f64,
    /// `h N`
    pub h_count: f64,
    pub energy_error: Option<f64>,
    pub count_error: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub h_list: Vec<f64>,
    pub points: Vec<StudyPoint>,
    pub limits: LimitValues,
    /// Richardson estimates from the last three points, assuming
    /// corrections in powers of `h^{1/2}`.
    pub extrapolated_energy: Option<f64>,
    pub extrapolated_count: Option<f64>,
    /// Set when the time budget stopped the study early.
    pub budget_exceeded: bool,
}

impl ConvergenceReport {
    pub fn energy_errors(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.energy_error).collect()
    }

    pub fn count_errors(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.count_error).collect()
    }
}

fn solve(spec: &ProblemSpec) -> Result<SpectrumResult> {
    match spec.geometry {
        Geometry::Disk { .. } => Ok(disk_fiber_solve(spec, None)?.result),
        Geometry::Square { .. } => square_solve(spec),
    }
}

fn rel(value: f64, limit: Option<f64>) -> Option<f64> {
    limit.map(|l| (value - l).abs() / l.abs())
}

/// Solves `base` at every `h` (the other parameters are kept) and compares
/// the scaled sums with `limits`. A budget stops the study before the next
/// solve once exceeded; the partial report is returned with the flag set.
pub fn convergence_study(
    base: &ProblemSpec,
    h_list: &[f64],
    limits: LimitValues,
    budget: Option<Duration>,
) -> Result<ConvergenceReport> {
    if h_list.is_empty() {
        return Err(Error::InvalidArgument("empty h list".into()));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("h list must be strictly decreasing".into()));
    }
    let start = Instant::now();
    let mut points = Vec::new();
    let mut budget_exceeded = false;
    for &h in h_list {
        if budget.is_some_and(|b| start.elapsed() > b) {
            budget_exceeded = true;
            break;
        }
        let t0 = Instant::now();
        let spec = ProblemSpec { h, ..base.clone() };
        let r = solve(&spec)?;
        let scaled_energy = r.energy / h.sqrt();
        let scaled_count = r.count as f64 * h.sqrt();
        points.push(StudyPoint {
            h,
            energy: r.energy,
            count: r.count,
            scaled_energy,
            scaled_count,
            h_count: r.count as f64 * h,
            energy_error: rel(scaled_energy, limits.energy),
            count_error: rel(scaled_count, limits.count),
            seconds: t0.elapsed().as_secs_f64(),
        });
        log::info!("h = {h}: E = {:.6e}, N = {}", r.energy, r.count);
    }
    let extrapolate = |f: fn(&StudyPoint) -> f64| -> Option<f64> {
        let n = points.len();
        if n < 3 {
            return None;
        }
        let last = &points[n - 3..];
        let ratio = last[0].h / last[1].h;
        if ((last[1].h / last[2].h) / ratio - 1.0).abs() > 1e-9 {
            return None;
        }
        let vals: Vec<f64> = last.iter().map(f).collect();
        Some(richardson(&vals, ratio, 0.5))
    };
    Ok(ConvergenceReport {
        h_list: h_list.to_vec(),
        extrapolated_energy: extrapolate(|p| p.scaled_energy),
        extrapolated_count: extrapolate(|p| p.scaled_count),
        points,
        limits,
        budget_exceeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_h_lists() {
        let spec = ProblemSpec::disk(1.0, 0.1, 1.0, 0.0, 1.0, 1.0);
        assert!(convergence_study(&spec, &[], LimitValues::default(), None).is_err());
        assert!(convergence_study(&spec, &[0.05, 0.1], LimitValues::default(), None).is_err());
    }
}
