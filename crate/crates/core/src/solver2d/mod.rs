//! Direct eigensolves of the magnetic Robin Laplacian
//! `(-ih grad + A)^2` with the boundary form `h^{1+alpha} int gamma |u|^2`,
//! on the disk (angular-momentum fibers or a full polar grid) and on the
//! square.

mod disk;
mod polar;
mod square;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use disk::{disk_fiber_solve, FiberSolve};
pub use polar::{
    assemble_polar, coupling_grading, form_lower_bound_probe, polar_solve, polar_solve_extrapolated, Grading, LowerBoundProbe,
    PolarGrid,
};
pub use square::square_solve;
pub use study::{convergence_study, ConvergenceReport, LimitValues, StudyPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    Disk { radius: f64 },
    Square { side: f64 },
}

/// Magnetic field. `RadialQuadratic` is `B(r) = b0 + b2 r^2` about the disk
/// centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Field {
    Constant { b: f64 },
    RadialQuadratic { b0: f64, b2: f64 },
}

impl Field {
    /// `inf B` over a disk of radius `r` (or any region for constant fields).
    pub fn infimum(&self, r: f64) -> f64 {
        match *self {
            Field::Constant { b } => b,
            Field::RadialQuadratic { b0, b2 } => b0.min(b0 + b2 * r * r),
        }
    }

    pub fn at_radius(&self, r: f64) -> f64 {
        match *self {
            Field::Constant { b } => b,
            Field::RadialQuadratic { b0, b2 } => b0 + b2 * r * r,
        }
    }

    /// Tangential potential `a(r) = r^{-1} int_0^r B(s) s ds` of the
    /// rotationally symmetric gauge.
    pub fn tangential_potential(&self, r: f64) -> f64 {
        match *self {
            Field::Constant { b } => 0.5 * b * r,
            Field::RadialQuadratic { b0, b2 } => 0.5 * b0 * r + 0.25 * b2 * r * r * r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum GammaSpec {
    Constant(f64),
    /// Uniform samples in the boundary angle (disk) starting at angle 0.
    Samples(Vec<f64>),
}

impl GammaSpec {
    pub fn constant(&self) -> Option<f64> {
        match self {
            GammaSpec::Constant(g) => Some(*g),
            GammaSpec::Samples(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridControls {
    /// Nodes per magnetic length `sqrt(h / b)`.
    pub points_per_length: f64,
    /// Solve again on the doubled grid and extrapolate.
    pub refine: bool,
}

impl Default for GridControls {
    fn default() -> Self {
        Self {
            points_per_length: 24.0,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub geometry: Geometry,
    pub h: f64,
    pub field: Field,
    pub gamma: GammaSpec,
    pub alpha: f64,
    pub lambda: f64,
    #[serde(default)]
    pub grid: GridControls,
}

/// Eigenvalues are computed below this multiple of `lambda h`.
pub const THRESHOLD_FACTOR: f64 = 1.2;

impl ProblemSpec {
    pub fn disk(radius: f64, h: f64, b: f64, gamma: f64, alpha: f64, lambda: f64) -> Self {
        Self {
            geometry: Geometry::Disk { radius },
            h,
            field: Field::Constant { b },
            gamma: GammaSpec::Constant(gamma),
            alpha,
            lambda,
            grid: GridControls::default(),
        }
    }

    pub fn square(side: f64, h: f64, b: f64, lambda: f64) -> Self {
        Self {
            geometry: Geometry::Square { side },
            h,
            field: Field::Constant { b },
            gamma: GammaSpec::Constant(0.0),
            alpha: 1.0,
            lambda,
            grid: GridControls::default(),
        }
    }

    pub fn size(&self) -> f64 {
        match self.geometry {
            Geometry::Disk { radius } => radius,
            Geometry::Square { side } => side,
        }
    }

    pub fn b(&self) -> f64 {
        self.field.infimum(self.size())
    }

    /// Grid spacing from the magnetic length of the strongest field.
    pub fn spacing(&self) -> f64 {
        let bmax = match self.field {
            Field::Constant { b } => b,
            Field::RadialQuadratic { b0, b2 } => b0.max(b0 + b2 * self.size().powi(2)),
        };
        (self.h / bmax).sqrt() / self.grid.points_per_length
    }

    pub fn threshold(&self) -> f64 {
        THRESHOLD_FACTOR * self.lambda * self.h
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Err(Error::ConfigInvalid {
            field: field.into(),
            message,
        });
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad("h", format!("{} is not positive", self.h));
        }
        if !(self.size() > 0.0) {
            return bad("geometry", "size must be positive".into());
        }
        if !(self.b() > 0.0) {
            return bad("field", format!("infimum {} is not positive", self.b()));
        }
        if self.alpha < 0.5 {
            return bad("alpha", format!("{} below 1/2", self.alpha));
        }
        if !(self.lambda > 0.0) {
            return bad("lambda", format!("{} is not positive", self.lambda));
        }
        if self.grid.points_per_length < 8.0 {
            return bad(
                "grid.points_per_length",
                format!("{} resolves the magnetic length with fewer than 8 points", self.grid.points_per_length),
            );
        }
        if let GammaSpec::Samples(s) = &self.gamma {
            if s.is_empty() || s.iter().any(|g| !g.is_finite()) {
                return bad("gamma", "samples must be finite and nonempty".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Sorted eigenvalues strictly below `threshold`.
    pub eigenvalues: Vec<f64>,
    pub threshold: f64,
    pub energy: f64,
    pub count: usize,
    pub h: f64,
    pub lambda: f64,
}

impl SpectrumResult {
    pub fn new(mut eigenvalues: Vec<f64>, threshold: f64, h: f64, lambda: f64) -> Result<Self> {
        eigenvalues.retain(|&e| e < threshold);
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (energy, count) = energy_and_count(&eigenvalues, threshold, lambda, h)?;
        Ok(Self {
            eigenvalues,
            threshold,
            energy,
            count,
            h,
            lambda,
        })
    }
}

/// `E = sum (e_j - lambda h)_-` and `N = #{e_j < lambda h}` on a list that is
/// complete below `threshold`.
pub fn energy_and_count(eigenvalues: &[f64], threshold: f64, lambda: f64, h: f64) -> Result<(f64, usize)> {
    let level = lambda * h;
    if threshold <= level {
        return Err(Error::IncompleteSpectrum { threshold, level });
    }
    let below = eigenvalues.iter().filter(|&&e| e < level);
    Ok((below.clone().map(|e| level - e).sum(), below.count()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definitional_sums() {
        assert_eq!(energy_and_count(&[], 1.0, 1.0, 0.5).unwrap(), (0.0, 0));
        let h = 0.1;
        let (e, n) = energy_and_count(&[0.5 * h, 0.9 * h], 2.0 * h, 1.0, h).unwrap();
        assert!((e - 0.6 * h).abs() < 1e-15);
        assert_eq!(n, 2);
        assert!(matches!(
            energy_and_count(&[], h, 1.0, h),
            Err(Error::IncompleteSpectrum { .. })
        ));
    }

    #[test]
    fn epsilon_shift_inequality() {
        let h = 0.05;
        let list = [0.2 * h, 0.7 * h, 0.99 * h, 1.0 * h, 1.3 * h];
        let (e0, n0) = energy_and_count(&list, 2.0 * h, 1.0, h).unwrap();
        let (e1, _) = energy_and_count(&list, 2.0 * h, 1.01, h).unwrap();
        assert!(e1 - e0 >= 0.01 * h * n0 as f64 - 1e-15);
    }

    #[test]
    fn rejects_underresolved_grid() {
        let mut s = ProblemSpec::disk(1.0, 0.1, 1.0, 0.0, 1.0, 1.0);
        s.grid.points_per_length = 4.0;
        assert!(matches!(s.validate(), Err(Error::ConfigInvalid { .. })));
    }
}
