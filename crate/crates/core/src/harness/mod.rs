//! Configuration-driven runs and the validation suite.
//!
//! A run reads a [`RunConfig`] (TOML), executes one experiment, and writes a
//! structured report (`report.toml`), a human summary (`summary.txt`) and the
//! experiment's data files into the output directory.

pub mod criteria;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::band1d::{band_table, mu, BandTable, DirectBands, HalfLineDiscretization, RobinOscillatorParams};
use crate::error::{Error, Result};
use crate::geometry::BoundaryCurve;
use crate::model_spectra::{
    dirichlet_square_count, lt_bound_check, nu_b, torus_landau_spectrum, BoundaryPotential, LtCheck, LtGrid,
    SquareGrid, TorusGrid, TorusModel,
};
use crate::semiclassical::{count_limit, energy_limit, FieldOnBoundary, LimitResult, RobinTrace};
use crate::solver2d::{
    convergence_study, square_solve, ConvergenceReport, Field, GammaSpec, Geometry, GridControls, LimitValues,
    ProblemSpec,
};

pub use criteria::{BandReference, CriterionOutcome};
pub use report::{summary, write_report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Band,
    Limits,
    Models,
    DiskConverge,
    SquareCount,
    LtCheck,
    Validate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    #[default]
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub b: f64,
    /// Constant coupling, or samples through `gamma_samples`.
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_samples: Option<Vec<f64>>,
    pub alpha: f64,
    pub lambda: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            b: 1.0,
            gamma: 0.0,
            gamma_samples: None,
            alpha: 1.0,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Quadrature tolerance of the limit functionals.
    pub limit: f64,
    /// Largest accepted relative error at the smallest `h` of a study.
    pub final_error: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            limit: 1e-8,
            final_error: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub gamma_grid: Vec<f64>,
    /// `[start, stop, step]`
    pub xi_range: [f64; 3],
    pub p_max: usize,
    #[serde(default)]
    pub disc: Option<HalfLineDiscretization>,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            gamma_grid: vec![-1.0, 0.0],
            xi_range: [-4.0, 6.0, 0.25],
            p_max: 4,
            disc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    pub torus_flux: Vec<usize>,
    pub torus_spacing: f64,
    /// `(Lambda, R)` pairs for the Dirichlet square.
    pub square_counts: Vec<(f64, f64)>,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            torus_flux: vec![5],
            torus_spacing: 0.05,
            square_counts: vec![(1.0, 10.0), (2.9, 10.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default = "default_geometry")]
    pub geometry: Geometry,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub grid: GridControls,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub band: BandConfig,
    #[serde(default)]
    pub models: ModelsConfig,
}

fn default_geometry() -> Geometry {
    Geometry::Disk { radius: 1.0 }
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        field: field.into(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Defaults for each experiment; the disk study runs the Robin disk.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut c = Self {
            kind,
            out: None,
            budget: Budget::Quick,
            geometry: default_geometry(),
            physics: Physics::default(),
            h_list: vec![],
            grid: GridControls::default(),
            tolerances: Tolerances::default(),
            band: BandConfig::default(),
            models: ModelsConfig::default(),
        };
        match kind {
            ExperimentKind::DiskConverge => {
                c.physics.gamma = -1.0;
                c.physics.alpha = 0.5;
                c.h_list = vec![0.1, 0.05, 0.025];
            }
            ExperimentKind::SquareCount => {
                c.geometry = Geometry::Square { side: 1.0 };
                c.h_list = vec![0.04, 0.02, 0.01];
                c.grid.points_per_length = 10.0;
                c.grid.refine = false;
            }
            ExperimentKind::Limits => c.physics.lambda = 0.9,
            _ => {}
        }
        c
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| invalid("config", e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Numerical(format!("config serialization: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.physics;
        for (name, v) in [("physics.b", p.b), ("physics.lambda", p.lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} is not positive")));
            }
        }
        if !p.gamma.is_finite() {
            return Err(invalid("physics.gamma", "not finite"));
        }
        if p.alpha < 0.5 {
            return Err(invalid("physics.alpha", format!("{} below 1/2", p.alpha)));
        }
        for (name, v) in [("tolerances.limit", self.tolerances.limit), ("tolerances.final_error", self.tolerances.final_error)] {
            if !(v > 0.0) {
                return Err(invalid(name, format!("{v} is not positive")));
            }
        }
        if self.h_list.iter().any(|h| !(*h > 0.0)) || self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("h_list", "must be positive and strictly decreasing"));
        }
        match self.kind {
            ExperimentKind::DiskConverge if !matches!(self.geometry, Geometry::Disk { .. }) => {
                return Err(invalid("geometry", "disk-converge needs a disk"));
            }
            ExperimentKind::SquareCount if !matches!(self.geometry, Geometry::Square { .. }) => {
                return Err(invalid("geometry", "square-count needs a square"));
            }
            ExperimentKind::DiskConverge | ExperimentKind::SquareCount if self.h_list.is_empty() => {
                return Err(invalid("h_list", "empty"));
            }
            _ => {}
        }
        let [lo, hi, step] = self.band.xi_range;
        if !(step > 0.0 && hi > lo) {
            return Err(invalid("band.xi_range", "needs start < stop and a positive step"));
        }
        if self.band.p_max == 0 {
            return Err(invalid("band.p_max", "must be at least 1"));
        }
        if let Some(d) = &self.band.disc {
            d.validate().map_err(|e| invalid("band.disc", e.to_string()))?;
        }
        self.spec(self.h_list.first().copied().unwrap_or(0.1)).validate()
    }

    /// The solver problem at semiclassical parameter `h`.
    pub fn spec(&self, h: f64) -> ProblemSpec {
        let p = &self.physics;
        ProblemSpec {
            geometry: self.geometry,
            h,
            field: Field::Constant { b: p.b },
            gamma: match &p.gamma_samples {
                Some(s) => GammaSpec::Samples(s.clone()),
                None => GammaSpec::Constant(p.gamma),
            },
            alpha: p.alpha,
            lambda: p.lambda,
            grid: self.grid,
        }
    }

    fn disc(&self) -> HalfLineDiscretization {
        self.band.disc.unwrap_or_default()
    }
}

/// A pass/fail flag tied to a named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitsOutcome {
    pub energy: LimitResult,
    pub count: Option<LimitResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusOutcome {
    pub flux: usize,
    pub multiplicity: usize,
    pub cluster_value: f64,
    pub next_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareOutcome {
    pub lambda: f64,
    pub r: f64,
    pub count: usize,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareCountPoint {
    pub h: f64,
    pub count: usize,
    pub h_count: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Band { anchor_mu1: f64, nodes: usize },
    Limits(LimitsOutcome),
    Models { torus: Vec<TorusOutcome>, square: Vec<SquareOutcome> },
    DiskConverge(ConvergenceReport),
    SquareCount { points: Vec<SquareCountPoint>, c_fit: f64, target: f64 },
    LtCheck(LtCheck),
    Validate { criteria: Vec<CriterionOutcome> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub outcome: Outcome,
    pub checks: Vec<Check>,
    pub stages: Vec<Stage>,
    /// Band table of a `band` run, written to its own file.
    #[serde(skip)]
    pub table: Option<BandTable>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Clock {
    stages: Vec<Stage>,
    t: Instant,
}

impl Clock {
    fn new() -> Self {
        Self {
            stages: vec![],
            t: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        self.stages.push(Stage {
            name: name.into(),
            seconds: self.t.elapsed().as_secs_f64(),
        });
        self.t = Instant::now();
    }
}

/// Runs the configured experiment. Results are written only when
/// `config.out` is set.
pub fn run_experiment(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let mut clock = Clock::new();
    let mut checks = Vec::new();
    let mut table = None;
    let outcome = match config.kind {
        ExperimentKind::Band => {
            let b = &config.band;
            let [lo, hi, step] = b.xi_range;
            let n = ((hi - lo) / step).round() as usize;
            let xi: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
            let t = band_table(&b.gamma_grid, &xi, b.p_max, &config.disc())?;
            clock.lap("band table");
            let anchor = mu(1, RobinOscillatorParams::new(0.0, 0.0), &config.disc())?;
            checks.push(Check::new(
                "mu_1(0,0) = 1",
                (anchor - 1.0).abs() <= 1e-7,
                format!("{anchor:.12}"),
            ));
            let nodes = t.mu.len();
            table = Some(t);
            Outcome::Band { anchor_mu1: anchor, nodes }
        }
        ExperimentKind::Limits => {
            let p = &config.physics;
            let curve = match config.geometry {
                Geometry::Disk { radius } => BoundaryCurve::circle(radius, 256)?,
                Geometry::Square { .. } => return Err(invalid("geometry", "limits need a smooth boundary")),
            };
            let field = FieldOnBoundary::constant(p.b, curve.len())?;
            let trace = match &p.gamma_samples {
                Some(s) if s.len() == curve.len() => RobinTrace::bounded(s.clone(), curve.spacing())?,
                Some(_) => return Err(invalid("physics.gamma_samples", format!("need {} samples", curve.len()))),
                None => RobinTrace::constant(p.gamma, &curve)?,
            };
            let bands = DirectBands::new(8, config.disc());
            let tol = config.tolerances.limit;
            let energy = energy_limit(&curve, &field, &trace, p.lambda, p.alpha, &bands, tol)?;
            clock.lap("energy limit");
            let count = if p.lambda < p.b {
                Some(count_limit(&curve, &field, &trace, p.lambda, p.alpha, &bands, tol)?)
            } else {
                None
            };
            clock.lap("count limit");
            checks.push(Check::new(
                "energy limit finite",
                energy.value.is_finite() && energy.value >= 0.0,
                format!("{:.10}", energy.value),
            ));
            Outcome::Limits(LimitsOutcome { energy, count })
        }
        ExperimentKind::Models => {
            let m = &config.models;
            let mut torus = Vec::new();
            for &n in &m.torus_flux {
                let s = torus_landau_spectrum(&TorusModel::with_flux(n), n + 1, &TorusGrid { spacing: m.torus_spacing })?;
                let o = TorusOutcome {
                    flux: n,
                    multiplicity: s.clusters[0].multiplicity,
                    cluster_value: s.clusters[0].value,
                    next_eigenvalue: s.eigenvalues[n],
                };
                checks.push(Check::new(
                    &format!("torus n={n} multiplicity"),
                    o.multiplicity == n,
                    format!("{} at {:.6}", o.multiplicity, o.cluster_value),
                ));
                torus.push(o);
            }
            clock.lap("torus");
            let mut square = Vec::new();
            for &(lambda, r) in &m.square_counts {
                let count = dirichlet_square_count(lambda, r, &SquareGrid::default())?;
                let upper_bound = r * r * nu_b(lambda);
                checks.push(Check::new(
                    &format!("Dirichlet square N({lambda}, {r}) <= R^2 nu_b + 1"),
                    count as f64 <= upper_bound + 1.0,
                    format!("{count} vs {upper_bound:.3}"),
                ));
                square.push(SquareOutcome {
                    lambda,
                    r,
                    count,
                    upper_bound,
                });
            }
            clock.lap("Dirichlet square");
            Outcome::Models { torus, square }
        }
        ExperimentKind::DiskConverge => {
            let spec = config.spec(config.h_list[0]);
            let p = &config.physics;
            let (Geometry::Disk { radius }, GammaSpec::Constant(gamma)) = (spec.geometry, &spec.gamma) else {
                return Err(invalid("physics.gamma", "disk-converge needs a constant coupling"));
            };
            let curve = BoundaryCurve::circle(radius, 256)?;
            let field = FieldOnBoundary::constant(p.b, curve.len())?;
            let trace = RobinTrace::constant(*gamma, &curve)?;
            let bands = DirectBands::new(8, config.disc());
            let tol = config.tolerances.limit;
            let energy = energy_limit(&curve, &field, &trace, p.lambda, p.alpha, &bands, tol)?.value;
            let count = if p.lambda < p.b {
                Some(count_limit(&curve, &field, &trace, p.lambda, p.alpha, &bands, tol)?.value)
            } else {
                None
            };
            clock.lap("limits");
            let budget = match config.budget {
                Budget::Quick => std::time::Duration::from_secs(300),
                Budget::Full => std::time::Duration::from_secs(3600),
            };
            let r = convergence_study(&spec, &config.h_list, LimitValues { energy: Some(energy), count }, Some(budget))?;
            clock.lap("study");
            let bound = config.tolerances.final_error;
            for (name, errs) in [("energy", r.energy_errors()), ("count", r.count_errors())] {
                if errs.is_empty() {
                    continue;
                }
                let ok = !r.budget_exceeded
                    && errs.windows(2).all(|w| w[1] < w[0])
                    && errs.last().is_some_and(|e| *e <= bound);
                checks.push(Check::new(
                    &format!("{name} error decreasing, final <= {bound}"),
                    ok,
                    format!("{errs:.4?}"),
                ));
            }
            Outcome::DiskConverge(r)
        }
        ExperimentKind::SquareCount => {
            let tau = 2.0 * std::f64::consts::PI;
            let flux = config.physics.b * config.spec(1.0).size().powi(2);
            let target = flux / tau;
            // squared side in magnetic units
            let t2 = |h: f64| flux / h;
            let mut points = Vec::new();
            for &h in &config.h_list {
                let r = square_solve(&config.spec(h))?;
                points.push(SquareCountPoint {
                    h,
                    count: r.count,
                    h_count: h * r.count as f64,
                    lower: (t2(h) / tau).floor(),
                    upper: 0.0,
                });
            }
            clock.lap("square solves");
            // the upper constant is fitted at the first size and reused
            let p0 = &points[0];
            let c_fit = (p0.count as f64 - t2(p0.h) / tau) / t2(p0.h).sqrt();
            for p in &mut points {
                p.upper = t2(p.h) / tau + c_fit * t2(p.h).sqrt();
                let n = p.count as f64;
                checks.push(Check::new(
                    &format!("h={} bracket", p.h),
                    n >= p.lower && n <= p.upper,
                    format!("{} <= {} <= {:.2}", p.lower, p.count, p.upper),
                ));
            }
            let last = points.last().unwrap();
            let err = (last.h_count - target).abs() / target;
            checks.push(Check::new(
                "h N near b|Omega|/(2 pi)",
                err <= config.tolerances.final_error,
                format!("{:.4} vs {target:.4}", last.h_count),
            ));
            Outcome::SquareCount { points, c_fit, target }
        }
        ExperimentKind::LtCheck => {
            let p = &config.physics;
            let potential = match &p.gamma_samples {
                Some(g) => {
                    let n = g.len();
                    let s: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1).max(1) as f64).collect();
                    BoundaryPotential::Samples { s, gamma: g.clone() }
                }
                None => BoundaryPotential::Bump {
                    height: p.gamma,
                    half_width: 1.0,
                    smoothing: 0.1,
                },
            };
            let c = lt_bound_check(p.alpha, 1, &potential, &LtGrid::default())?;
            clock.lap("strip eigensolve");
            checks.push(Check::new("tr H_-^alpha <= 2 L^cl int gamma_+^(2 alpha + 1)", c.holds, format!("{:.6} <= {:.6}", c.lhs, c.rhs)));
            Outcome::LtCheck(c)
        }
        ExperimentKind::Validate => {
            let criteria = criteria::all_criteria(config.budget, &BandReference::FROZEN);
            clock.lap("criteria");
            for c in &criteria {
                checks.push(Check::new(&format!("criterion {}: {}", c.id, c.name), c.passed, c.detail.clone()));
            }
            Outcome::Validate { criteria }
        }
    };
    let report = RunReport {
        config: config.clone(),
        outcome,
        checks,
        stages: clock.stages,
        table,
    };
    if let Some(dir) = &config.out {
        write_report(&report, dir)?;
    }
    Ok(report)
}

/// The acceptance suite at the given budget.
pub fn validate_all(budget: Budget) -> Result<RunReport> {
    let mut config = RunConfig::new(ExperimentKind::Validate);
    config.budget = budget;
    run_experiment(&config)
}
