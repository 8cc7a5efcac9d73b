//! Neumann magnetic square in the Landau gauge `A = (-b x2, 0)`.

use num_complex::Complex64;

use super::{Field, Geometry, ProblemSpec, SpectrumResult};
use crate::error::{Error, Result};
use crate::linalg::{count_below, eigenvalues_below, BandedHermitian, LanczosOptions, Mass, TripletBuilder};

/// Five-point form on the vertex grid, half cells along the edges, `x1`
/// fastest. The Neumann condition is the natural one of the form.
pub fn assemble_square(h: f64, b: f64, side: f64, cells: usize) -> (BandedHermitian<Complex64>, Mass<Complex64>) {
    let m = cells + 1;
    let d = side / cells as f64;
    let edge = |i: usize| if i == 0 || i == cells { 0.5 } else { 1.0 };
    let idx = |i: usize, j: usize| j * m + i;
    let mut tb = TripletBuilder::new(m * m);
    let mut mass = vec![0.0; m * m];
    for j in 0..m {
        let x2 = j as f64 * d;
        let phase = Complex64::from_polar(1.0, -b * x2 * d / h);
        for i in 0..m {
            let p = idx(i, j);
            mass[p] = d * d * edge(i) * edge(j);
            if i + 1 < m {
                tb.add_link(p, idx(i + 1, j), h * h * edge(j), phase);
            }
            if j + 1 < m {
                tb.add_link(p, idx(i, j + 1), h * h * edge(i), Complex64::new(1.0, 0.0));
            }
        }
    }
    (tb.build_with_bandwidth(m), Mass::Diagonal(mass))
}

fn square_cells(spec: &ProblemSpec, side: f64) -> usize {
    (side / spec.spacing()).ceil() as usize
}

/// Eigenvalues below `THRESHOLD_FACTOR * lambda * h`; the count below
/// `lambda h` comes straight from the inertia of the shifted pencil.
pub fn square_solve(spec: &ProblemSpec) -> Result<SpectrumResult> {
    spec.validate()?;
    let Geometry::Square { side } = spec.geometry else {
        return Err(Error::InvalidArgument("square solve needs a square".into()));
    };
    let Field::Constant { b } = spec.field else {
        return Err(Error::InvalidArgument("square solve needs a constant field".into()));
    };
    if spec.gamma.constant() != Some(0.0) {
        return Err(Error::InvalidArgument("square solve is Neumann only".into()));
    }
    let cells = square_cells(spec, side);
    let opts = LanczosOptions::default();
    let threshold = spec.threshold();
    let (a, m) = assemble_square(spec.h, b, side, cells);
    let s = eigenvalues_below(&a, &m, threshold, &opts)?;
    let level_count = count_below(&a, &m, spec.lambda * spec.h);
    if spec.grid.refine && cells >= 16 {
        let (ac, mc) = assemble_square(spec.h, b, side, cells / 2);
        let c = eigenvalues_below(&ac, &mc, threshold * 1.1, &opts)?;
        let scale = spec.lambda * spec.h;
        let change = s
            .values
            .iter()
            .zip(&c.values)
            .take(10)
            .map(|(f, c)| (f - c).abs() / f.abs().max(scale))
            .fold(0.0, f64::max);
        if change > 5e-3 {
            return Err(Error::GridTooCoarse(format!(
                "lowest square eigenvalues move by {change:.2e} under refinement"
            )));
        }
    }
    let r = SpectrumResult::new(s.values, threshold, spec.h, spec.lambda)?;
    if r.count != level_count {
        return Err(Error::Numerical(format!(
            "eigensolver found {} values below lambda h, inertia says {level_count}",
            r.count
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_square_has_neumann_spectrum() {
        // b = 0 limit: h^2 pi^2 (k^2 + l^2); the constant mode is exact
        let h = 0.5;
        let (a, m) = assemble_square(h, 0.0, 1.0, 40);
        let s = eigenvalues_below(&a, &m, 1.1 * h * h * std::f64::consts::PI.powi(2), &LanczosOptions::default()).unwrap();
        assert_eq!(s.values.len(), 3);
        assert!(s.values[0].abs() < 1e-10);
        let lam = h * h * std::f64::consts::PI.powi(2);
        assert!((s.values[1] / lam - 1.0).abs() < 1e-3);
    }
}
