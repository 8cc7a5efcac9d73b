use std::fmt::Write as _;
use std::path::Path;

use super::{Outcome, RunReport};
use crate::error::{Error, Result};

fn csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Human-readable table of checks and stage timings.
pub fn summary(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {:?}", report.config.kind);
    for c in &report.checks {
        let _ = writeln!(s, "  [{}] {:<48} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for st in &report.stages {
        let _ = writeln!(s, "  {:<20} {:>9.2}s", st.name, st.seconds);
    }
    let _ = writeln!(s, "result: {}", if report.passed() { "pass" } else { "fail" });
    s
}

/// Writes `report.toml`, `summary.txt` and the data files of the outcome.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = toml::to_string(report).map_err(|e| Error::Numerical(format!("report serialization: {e}")))?;
    std::fs::write(dir.join("report.toml"), text)?;
    std::fs::write(dir.join("summary.txt"), summary(report))?;
    if let Some(t) = &report.table {
        t.write(&dir.join("bands.dat"))?;
    }
    match &report.outcome {
        Outcome::DiskConverge(r) => {
            let rows = r.points.iter().map(|p| {
                format!(
                    "{},{},{},{},{},{},{}",
                    p.h,
                    p.energy,
                    p.count,
                    p.scaled_energy,
                    p.scaled_count,
                    p.energy_error.map_or(String::new(), |e| e.to_string()),
                    p.count_error.map_or(String::new(), |e| e.to_string())
                )
            });
            std::fs::write(
                dir.join("convergence.csv"),
                csv("h,energy,count,scaled_energy,scaled_count,energy_error,count_error", rows),
            )?;
        }
        Outcome::SquareCount { points, .. } => {
            let rows = points
                .iter()
                .map(|p| format!("{},{},{},{},{}", p.h, p.count, p.h_count, p.lower, p.upper));
            std::fs::write(dir.join("square_count.csv"), csv("h,count,h_count,lower,upper", rows))?;
        }
        Outcome::Validate { criteria } => {
            let rows = criteria
                .iter()
                .map(|c| format!("{},{},{},{:.3}", c.id, c.name, c.passed, c.seconds));
            std::fs::write(dir.join("criteria.csv"), csv("id,name,passed,seconds", rows))?;
        }
        _ => {}
    }
    Ok(())
}
