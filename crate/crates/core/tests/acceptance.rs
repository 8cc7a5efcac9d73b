//! The twelve acceptance criteria at full budget. Run with `--nocapture` to
//! see the per-criterion lines.

use magrobin::harness::criteria::{criterion, BandReference, NAMES};
use magrobin::harness::Budget;

// Minimum of the Neumann band and its minimizer, from the zero of the
// derivative of the parabolic cylinder function at 40 digits (mpmath).
const THETA0: f64 = 0.590_106_124_950_234_128_728;
const XI0: f64 = 0.768_183_653_139_165_757_351;

#[test]
fn frozen_reference_matches_library_constant() {
    assert_eq!(BandReference::FROZEN.theta0, THETA0);
    assert_eq!(BandReference::FROZEN.xi0, XI0);
}

#[test]
fn acceptance_criteria() {
    let reference = BandReference {
        theta0: THETA0,
        xi0: XI0,
    };
    let outcomes: Vec<_> = (1..=NAMES.len() as u8)
        .map(|id| {
            let c = criterion(id, Budget::Full, &reference);
            println!("{}", c.line());
            c
        })
        .collect();
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.id, c.detail))
        .collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {}", failed.join("; "));
}
