use std::time::Instant;

use bvlab::harness::{verify, verify_with, Selection, Suite};
use bvlab::problem::FluxShape;
use bvlab::scheme::{godunov, NumericalFlux};

/// Godunov with its sign flipped.
struct Flipped;

impl NumericalFlux for Flipped {
    fn eval(&self, shape: FluxShape, xi: f64, a: f64, b: f64) -> f64 {
        -godunov(shape, xi, a, b)
    }

    fn name(&self) -> &'static str {
        "flipped"
    }
}

#[test]
fn all_suites_pass_with_named_anchored_checks() {
    let report = verify(Selection::All);
    assert!(report.checks.len() >= 25, "{}", report.checks.len());
    assert!(report.passed(), "{report}");
    for suite in Suite::ALL {
        assert!(report.checks.iter().any(|c| c.suite == suite));
    }
    let mut names: Vec<&str> = report.checks.iter().map(|c| c.name).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), report.checks.len());
    assert!(report.checks.iter().all(|c| !c.anchor.is_empty() && c.value.is_finite()));
}

#[test]
fn geometry_suite_is_fast() {
    let start = Instant::now();
    assert!(verify(Selection::One(Suite::Geometry)).passed());
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn flipped_flux_fails_the_entropy_suite() {
    let report = verify_with(Selection::One(Suite::Entropy), &Flipped);
    assert!(!report.passed());
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    assert!(failed.contains(&"numerical_flux_monotone"), "{failed:?}");
    assert!(failed.contains(&"entropy_cells"), "{failed:?}");
    assert!(report.to_string().contains("FAIL entropy/entropy_cells"));
}
