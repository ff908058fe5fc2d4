//! Acceptance gate: runs every release criterion and prints one pass/fail
//! line per criterion. The suite fails if any criterion fails.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use bosim::acceptance::{criterion_ids, run_all, AcceptanceParams};

#[test]
fn acceptance_criteria() {
    let reports = run_all(&AcceptanceParams::default());
    for report in &reports {
        println!("{report}");
    }

    assert_eq!(
        reports.iter().map(|r| r.id).collect::<Vec<_>>(),
        criterion_ids(),
        "every criterion must report exactly once, in order"
    );

    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
