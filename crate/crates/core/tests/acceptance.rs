//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

use std::process::ExitCode;

use qcm_core::selftest;

fn main() -> ExitCode {
    let results = selftest::run_all();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
