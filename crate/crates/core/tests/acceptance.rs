//! Plain harness so the pass/fail lines are always printed.

use std::process::ExitCode;

use csck_core::verify::{run_all, CRITERIA};

fn main() -> ExitCode {
    let results = run_all();
    for r in &results {
        println!("{r}");
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", CRITERIA.len());
    if passed == CRITERIA.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
