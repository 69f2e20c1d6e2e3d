//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = 0;
    for outcome in cxhyp::selftest::run_all() {
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
