//! Runs every named scenario once and prints one line per criterion.
//!
//! A criterion marked unattainable is reported as FAIL without failing the
//! run; every other criterion must pass within its budget.

use std::process::ExitCode;

use torusrate::harness::{run_scenario, scenario_ids};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in scenario_ids() {
        let o = run_scenario(id).expect("known scenario");
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if o.unattainable { " [unattainable]" } else { "" };
        println!(
            "{:<4} {status}{note}  {} ({:.1}s / {:.0}s): {}",
            o.id, o.title, o.elapsed_secs, o.budget_secs, o.detail
        );
        if !o.passed && !o.unattainable {
            failed.push(o.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
