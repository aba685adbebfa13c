//! Runs the twelve acceptance criteria and prints one line each.
//!
//! Set `SPDELAB_ONLY=1,4,7` to run a subset. The process fails on any
//! unexpected check failure or runtime budget overrun; the checks listed in
//! `verify::EXPECTED_FAILURES` are reported as XFAIL.

use spdelab::verify::{run, EXPECTED_FAILURES};
use std::process::ExitCode;

fn main() -> ExitCode {
    let only: Option<Vec<u8>> = std::env::var("SPDELAB_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let ids: Vec<u8> = (1..=12).filter(|i| only.as_ref().map_or(true, |o| o.contains(i))).collect();
    println!("running {} acceptance criteria; expected failures: {:?}", ids.len(), EXPECTED_FAILURES);
    let mut bad = 0;
    for id in ids {
        let r = run(id);
        println!("{}", r.line());
        if !r.within_budget() {
            println!("     criterion {id} exceeded its runtime budget");
        }
        if !r.ok() || !r.within_budget() {
            bad += 1;
        }
    }
    if bad == 0 {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {bad} criteria with unexpected failures");
        ExitCode::FAILURE
    }
}
