//! Acceptance suite. Prints one line per criterion followed by its checks,
//! and exits non-zero if any asserted check fails. Report-only criteria
//! print their measurements but only fail on their asserted checks.
//!
//! `cargo test -p excl-core --test acceptance -- 4 9` runs a subset.

use std::process::ExitCode;
use std::time::Instant;

use excl_core::verify::{self, Status, SuiteOptions};

fn criterion(id: u8) -> bool {
    let start = Instant::now();
    let out = match verify::run(id, &SuiteOptions::default()) {
        Ok(o) => o,
        Err(e) => {
            println!("criterion {id:>2} FAIL   error: {e}");
            return false;
        }
    };
    let tag = match out.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Report => "REPORT",
    };
    println!(
        "criterion {:>2} {:<6} {:<32} {} [{:.1}s]",
        id,
        tag,
        out.name,
        out.summary(),
        start.elapsed().as_secs_f64()
    );
    for c in &out.checks {
        println!("    {} {:.6e} (limit {:.6e}{})", c.what, c.measured, c.limit, if c.asserted { "" } else { ", reported" });
    }
    for n in &out.notes {
        println!("    note: {n}");
    }
    out.status != Status::Fail
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture or --quiet are accepted and ignored
    let picked: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u8> = if picked.is_empty() {
        (1..=verify::CRITERIA).collect()
    } else {
        picked
    };
    let mut failed = Vec::new();
    for id in ids {
        if !criterion(id) {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED criteria {failed:?}");
        ExitCode::FAILURE
    }
}
