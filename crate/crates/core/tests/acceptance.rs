//! Acceptance suite: runs every criterion at its pinned tolerance and
//! prints one pass/fail line per criterion.

use selfsim::verify::{run_all, summary_line};

#[test]
fn acceptance_criteria() {
    let outcomes = run_all(1);
    let mut all_ok = true;
    for o in &outcomes {
        println!("{}", summary_line(o));
        for d in &o.details {
            println!(
                "    {:6} {:<52} measured {:>12.4e}  bound {:>9.1e}",
                if d.passed { "ok" } else { "FAIL" },
                d.name,
                d.measured,
                d.bound
            );
        }
        all_ok &= o.passed;
    }
    assert!(all_ok, "one or more acceptance criteria failed");
}
