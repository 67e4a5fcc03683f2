//! Runs the verification suite end to end and asserts every criterion at its
//! pinned tolerance, printing one pass/fail line per criterion.

use horoforge::verify::{run_all, VerifySettings};

#[test]
fn acceptance_criteria() {
    let outcomes = run_all(&VerifySettings::default());
    let mut all = true;
    for o in &outcomes {
        println!(
            "[{}] criterion {:>2} {:<38} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.details
        );
        all &= o.passed;
    }
    assert!(all, "some acceptance criteria failed");
}
