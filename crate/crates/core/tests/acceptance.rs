//! One PASS/FAIL line per acceptance criterion, followed by its metrics.
//! Tolerances are pinned in `ymhlab::suites`.

use std::io::Write;

use ymhlab::suites::{run_criterion, Settings};

// Written through the raw handle, which the harness does not capture, so
// the verdicts show up in ordinary `cargo test` logs.
macro_rules! report {
    ($($t:tt)*) => {{
        let mut out = std::io::stdout().lock();
        writeln!(out, $($t)*).unwrap();
        out.flush().unwrap();
    }};
}

const SEED: u64 = 20240611;

#[test]
fn acceptance() {
    let settings = Settings::new(SEED);
    let mut failed = Vec::new();
    for id in 1..=9 {
        let run = match run_criterion(id, &settings) {
            Ok(r) => r,
            Err(e) => {
                report!("FAIL criterion {id}: error {e}");
                failed.push(id);
                continue;
            }
        };
        let verdict = if run.pass() { "PASS" } else { "FAIL" };
        let budget = run.budget.map_or(String::new(), |b| format!(" (budget {b} s)"));
        report!("{verdict} criterion {id} [{}] {:.1} s{budget}", run.title, run.seconds);
        for (name, m) in &run.output.metrics {
            let mark = if m.pass { "ok " } else { "BAD" };
            report!("    {mark} {name} = {:.4e} (tolerance {:e})", m.value, m.tolerance);
        }
        if !run.pass() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
