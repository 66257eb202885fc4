//! Acceptance suite: each criterion runs its built-in preset at the pinned
//! tolerances and prints one PASS/FAIL line. Exits non-zero if any fails.
//!
//! `cargo test --test acceptance -- <filter>` runs the criteria whose preset
//! name contains the filter.

use std::process::ExitCode;
use std::time::Instant;

use witten_lab::experiments::evaluate;
use witten_lab::experiments::preset;

const CRITERIA: &[(usize, &str, f64)] = &[
    (1, "warped-identities", 5.0),
    (2, "entropy-dissipation", 30.0),
    (3, "w-entropy", 30.0),
    (4, "super-flow-monotonicity", 60.0),
    (5, "gaussian-baseline", 60.0),
    (6, "k-variants", 60.0),
    (7, "lott-flow", 120.0),
    (8, "log-sobolev", 120.0),
    (9, "convergence-orders", 120.0),
];

fn criterion(number: usize, name: &str, budget: f64) -> bool {
    let config = preset(name).expect("preset exists");
    let started = Instant::now();
    let outcome = evaluate(&config);
    let elapsed = started.elapsed().as_secs_f64();
    let over = if elapsed > budget { " OVER BUDGET" } else { "" };
    match outcome {
        Ok(outcome) => {
            let passed = outcome.passed() && elapsed <= budget;
            let status = if passed { "PASS" } else { "FAIL" };
            println!("criterion {number} [{name}]: {status} ({elapsed:.1} s of {budget} s{over})");
            for c in &outcome.report.verdict.checks {
                let mark = if c.passed { "ok" } else { "FAILED" };
                println!("    {:<32} {:>12.4e} vs {:>9.2e}  {mark}  {}", c.name, c.measured, c.tolerance, c.detail);
            }
            passed
        }
        Err(e) => {
            println!("criterion {number} [{name}]: FAIL ({elapsed:.1} s): {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let selected: Vec<_> =
        CRITERIA.iter().filter(|(_, name, _)| filter.as_deref().is_none_or(|f| name.contains(f))).collect();
    let failed: Vec<usize> =
        selected.iter().filter(|(n, name, budget)| !criterion(*n, name, *budget)).map(|c| c.0).collect();
    println!("acceptance: {} of {} criteria passed", selected.len() - failed.len(), selected.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
