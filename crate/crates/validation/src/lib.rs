//! A minimal runner for acceptance criteria: each criterion is a closure
//! returning a [`Verdict`], printed as one `[PASS]` or `[FAIL]` line with its
//! measured values and wall time. Panics count as failures.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

/// Prints a supplementary line under a criterion.
pub fn note(id: u32, text: &str) {
    println!("       AC-{id:02} note: {text}");
}

#[derive(Debug, Default)]
pub struct Suite {
    results: Vec<(u32, bool)>,
}

fn panic_text(e: &(dyn std::any::Any + Send)) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into())
}

impl Suite {
    pub fn new() -> Self {
        Suite::default()
    }

    /// Runs one criterion. A `budget` turns an overrun into a failure.
    pub fn check<F>(&mut self, id: u32, title: &str, budget: Option<Duration>, f: F)
    where
        F: FnOnce() -> Verdict,
    {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| Verdict::new(false, format!("panicked: {}", panic_text(e.as_ref()))));
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let passed = verdict.passed && !over;
        let mut timing = format!("{:.1}s", elapsed.as_secs_f64());
        if let Some(b) = budget {
            timing.push_str(&format!(" of {:.0}s budget", b.as_secs_f64()));
        }
        println!(
            "[{}] AC-{id:02} {title}: {} ({timing})",
            if passed { "PASS" } else { "FAIL" },
            verdict.detail
        );
        self.results.push((id, passed));
    }

    pub fn info(&self, id: u32, text: &str) {
        note(id, text);
    }

    pub fn failed(&self) -> Vec<u32> {
        self.results.iter().filter(|r| !r.1).map(|r| r.0).collect()
    }

    pub fn finish(self) -> ExitCode {
        let failed = self.failed();
        let total = self.results.len();
        if failed.is_empty() {
            println!("acceptance: {total}/{total} criteria passed");
            ExitCode::SUCCESS
        } else {
            let ids: Vec<String> = failed.iter().map(|i| format!("AC-{i:02}")).collect();
            println!(
                "acceptance: {}/{total} criteria passed; failed: {}",
                total - failed.len(),
                ids.join(", ")
            );
            ExitCode::FAILURE
        }
    }
}
