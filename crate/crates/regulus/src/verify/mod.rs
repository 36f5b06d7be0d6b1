//! The executable verification suite: one named check per identity,
//! correspondence or integrability claim, with seeded sampling and a
//! machine-readable pass/fail report.
//!
//! Checks are isolated (each builds its own inputs from its own random
//! stream) and the suite is deterministic: identical `(names, seed, trials)`
//! produce byte-identical reports.

mod checks;

use crate::error::{RegulusError, Result};
use crate::rng::Stream;
use serde::Serialize;
use std::time::Instant;

/// Result of one named check. `pass ⟺ max_residual ≤ tolerance`. The
/// wall-clock field is excluded from the serialized report so that reports
/// are byte-for-byte reproducible for a fixed seed.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub anchor: String,
    pub trials: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    #[serde(skip)]
    pub wall_s: f64,
}

/// Execution context handed to each check.
pub struct Ctx {
    pub rng: Stream,
    pub trials: u64,
}

pub(crate) struct Check {
    pub name: &'static str,
    pub anchor: &'static str,
    pub tolerance: f64,
    pub default_trials: u64,
    /// Whether the `trials` override scales this check's sampling.
    pub scalable: bool,
    pub run: fn(&mut Ctx) -> Result<f64>,
}

/// Composite checks fold secondary residuals (with their own tolerances)
/// into the primary tolerance scale, so `max_residual ≤ tolerance` still
/// means "every sub-check passed".
pub(crate) fn scaled(residual: f64, sub_tol: f64, primary_tol: f64) -> f64 {
    residual * (primary_tol / sub_tol)
}

/// Names of every registered check, in report order.
pub fn check_names() -> Vec<&'static str> {
    let mut names: Vec<&'static str> = checks::registry().iter().map(|c| c.name).collect();
    names.sort_unstable();
    names
}

/// Run the named checks (all registered checks if `names` is empty) with the
/// shared seed. `trials` overrides the per-check sample count for
/// sampling-based checks.
pub fn run_suite(names: &[String], seed: u64, trials: Option<u64>) -> Result<Vec<CheckReport>> {
    let registry = checks::registry();
    let selected: Vec<&Check> = if names.is_empty() {
        registry.iter().collect()
    } else {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let c = registry
                .iter()
                .find(|c| c.name == n.as_str())
                .ok_or_else(|| RegulusError::Usage(format!("unknown check '{n}'")))?;
            out.push(c);
        }
        out
    };
    let mut selected = selected;
    selected.sort_by_key(|c| c.name);
    selected.dedup_by_key(|c| c.name);

    let mut reports = Vec::with_capacity(selected.len());
    for check in selected {
        let n_trials = match trials {
            Some(t) if check.scalable => t,
            _ => check.default_trials,
        };
        let mut ctx = Ctx { rng: Stream::new(seed, check.name), trials: n_trials };
        let start = Instant::now();
        let max_residual = (check.run)(&mut ctx)?;
        let wall_s = start.elapsed().as_secs_f64();
        reports.push(CheckReport {
            check: check.name.to_string(),
            anchor: check.anchor.to_string(),
            trials: n_trials,
            max_residual,
            tolerance: check.tolerance,
            pass: max_residual <= check.tolerance,
            seed,
            wall_s,
        });
    }
    Ok(reports)
}

/// Serialize reports as JSON lines (one report per line, deterministic).
pub fn to_json_lines(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("report serializes"));
        out.push('\n');
    }
    out
}

/// Human-readable summary table.
pub fn summary_table(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<38} {:>9} {:>13} {:>9} {:>8} {:>9}\n",
        "check", "trials", "max residual", "tol", "status", "time"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<38} {:>9} {:>13.3e} {:>9.1e} {:>8} {:>8.2}s\n",
            r.check,
            r.trials,
            r.max_residual,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" },
            r.wall_s
        ));
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    out.push_str(&format!("{passed}/{} checks passed\n", reports.len()));
    out
}
