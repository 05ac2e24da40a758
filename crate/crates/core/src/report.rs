//! Verification reports: typed checks with pinned tolerances, deterministic
//! JSON serialization (sorted keys, no timestamps), and one-line summaries.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::calculus::ConvergenceEstimate;
use crate::error::Result;
use crate::observables::ConventionSignature;
use crate::snapshot::to_sorted_json;

/// One verification check: a measured number against a pinned tolerance,
/// optionally carrying a convergence slope.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// The measured quantity: a defect/discrepancy for bound checks, the
    /// slope itself for convergence checks, zero for exact hits.
    pub measured: f64,
    /// The binding bound: upper bound for defects, lower edge for slopes.
    pub tolerance: f64,
    /// Convergence slope when the check is a refinement study.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    /// True when every refinement level sat at the round-off floor, so no
    /// slope was measurable (counts as passing a slope requirement).
    pub exact: bool,
    pub passed: bool,
    /// Short context: reference values, study protocol, etc.
    pub note: String,
}

impl Check {
    /// Defect-style check: passes when `measured <= tolerance` (and finite).
    pub fn max_below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance,
            slope: None,
            exact: false,
            passed: measured.is_finite() && measured <= tolerance,
            note: String::new(),
        }
    }

    /// Visibility check: passes when `measured >= floor` (and finite). Used
    /// to certify that a quantity claimed to be genuinely nonzero is so.
    pub fn min_above(name: &str, measured: f64, floor: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance: floor,
            slope: None,
            exact: false,
            passed: measured.is_finite() && measured >= floor,
            note: "lower bound: the measured value must exceed the tolerance".into(),
        }
    }

    /// Agreement check: passes when `|measured - reference| <= tolerance`.
    pub fn equals_within(name: &str, measured: f64, reference: f64, tolerance: f64) -> Self {
        let gap = (measured - reference).abs();
        Self {
            name: name.to_string(),
            measured: gap,
            tolerance,
            slope: None,
            exact: false,
            passed: gap.is_finite() && gap <= tolerance,
            note: format!("measured {measured:.6e} against reference {reference:.6e}"),
        }
    }

    /// Convergence check: the estimated order must be at least `floor`.
    /// Residuals that sat at the round-off floor everywhere pass as exact.
    pub fn slope_at_least(name: &str, estimate: &ConvergenceEstimate, floor: f64) -> Self {
        Self::slope_within(name, estimate, floor, f64::INFINITY)
    }

    /// Convergence check with a two-sided order window `[lo, hi]`.
    pub fn slope_within(name: &str, estimate: &ConvergenceEstimate, lo: f64, hi: f64) -> Self {
        match estimate {
            ConvergenceEstimate::Exact => Self {
                name: name.to_string(),
                measured: 0.0,
                tolerance: lo,
                slope: None,
                exact: true,
                passed: true,
                note: "residual at the round-off floor at every resolution".into(),
            },
            ConvergenceEstimate::Order(p) => Self {
                name: name.to_string(),
                measured: *p,
                tolerance: lo,
                slope: Some(*p),
                exact: false,
                passed: p.is_finite() && *p >= lo && *p <= hi,
                note: if hi.is_finite() {
                    format!("order window [{lo}, {hi}]")
                } else {
                    format!("order at least {lo}")
                },
            },
        }
    }

    /// Attaches a context note, replacing any constructor-provided one.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// One human-readable line, `PASS`/`FAIL` first.
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let detail = match (self.exact, self.slope) {
            (true, _) => "exact to round-off".to_string(),
            (false, Some(p)) => format!("slope {p:.3} (floor {:.2})", self.tolerance),
            (false, None) => format!(
                "measured {:.3e} (tolerance {:.3e})",
                self.measured, self.tolerance
            ),
        };
        format!("{status} {:<52} {detail}", self.name)
    }
}

/// A suite run: environment, calibration signature, and the check list.
/// Serializes deterministically for byte-identical reruns.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub resolutions: Vec<usize>,
    pub tolerance_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<ConventionSignature>,
    /// Free-form deterministic run parameters (time steps, scenario names).
    pub environment: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(suite: &str, resolutions: &[usize], tolerance_scale: f64) -> Self {
        Self {
            suite: suite.to_string(),
            resolutions: resolutions.to_vec(),
            tolerance_scale,
            signature: None,
            environment: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn note_env(&mut self, key: &str, value: impl ToString) {
        self.environment.insert(key.to_string(), value.to_string());
    }

    /// Folds another suite's results in, prefixing check names and
    /// environment keys with that suite's name.
    pub fn merge(&mut self, other: VerificationReport) {
        for mut check in other.checks {
            check.name = format!("{}/{}", other.suite, check.name);
            self.push(check);
        }
        for (k, v) in other.environment {
            self.environment.insert(format!("{}.{k}", other.suite), v);
        }
        if self.signature.is_none() {
            self.signature = other.signature;
        }
    }

    /// Deterministic JSON: sorted keys, pretty-printed, trailing newline.
    pub fn to_json(&self) -> Result<String> {
        to_sorted_json(self)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.checks.iter().map(Check::summary_line).collect();
        lines.push(format!(
            "{}: suite {} ({} checks)",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.checks.len()
        ));
        lines
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}
