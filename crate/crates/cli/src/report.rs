//! Run reports: the config echo, checks with their thresholds, free-standing
//! measurements and the artifacts written.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use critlab::EstimateWithCI;

use crate::config::RunConfig;

/// Acceptance rule for a check's value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    AtMost(f64),
    AtLeast(f64),
    /// `|value - target| <= tol`.
    Within { target: f64, tol: f64 },
}

impl Threshold {
    pub fn accepts(&self, value: f64) -> bool {
        match *self {
            Threshold::AtMost(t) => value <= t,
            Threshold::AtLeast(t) => value >= t,
            Threshold::Within { target, tol } => (value - target).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    /// 95% interval when the value is an estimate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci: Option<(f64, f64)>,
    pub threshold: Threshold,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, threshold: Threshold) -> Self {
        Check { name: name.into(), value, std_error: None, ci: None, pass: threshold.accepts(value), threshold }
    }

    /// A boolean outcome recorded as 1 or 0 against `>= 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, if ok { 1.0 } else { 0.0 }, Threshold::AtLeast(1.0))
    }

    /// Tests the estimate's mean against `threshold` and records its error.
    pub fn estimate(name: impl Into<String>, e: &EstimateWithCI, threshold: Threshold) -> Self {
        let mut c = Check::new(name, e.mean, threshold);
        c.std_error = Some(e.std_error);
        c.ci = Some(e.interval());
        c
    }

    /// `|z|` of the estimate against `target`, required to be at most `k`.
    pub fn z_within(name: impl Into<String>, e: &EstimateWithCI, target: f64, k: f64) -> Self {
        let mut c = Check::new(name, e.z_score(target).abs(), Threshold::AtMost(k));
        c.ci = Some(e.interval());
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
}

impl Measurement {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Measurement { name: name.into(), value, std_error: None }
    }

    pub fn estimate(name: impl Into<String>, e: &EstimateWithCI) -> Self {
        Measurement { name: name.into(), value: e.mean, std_error: Some(e.std_error) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub measurements: Vec<Measurement>,
    pub artifacts: Vec<PathBuf>,
    pub passed: bool,
    /// Left out of written artifacts so they stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_s: Option<f64>,
}

impl RunReport {
    pub fn new(config: RunConfig, checks: Vec<Check>, measurements: Vec<Measurement>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        RunReport { config, checks, measurements, artifacts: Vec::new(), passed, wall_clock_s: None }
    }

    /// Recomputes every pass flag from its value and threshold.
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.pass == c.threshold.accepts(c.value)) && self.passed == self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report without timing, as written to disk.
    pub fn artifact_json(&self) -> String {
        let mut r = self.clone();
        r.wall_clock_s = None;
        r.to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert!(Threshold::AtMost(1.0).accepts(1.0));
        assert!(!Threshold::AtLeast(1.0).accepts(0.5));
        assert!(Threshold::Within { target: 0.5, tol: 0.03 }.accepts(0.52));
        assert!(!Threshold::Within { target: 0.5, tol: 0.03 }.accepts(0.54));
        assert!(!Threshold::AtMost(1.0).accepts(f64::NAN));
    }

    #[test]
    fn pass_follows_value() {
        let e = EstimateWithCI::new(0.51, 0.01, 100);
        assert!(Check::z_within("a", &e, 0.5, 3.0).pass);
        assert!(!Check::z_within("a", &e, 0.4, 3.0).pass);
        assert!(Check::flag("b", true).pass && !Check::flag("b", false).pass);
    }
}
