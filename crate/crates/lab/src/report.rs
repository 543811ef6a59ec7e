//! Scenario outcomes and the files written for them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;

/// Status written when a scenario produced no checks.
pub const NO_CHECKS: &str = "no checks run";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    /// `value ≤ bound`.
    pub fn at_most(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass: value <= bound,
            value,
            bound,
            detail: detail.into(),
        }
    }

    /// `value ≥ bound`.
    pub fn at_least(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass: value >= bound,
            value,
            bound,
            detail: detail.into(),
        }
    }

    pub fn failed(name: &str, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass: false,
            value: f64::NAN,
            bound: f64::NAN,
            detail: detail.into(),
        }
    }
}

/// A file produced by a scenario, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, contents: String) -> Self {
        Artifact {
            name: name.to_string(),
            contents: contents.into_bytes(),
        }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        Self::text(name, s)
    }

    /// Two whitespace-separated columns with a `#` header line.
    pub fn dat(name: &str, columns: [&str; 2], rows: &[(f64, f64)]) -> Self {
        let mut s = format!("# {} {}\n", columns[0], columns[1]);
        for (x, y) in rows {
            writeln!(s, "{x:e} {y:e}").unwrap();
        }
        Self::text(name, s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn new(scenario: &str) -> Self {
        Outcome {
            scenario: scenario.to_string(),
            checks: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// At least one check ran and none failed.
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn status(&self) -> &'static str {
        if self.checks.is_empty() {
            NO_CHECKS
        } else if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    status: &'a str,
    checks_run: usize,
    checks_failed: usize,
    checks: &'a [Check],
    files: Vec<&'a str>,
    config: &'a ScenarioConfig,
}

/// The machine-readable summary of an outcome.
pub fn summary_json(outcome: &Outcome, cfg: &ScenarioConfig) -> String {
    let summary = Summary {
        scenario: &outcome.scenario,
        status: outcome.status(),
        checks_run: outcome.checks.len(),
        checks_failed: outcome.failed_checks().len(),
        checks: &outcome.checks,
        files: outcome.artifacts.iter().map(|a| a.name.as_str()).collect(),
        config: cfg,
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Write every artifact and then `summary.json` into `dir`, in order.
/// Returns the paths written.
pub fn emit_report(dir: &Path, outcome: &Outcome, cfg: &ScenarioConfig) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(outcome.artifacts.len() + 1);
    for a in &outcome.artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents)?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    std::fs::write(&path, summary_json(outcome, cfg))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_outcome_is_marked_and_fails() {
        let o = Outcome::new("flow");
        assert!(!o.passed());
        let s = summary_json(&o, &ScenarioConfig::default());
        assert!(s.contains("\"status\": \"no checks run\""), "{s}");
        assert!(s.contains("\"checks_run\": 0"));
    }

    #[test]
    fn dat_has_two_columns() {
        let a = Artifact::dat("x.dat", ["t", "E_r"], &[(0.1, 2.0), (0.2, 1e-20)]);
        let text = String::from_utf8(a.contents).unwrap();
        assert_eq!(text, "# t E_r\n1e-1 2e0\n2e-1 1e-20\n");
    }

    #[test]
    fn check_comparisons() {
        assert!(Check::at_most("a", 1.0, 1.0, "").pass);
        assert!(!Check::at_least("b", 7.9, 8.0, "").pass);
        assert!(!Check::at_most("c", f64::NAN, 1.0, "").pass);
    }
}
