use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const SUITE_VERSION: &str = "1.0.0";

/// Outcome of one named check on one manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite_version: String,
    pub manifold: String,
    pub check: String,
    pub values: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub resolution: usize,
    pub seed: u64,
    pub millis: u64,
    /// Free-text remark: applicability, sampling statement or error.
    pub note: String,
}

impl CheckResult {
    pub fn new(manifold: &str, check: &str, resolution: usize, seed: u64) -> Self {
        CheckResult {
            suite_version: SUITE_VERSION.to_string(),
            manifold: manifold.to_string(),
            check: check.to_string(),
            values: BTreeMap::new(),
            tolerance: 0.0,
            pass: true,
            resolution,
            seed,
            millis: 0,
            note: String::new(),
        }
    }

    /// Record a value. Non-finite numbers cannot be stored in JSON, so they
    /// fail the check and are named in the note instead.
    pub fn put(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.values.insert(name.to_string(), v);
        } else {
            self.pass = false;
            self.add_note(&format!("{name} is not finite"));
        }
    }

    pub fn flag(&mut self, name: &str, v: bool) {
        self.put(name, if v { 1.0 } else { 0.0 });
    }

    pub fn require(&mut self, ok: bool) {
        self.pass &= ok;
    }

    pub fn add_note(&mut self, text: &str) {
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(text);
    }

    pub fn not_applicable(mut self, why: &str) -> Self {
        self.values.clear();
        self.flag("applicable", false);
        self.pass = true;
        self.add_note(&format!("not applicable: {why}"));
        self
    }

    pub fn failed(mut self, why: &str) -> Self {
        self.pass = false;
        self.add_note(why);
        self
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<20} {:<22} res={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.manifold,
            self.check,
            self.resolution
        )?;
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite_version: String,
    pub seed: u64,
    pub profile: ToleranceProfile,
    /// Resolution override, if any; otherwise each manifold's default.
    pub resolution: Option<usize>,
    pub environment: Environment,
    pub results: Vec<CheckResult>,
    pub verdict: bool,
}

impl Report {
    pub fn new(
        seed: u64,
        profile: ToleranceProfile,
        resolution: Option<usize>,
        results: Vec<CheckResult>,
    ) -> Self {
        let verdict = results.iter().all(|r| r.pass);
        Report {
            suite_version: SUITE_VERSION.to_string(),
            seed,
            profile,
            resolution,
            environment: Environment::current(),
            results,
            verdict,
        }
    }

    pub fn find(&self, manifold: &str, check: &str) -> Option<&CheckResult> {
        self.results
            .iter()
            .find(|r| r.manifold == manifold && r.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    #[default]
    Default,
    Strict,
}

impl ToleranceProfile {
    pub fn tolerances(self) -> Tolerances {
        match self {
            ToleranceProfile::Default => Tolerances {
                identity: 1e-6,
                tight: 1e-7,
                quadrature: 1e-4,
                energy: 1e-12,
                flag: 1e-6,
                frame: 1e-7,
            },
            ToleranceProfile::Strict => Tolerances {
                identity: 1e-8,
                tight: 1e-9,
                quadrature: 1e-6,
                energy: 1e-13,
                flag: 1e-8,
                frame: 1e-9,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ToleranceProfile::Default => "default",
            ToleranceProfile::Strict => "strict",
        }
    }
}

impl FromStr for ToleranceProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" => Ok(ToleranceProfile::Default),
            "strict" => Ok(ToleranceProfile::Strict),
            other => Err(format!(
                "unknown tolerance profile '{other}' (expected strict or default)"
            )),
        }
    }
}

/// Tolerances split by error source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Pointwise identities involving second derivatives (Bochner, Weitzenböck).
    pub identity: f64,
    /// Pointwise identities of first order (Hermitian identities, d², Prop-style).
    pub tight: f64,
    /// Relative tolerance of integrals.
    pub quadrature: f64,
    /// Slack allowed below the energy minimum.
    pub energy: f64,
    /// Threshold for classification flags (|∇J|, |N|, harmonic energy).
    pub flag: f64,
    /// Agreement between frames and charts.
    pub frame: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_fail() {
        let mut r = CheckResult::new("m", "c", 4, 0);
        r.put("x", 1.0);
        assert!(r.pass);
        r.put("y", f64::NAN);
        assert!(!r.pass);
        assert!(r.note.contains("y"));
        assert_eq!(r.values.len(), 1);
    }

    #[test]
    fn verdict_is_conjunction() {
        let a = CheckResult::new("m", "a", 4, 0);
        let b = CheckResult::new("m", "b", 4, 0).failed("boom");
        assert!(Report::new(0, ToleranceProfile::Default, None, vec![a.clone()]).verdict);
        assert!(!Report::new(0, ToleranceProfile::Default, None, vec![a, b]).verdict);
    }

    #[test]
    fn profile_parses() {
        assert_eq!(
            "strict".parse::<ToleranceProfile>().unwrap(),
            ToleranceProfile::Strict
        );
        assert!("loose".parse::<ToleranceProfile>().is_err());
    }
}
