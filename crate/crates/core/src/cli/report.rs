use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, holds: bool) -> Check {
        Check { name: name.into(), holds, detail: None }
    }

    pub fn with_detail(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), holds, detail: Some(detail.into()) }
    }
}

/// An experiment report. Hypotheses come before checks: a hypothesis that
/// fails is recorded but is not a failure of the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub timestamp: Option<u64>,
    pub hypotheses: Vec<Check>,
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Report {
        Report {
            schema: SCHEMA,
            command: command.into(),
            seed,
            timestamp: None,
            hypotheses: Vec::new(),
            checks: Vec::new(),
            failures: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn hypothesis(&mut self, c: Check) {
        self.hypotheses.push(c);
    }

    /// Records a check; failed checks are also listed under `failures`.
    pub fn check(&mut self, c: Check) {
        if !c.holds {
            self.failures.push(match &c.detail {
                Some(d) => format!("{}: {d}", c.name),
                None => c.name.clone(),
            });
        }
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// The report without its timestamp, for comparisons.
    pub fn comparable(&self) -> Report {
        Report { timestamp: None, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One row per hypothesis and check, then one per failure.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| std::io::Error::other(e.to_string());
        w.write_record(["section", "name", "holds", "detail"]).map_err(io)?;
        for (section, list) in [("hypothesis", &self.hypotheses), ("check", &self.checks)] {
            for c in list {
                w.write_record([section, &c.name, if c.holds { "true" } else { "false" }, c.detail.as_deref().unwrap_or("")])
                    .map_err(io)?;
            }
        }
        for f in &self.failures {
            w.write_record(["failure", f, "false", ""]).map_err(io)?;
        }
        w.flush()?;
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 records"))
    }

    pub fn write_to(&self, out: &mut dyn Write, csv: bool) -> Result<()> {
        let text = if csv { self.to_csv()? } else { self.to_json()? };
        out.write_all(text.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_follow_checks() {
        let mut r = Report::new("demo", 7);
        r.hypothesis(Check::new("dense", false));
        assert!(r.passed());
        r.check(Check::with_detail("law", false, "3 != 4"));
        r.check(Check::new("other", true));
        assert_eq!(r.failures, vec!["law: 3 != 4"]);
        assert_eq!(r.exit_code(), 1);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("check,law,false,3 != 4"));
        let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
