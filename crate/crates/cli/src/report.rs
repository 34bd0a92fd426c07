use std::fmt::Write as _;

use forge_core::verdict::describe_axiom;
use forge_core::Verdict;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationLine {
    pub axiom: String,
    pub name: String,
    pub detail: String,
    pub witnesses: Vec<u64>,
}

/// What every command prints: a status, a one-line summary, violations and command-specific details.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    pub violations: Vec<ViolationLine>,
    pub details: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            status: Status::Pass,
            summary: String::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            violations: Vec::new(),
            details: Map::new(),
            error: None,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report details serialize");
        self.details.insert(key.to_string(), v);
    }

    /// Records the verdict's violations; a failed verdict fails the report.
    pub fn verdict(&mut self, v: &Verdict) {
        if !v.valid {
            self.status = Status::Fail;
        }
        for x in &v.violations {
            self.violations.push(ViolationLine {
                axiom: x.axiom.clone(),
                name: describe_axiom(&x.axiom).to_string(),
                detail: x.detail.clone(),
                witnesses: x.witnesses.iter().map(|&w| w as u64).collect(),
            });
        }
    }

    pub fn fail_unless(&mut self, ok: bool) {
        if !ok {
            self.status = Status::Fail;
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        let _ = writeln!(s, "forge {}: {status}", self.command);
        if !self.summary.is_empty() {
            let _ = writeln!(s, "{}", self.summary);
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        for v in &self.violations {
            let _ = write!(s, "violation [{}] {}: {}", v.axiom, v.name, v.detail);
            if !v.witnesses.is_empty() {
                let w: Vec<String> = v.witnesses.iter().map(|x| x.to_string()).collect();
                let _ = write!(s, " (witnesses {})", w.join(", "));
            }
            s.push('\n');
        }
        for o in &self.outputs {
            let _ = writeln!(s, "wrote {o}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error: {e}");
        }
        s
    }
}
