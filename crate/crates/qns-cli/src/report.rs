use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// What one invocation read, decided and wrote.
#[derive(Debug, Default, Serialize)]
pub struct CliReport {
    pub command: String,
    /// Input role → SHA-256 of the file bytes.
    pub inputs: BTreeMap<String, String>,
    pub verdicts: BTreeMap<String, bool>,
    pub violations: BTreeMap<String, f64>,
    /// Computed quantities that are not pass/fail, such as game values.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

impl CliReport {
    pub fn new(command: impl Into<String>) -> Self {
        CliReport { command: command.into(), ..Default::default() }
    }

    pub fn hash_input(&mut self, role: &str, bytes: &[u8]) {
        self.inputs.insert(role.to_string(), hex::encode(Sha256::digest(bytes)));
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, violation: f64) {
        let name = name.into();
        self.violations.insert(name.clone(), violation);
        self.verdicts.insert(name, pass);
    }

    /// Copies every check of a library report, prefixing names with `prefix.`.
    pub fn absorb(&mut self, prefix: &str, r: &qns::Report) {
        for c in &r.checks {
            let name = if prefix.is_empty() { c.name.clone() } else { format!("{prefix}.{}", c.name) };
            self.verdict(name, c.pass, c.violation);
        }
    }

    pub fn pass(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn render(&self, pretty: bool) -> String {
        if !pretty {
            let mut s = serde_json::to_string(self).expect("report serializes");
            s.push('\n');
            return s;
        }
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.command);
        for (role, h) in &self.inputs {
            let _ = writeln!(s, "  input    {role:<12} {}", &h[..16]);
        }
        for (name, pass) in &self.verdicts {
            let tag = if *pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "  {tag}     {name:<28} {:.3e}", self.violations[name]);
        }
        for (name, v) in &self.values {
            let _ = writeln!(s, "  value    {name:<28} {v}");
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "  wrote    {a}");
        }
        s
    }
}
