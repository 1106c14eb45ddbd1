//! Command reports, rendered either as aligned text or as one JSON document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use equivar_core::report::CheckReport;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    /// Exit code this check forces when it fails.
    #[serde(skip)]
    pub severity: i32,
}

impl CheckEntry {
    pub fn from_report(name: impl Into<String>, report: &CheckReport, severity: i32) -> Self {
        CheckEntry {
            name: name.into(),
            passed: report.passed(),
            checks: report.checks,
            failures: report.failures.iter().map(ToString::to_string).collect(),
            severity,
        }
    }

    pub fn single(name: impl Into<String>, failure: Option<String>, severity: i32) -> Self {
        CheckEntry {
            name: name.into(),
            passed: failure.is_none(),
            checks: 1,
            failures: failure.into_iter().collect(),
            severity,
        }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub degree: u32,
    pub dimension: usize,
    pub representatives: Vec<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub rows: Vec<Row>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Value {
    pub name: String,
    pub value: String,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub form: String,
    pub degree: u32,
    pub zero: bool,
    /// `b` with `d_C b` equal to the form, for zero classes.
    pub primitive: Option<String>,
    pub cohomology_dimension: usize,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckEntry>,
    pub tables: Vec<Table>,
    pub values: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(command: String) -> Self {
        Report {
            command,
            config: BTreeMap::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            values: Vec::new(),
            class: None,
            document: None,
            error: None,
            exit_code: EXIT_OK,
            timing_ms: None,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Into<String>) {
        self.config.insert(key.to_string(), value.into());
    }

    pub fn value(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.values.push(Value { name: name.into(), value: value.into() });
    }

    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Exit code implied by the failed checks alone.
    pub fn check_exit_code(&self) -> i32 {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.severity).max().unwrap_or(EXIT_OK)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        if let (Some(doc), None) = (&self.document, &self.error) {
            return doc.clone();
        }
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        if !self.config.is_empty() {
            out.push_str("config:\n");
            let w = self.config.keys().map(String::len).max().unwrap_or(0);
            for (k, v) in &self.config {
                let _ = writeln!(out, "  {k:<w$}  {v}");
            }
        }
        if !self.checks.is_empty() {
            out.push_str("checks:\n");
            for c in &self.checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "  {verdict}  {} ({} checks)", c.name, c.checks);
                for f in &c.failures {
                    let _ = writeln!(out, "        {f}");
                }
            }
        }
        for t in &self.tables {
            let _ = writeln!(out, "{}:", t.title);
            let _ = writeln!(out, "  {:>6}  {:>9}  representatives", "degree", "dimension");
            for r in &t.rows {
                let reps = if r.representatives.is_empty() { "-".to_string() } else { r.representatives.join(", ") };
                let _ = writeln!(out, "  {:>6}  {:>9}  {reps}", r.degree, r.dimension);
            }
        }
        if !self.values.is_empty() {
            out.push_str("values:\n");
            let w = self.values.iter().map(|v| v.name.len()).max().unwrap_or(0);
            for v in &self.values {
                let _ = writeln!(out, "  {:<w$} = {}", v.name, v.value);
            }
        }
        if let Some(c) = &self.class {
            out.push_str("class:\n");
            let _ = writeln!(out, "  form                  {}", c.form);
            let _ = writeln!(out, "  degree                {}", c.degree);
            let _ = writeln!(out, "  zero                  {}", if c.zero { "yes" } else { "no" });
            let _ = writeln!(out, "  primitive             {}", c.primitive.as_deref().unwrap_or("-"));
            let _ = writeln!(out, "  cohomology dimension  {}", c.cohomology_dimension);
        }
        if let Some(doc) = &self.document {
            out.push_str("document:\n");
            out.push_str(doc);
        }
        if let Some(e) = &self.error {
            let at = match (e.line, e.column) {
                (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
                _ => String::new(),
            };
            let _ = writeln!(out, "error ({}){at}: {}", e.kind, e.message);
        }
        if let Some(ms) = self.timing_ms {
            let _ = writeln!(out, "timing: {ms} ms");
        }
        let _ = writeln!(out, "exit code: {}", self.exit_code);
        out
    }
}
