//! Run reports and their text, JSON and CSV encodings.

use std::fmt::Write as _;

use coiso_core::ConvergenceTable;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub truncation: u32,
    pub samples: usize,
    pub seed: u64,
    pub strict: bool,
}

/// An exact rendered value, e.g. `("F", "8*pi^2*cos(2*pi*y1)*cos(2*pi*y2)")`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: String,
}

/// A floating-point measurement, e.g. a maximal numeric defect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingReport {
    pub name: String,
    pub kind: Option<String>,
    pub value: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub index: usize,
    pub check: String,
    pub status: Status,
    pub values: Vec<NamedValue>,
    pub defects: Vec<Defect>,
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<ConvergenceTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub errors: usize,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub settings: Settings,
    pub bindings: Vec<BindingReport>,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

/// Rendered values longer than this are summarized in binding listings.
const MAX_RENDERED: usize = 400;

pub fn abbreviate(text: String) -> String {
    if text.chars().count() <= MAX_RENDERED {
        text
    } else {
        format!("<{} characters>", text.chars().count())
    }
}

pub fn exit_code(checks: &[CheckReport], binding_errors: bool, strict: bool) -> i32 {
    let has = |s: Status| checks.iter().any(|c| c.status == s);
    if has(Status::Error) || binding_errors {
        3
    } else if has(Status::Fail) || (strict && has(Status::Inconclusive)) {
        1
    } else {
        0
    }
}

fn float(v: f64) -> String {
    format!("{v:.3e}")
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let st = &self.settings;
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(
            s,
            "settings: truncation={} samples={} seed={} strict={}",
            st.truncation, st.samples, st.seed, st.strict
        );
        if !self.bindings.is_empty() {
            let _ = writeln!(s, "bindings:");
            for b in &self.bindings {
                match (&b.kind, &b.value, &b.error) {
                    (Some(k), Some(v), _) => {
                        let _ = writeln!(s, "  {}: {k} = {v}", b.name);
                    }
                    (_, _, Some(e)) => {
                        let _ = writeln!(s, "  {}: ERROR {e}", b.name);
                    }
                    _ => {
                        let _ = writeln!(s, "  {}", b.name);
                    }
                }
            }
        }
        for c in &self.checks {
            let _ = write!(s, "[{}] {}: {}", c.index, c.check, c.status.label());
            if let Some(t) = c.timing_ms {
                let _ = write!(s, " ({t:.1} ms)");
            }
            s.push('\n');
            for v in &c.values {
                let _ = writeln!(s, "    {} = {}", v.name, v.value);
            }
            for d in &c.defects {
                let _ = writeln!(s, "    {} = {}", d.name, float(d.value));
            }
            if let Some(m) = &c.message {
                let _ = writeln!(s, "    note: {m}");
            }
        }
        let sm = &self.summary;
        let _ = writeln!(
            s,
            "summary: {} passed, {} failed, {} inconclusive, {} errors; exit code {}",
            sm.passed, sm.failed, sm.inconclusive, sm.errors, sm.exit_code
        );
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain only finite numbers");
        s.push('\n');
        s
    }

    /// Convergence tables of all checks stacked under one header with a
    /// leading `check` column, or `index,check,status` if there are none.
    pub fn to_csv(&self) -> String {
        let tables: Vec<(usize, &ConvergenceTable)> = self
            .checks
            .iter()
            .filter_map(|c| c.table.as_ref().map(|t| (c.index, t)))
            .collect();
        let mut out = String::new();
        let Some((_, first)) = tables.first() else {
            out.push_str("index,check,status\n");
            for c in &self.checks {
                let _ = writeln!(out, "{},{},{}", c.index, csv_field(&c.check), c.status.label());
            }
            return out;
        };
        let _ = writeln!(out, "check,{}", first.header().join(","));
        for (index, table) in &tables {
            for line in table.to_csv().lines().skip(1) {
                let _ = writeln!(out, "{index},{line}");
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
