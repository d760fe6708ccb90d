//! Run reports: a typed record per executed check, with text and JSON
//! renderings and a CSV writer for kernel matrices.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// A theorem-backed comparison that came out equal.
    Pass,
    /// A theorem-backed comparison that did not.
    Fail,
    /// A verified negative: the expected obstruction was exhibited.
    Finding,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub groups: Vec<String>,
    /// Explicit field sizes; empty means the per-group default grid.
    pub qs: Vec<u32>,
    pub checks: Vec<String>,
    pub matrix_cap: usize,
    pub stack_q_limit: u32,
    pub threads: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub group: String,
    pub q: u32,
    pub category: String,
    pub status: Status,
    /// Whether a failure here falsifies a claimed theorem (as opposed to a
    /// demonstration that is expected to produce an obstruction).
    pub theorem_backed: bool,
    pub expected: String,
    pub computed: String,
    pub witness: Option<String>,
    pub classes: Option<usize>,
    pub points: Option<usize>,
    pub detail: String,
    pub wall_ms: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: RunConfig) -> Report {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            records: vec![],
            summary: Summary {
                total: 0,
                passed: 0,
                failed: 0,
                findings: 0,
            },
        }
    }

    pub fn push(&mut self, rec: CheckRecord) {
        self.records.push(rec);
    }

    pub fn finalize(&mut self) {
        let mut s = Summary {
            total: self.records.len(),
            passed: 0,
            failed: 0,
            findings: 0,
        };
        for r in &self.records {
            match r.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::Finding => s.findings += 1,
            }
        }
        self.summary = s;
    }

    pub fn exit_code(&self) -> i32 {
        if self.records.iter().any(|r| r.status == Status::Fail) {
            1
        } else {
            0
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("bkfourier v{}\n", self.version));
        out.push_str(&format!(
            "config: groups=[{}] q=[{}] checks=[{}] matrix_cap={} stack_q_limit={} threads={}\n",
            self.config.groups.join(","),
            self.config
                .qs
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.config.checks.join(","),
            self.config.matrix_cap,
            self.config.stack_q_limit,
            if self.config.threads == 0 {
                "default".to_string()
            } else {
                self.config.threads.to_string()
            }
        ));
        for r in &self.records {
            let tag = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Finding => "FINDING",
            };
            let mut size = String::new();
            if let Some(c) = r.classes {
                size.push_str(&format!(" ({} classes", c));
                if let Some(p) = r.points {
                    size.push_str(&format!(", {} points", p));
                }
                size.push(')');
            } else if let Some(p) = r.points {
                size.push_str(&format!(" ({} points)", p));
            }
            out.push_str(&format!(
                "[{}] {}/{} q={} {}: expected {}, computed {}{} [{}ms]\n",
                tag, r.group, r.id, r.q, r.category, r.expected, r.computed, size, r.wall_ms
            ));
            if !r.detail.is_empty() {
                out.push_str(&format!("    detail: {}\n", r.detail));
            }
            if let Some(w) = &r.witness {
                out.push_str(&format!("    witness: {}\n", w));
            }
        }
        out.push_str(&format!(
            "summary: {} checks, {} passed, {} failed, {} findings\n",
            self.summary.total, self.summary.passed, self.summary.failed, self.summary.findings
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// RFC-4180 style quoting; every cell is quoted since keys and cyclotomic
/// values routinely contain commas.
pub fn csv_escape(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// A square kernel matrix as CSV: first row is the class-representative
/// header (with an empty corner cell), each following row is a
/// representative followed by its kernel values.
pub fn kernel_csv(header: &[String], rows: &[(String, Vec<String>)]) -> String {
    let mut out = String::new();
    let mut first = vec![csv_escape("")];
    first.extend(header.iter().map(|h| csv_escape(h)));
    out.push_str(&first.join(","));
    out.push('\n');
    for (name, vals) in rows {
        assert_eq!(vals.len(), header.len(), "square matrix");
        let mut line = vec![csv_escape(name)];
        line.extend(vals.iter().map(|v| csv_escape(v)));
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
