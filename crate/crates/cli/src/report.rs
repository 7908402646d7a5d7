//! Machine-readable reports: one check per verified statement, emitted as
//! JSON, CSV or a fixed-width table, deterministically.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub statement_id: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Check {
    pub fn exact<T: std::fmt::Debug + PartialEq>(id: &str, expected: T, got: T) -> Check {
        let pass = expected == got;
        Check {
            statement_id: id.to_string(),
            expected: format!("{expected:?}"),
            got: format!("{got:?}"),
            pass,
            warnings: vec![],
        }
    }

    pub fn with_warning(mut self, w: impl Into<String>) -> Check {
        self.warnings.push(w.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub suite: String,
    pub scenario: ScenarioEcho,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub sigma: String,
    pub backend: String,
    pub poly: String,
    pub rel: String,
    pub radius: usize,
    pub slack: usize,
    pub seed: u64,
}

impl Report {
    pub fn new(suite: &str, scenario: ScenarioEcho, mut checks: Vec<Check>) -> Report {
        checks.sort_by(|a, b| a.statement_id.cmp(&b.statement_id));
        let pass = checks.iter().all(|c| c.pass);
        Report { schema_version: 1, suite: suite.to_string(), scenario, checks, pass }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("statement_id,expected,got,pass,warnings\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_escape(&c.statement_id),
                csv_escape(&c.expected),
                csv_escape(&c.got),
                c.pass,
                csv_escape(&c.warnings.join("; "))
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let idw = self
            .checks
            .iter()
            .map(|c| c.statement_id.len())
            .chain(["statement".len()])
            .max()
            .unwrap_or(12);
        let ew = self
            .checks
            .iter()
            .map(|c| c.expected.len())
            .chain(["expected".len()])
            .max()
            .unwrap_or(8)
            .min(32);
        let gw = self
            .checks
            .iter()
            .map(|c| c.got.len())
            .chain(["got".len()])
            .max()
            .unwrap_or(8)
            .min(32);
        let mut out = format!(
            "{:<idw$}  {:<ew$}  {:<gw$}  result\n",
            "statement", "expected", "got"
        );
        out.push_str(&format!("{}\n", "-".repeat(idw + ew + gw + 12)));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<idw$}  {:<ew$}  {:<gw$}  {}\n",
                c.statement_id,
                truncate(&c.expected, ew),
                truncate(&c.got, gw),
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "\nsuite {}: {}\n",
            self.suite,
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }
}

fn truncate(s: &str, w: usize) -> String {
    if s.len() <= w {
        s.to_string()
    } else {
        format!("{}…", &s[..w.saturating_sub(1)])
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
