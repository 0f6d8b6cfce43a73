//! The versioned report envelope every command emits.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// The property fails where it is expected to, such as the minimal
    /// masker at even dimension.
    ExpectedFail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub tolerance: f64,
    /// Whether `value relation bound` holds within `tolerance`.
    pub holds: bool,
    pub expected: bool,
    pub status: Status,
    /// `holds == expected`.
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64, tolerance: f64) -> Check {
        let holds = match relation {
            Relation::AtMost => value <= bound + tolerance,
            Relation::AtLeast => value >= bound - tolerance,
            Relation::Equal => (value - bound).abs() <= tolerance,
        };
        Check {
            name: name.into(),
            value,
            relation,
            bound,
            tolerance,
            holds,
            expected: true,
            status: Status::Pass,
            pass: true,
        }
        .settle()
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Check {
        Check::new(name, value, Relation::AtMost, bound, tolerance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Check {
        Check::new(name, value, Relation::AtLeast, bound, tolerance)
    }

    pub fn equal(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Check {
        Check::new(name, value, Relation::Equal, bound, tolerance)
    }

    pub fn expecting(mut self, expected: bool) -> Check {
        self.expected = expected;
        self.settle()
    }

    fn settle(mut self) -> Check {
        self.pass = self.holds == self.expected;
        self.status = match (self.pass, self.expected) {
            (true, true) => Status::Pass,
            (true, false) => Status::ExpectedFail,
            (false, _) => Status::Fail,
        };
        self
    }
}

/// Rows for `--format csv`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Table {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a command hands back before the envelope is stamped.
pub struct Outcome {
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub data: Value,
    pub table: Option<Table>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub data: Value,
    pub wall_time_ms: f64,
}

impl ReportEnvelope {
    pub fn new(command: String, seed: u64, outcome: &Outcome, wall_time_ms: f64) -> ReportEnvelope {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION,
            command,
            seed,
            parameters: outcome.parameters.clone(),
            pass: outcome.checks.iter().all(|c| c.pass),
            checks: outcome.checks.clone(),
            data: outcome.data.clone(),
            wall_time_ms,
        }
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["name", "value", "relation", "bound", "tolerance", "status"]);
    for c in checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        };
        let status = serde_json::to_value(c.status).expect("status serializes");
        t.push(vec![
            c.name.clone(),
            format!("{:e}", c.value),
            rel.into(),
            format!("{:e}", c.bound),
            format!("{:e}", c.tolerance),
            status.as_str().unwrap_or_default().to_string(),
        ]);
    }
    t
}

pub fn write_csv(table: &Table, out: impl Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
