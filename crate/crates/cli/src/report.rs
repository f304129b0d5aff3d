//! Versioned JSON reports and their CSV flattening.
//!
//! CSV has the fixed header `report,index,op,pass,field,value`, one row per
//! scalar leaf of each record's `data`. Nested keys are joined with `.` and
//! array positions appear as indices (`sizes.2`). A record with an error
//! gets an extra `error` row. A record with no scalar data gets one row with
//! empty `field` and `value`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA: u32 = 1;

pub const CSV_HEADER: [&str; 6] = ["report", "index", "op", "pass", "field", "value"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub op: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub data: Value,
}

impl Record {
    pub fn new(op: impl Into<String>, pass: bool, data: impl Serialize) -> Self {
        Record {
            op: op.into(),
            pass,
            error: None,
            data: serde_json::to_value(data).unwrap_or(Value::Null),
        }
    }

    pub fn failure(op: impl Into<String>, error: impl ToString) -> Self {
        Record {
            op: op.into(),
            pass: false,
            error: Some(error.to_string()),
            data: Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub name: String,
    pub records: Vec<Record>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report {
            schema: SCHEMA,
            name: name.into(),
            records: Vec::new(),
            passed: 0,
            failed: 0,
        }
    }

    pub fn push(&mut self, r: Record) {
        if r.pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        for r in other.records {
            self.push(r);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema != SCHEMA {
            return Err(CliError::Schema(r.schema));
        }
        Ok(r)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for (i, rec) in self.records.iter().enumerate() {
            let mut rows = Vec::new();
            flatten("", &rec.data, &mut rows);
            if let Some(e) = &rec.error {
                rows.push(("error".to_string(), e.clone()));
            }
            if rows.is_empty() {
                rows.push((String::new(), String::new()));
            }
            for (field, value) in rows {
                w.write_record([
                    self.name.as_str(),
                    &i.to_string(),
                    &rec.op,
                    if rec.pass { "true" } else { "false" },
                    &field,
                    &value,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Null => {
            if !prefix.is_empty() {
                out.push((prefix.to_string(), String::new()));
            }
        }
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => out.push((prefix.to_string(), n.to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
    }
}
