//! Result envelope, claims and CSV tables.

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

impl Claim {
    pub fn new(claim: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Claim {
            claim: claim.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: Value,
    pub table: Option<Table>,
    pub claims: Vec<Claim>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    /// Top-level JSON document: command, result, claims.
    pub fn envelope(&self, command: &str) -> Value {
        json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "result": self.json,
            "claims": self.claims,
            "all_claims_passed": self.passed(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_full_precision_floats() {
        let mut t = Table::new(&["N", "gap", "kind"]);
        t.push(vec![
            Cell::Int(16),
            Cell::Float(0.1),
            Cell::Text("a,b".into()),
        ]);
        assert_eq!(
            t.to_csv().unwrap(),
            "N,gap,kind\n16,1.0000000000000001e-1,\"a,b\"\n"
        );
    }

    #[test]
    fn envelope_reports_failures() {
        let o = Outcome {
            json: json!({}),
            table: None,
            claims: vec![Claim::new("x", true, ""), Claim::new("y", false, "")],
        };
        let e = o.envelope("spectrum");
        assert_eq!(e["all_claims_passed"], json!(false));
        assert_eq!(e["claims"][1]["claim"], json!("y"));
    }
}
