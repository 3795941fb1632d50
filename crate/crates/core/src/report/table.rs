use std::io::{Read, Write};

use serde_json::{Map, Value};

use super::ReportError;

/// A rectangular report of string cells with named columns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.headers.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.headers.len() {
                return Err(ReportError::RowWidth { row: i, got: row.len(), expected: self.headers.len() });
            }
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, ReportError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, ReportError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Table { headers, rows })
    }

    /// Rows as JSON objects; cells that parse as JSON numbers are emitted as
    /// numbers, empty cells as null.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, cell)| (h.clone(), json_cell(cell)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn json_cell(cell: &str) -> Value {
    if cell.is_empty() {
        return Value::Null;
    }
    let numeric = cell.bytes().all(|b| b.is_ascii_digit() || b == b'.' || b == b'-')
        && !(cell.len() > 1 && cell.starts_with('0') && !cell.starts_with("0."));
    if numeric {
        if let Ok(n) = cell.parse::<u64>() {
            return Value::from(n);
        }
        if let Ok(n) = cell.parse::<i64>() {
            return Value::from(n);
        }
        if let Ok(Value::Number(n)) = serde_json::from_str::<Value>(cell) {
            return Value::Number(n);
        }
    }
    Value::String(cell.to_string())
}
