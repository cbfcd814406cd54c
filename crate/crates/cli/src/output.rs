use std::io::Write;

use anyhow::Result;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// What a command prints: JSON records, and optionally a different table for CSV.
pub struct Output {
    pub records: Vec<Value>,
    pub table: Option<Vec<Value>>,
}

impl Output {
    pub fn one(v: Value) -> Self {
        Output {
            records: vec![v],
            table: None,
        }
    }

    pub fn lines(records: Vec<Value>) -> Self {
        Output { records, table: None }
    }

    pub fn with_table(mut self, rows: Vec<Value>) -> Self {
        self.table = Some(rows);
        self
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> Result<()> {
        match format {
            Format::Json => {
                for r in &self.records {
                    serde_json::to_writer(&mut *out, r)?;
                    writeln!(out)?;
                }
            }
            Format::Csv => write_csv(self.table.as_ref().unwrap_or(&self.records), out)?,
        }
        out.flush()?;
        Ok(())
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        _ => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        _ => v.to_string(),
    }
}

fn write_csv(rows: &[Value], out: &mut impl Write) -> Result<()> {
    let flat: Vec<Map<String, Value>> = rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            flatten("", r, &mut m);
            m
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for m in &flat {
        for k in m.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for m in &flat {
        w.write_record(header.iter().map(|k| m.get(k).map(cell).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_nested_objects() {
        let o = Output::lines(vec![
            json!({"q": 2, "b": {"decimal": "0.5", "exact": "1/2"}}),
            json!({"q": 3, "b": {"decimal": "0.25"}, "ci": [0.1, 0.2]}),
        ]);
        let mut buf = Vec::new();
        o.write(Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // serde_json maps are sorted by key.
        assert_eq!(text, "b.decimal,b.exact,q,ci\n0.5,1/2,2,\n0.25,,3,\"[0.1,0.2]\"\n");
    }

    #[test]
    fn json_is_one_record_per_line() {
        let o = Output::lines(vec![json!({"a": 1}), json!({"a": 2})]);
        let mut buf = Vec::new();
        o.write(Format::Json, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"a\":1}\n{\"a\":2}\n");
    }
}
