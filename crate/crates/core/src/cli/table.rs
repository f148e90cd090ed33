use std::io::Write;

use serde_json::{json, Value};

use super::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// 17 significant digits; non-finite values spelled `inf`, `-inf`, `nan`.
    fn csv_text(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::String(self.csv_text()),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Free-form provenance lines, written as `# ` comments in CSV.
    pub provenance: Vec<String>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for line in &self.provenance {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({
            "provenance": self.provenance,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }

    pub fn to_string(&self, format: OutputFormat) -> String {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(["x", "label", "n"]);
        t.provenance.push("tool 0.1".into());
        t.push(vec![0.1.into(), "a,b".into(), Cell::Int(3)]);
        t.push(vec![f64::INFINITY.into(), "ok".into(), Cell::Int(-1)]);
        t
    }

    #[test]
    fn csv_round_trips_doubles() {
        let text = sample().to_string(OutputFormat::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# tool 0.1"));
        assert_eq!(lines.next(), Some("x,label,n"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("1.0000000000000001e-1,\"a,b\",3"));
        let v: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(v, 0.1);
        assert_eq!(lines.next(), Some("inf,ok,-1"));
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().to_string(OutputFormat::Json)).unwrap();
        assert_eq!(v["columns"][1], "label");
        assert_eq!(v["rows"][1][0], "inf");
        assert_eq!(v["rows"][0][2], 3);
    }
}
