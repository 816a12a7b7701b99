//! CSV and JSON emission with fixed float formatting (17 significant
//! digits, `\n` line endings).

use std::fmt::Write;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Scalar summary entries, in output order.
    pub summary: Vec<(String, f64)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Table::default()
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Header row, data rows, then `# summary` comment lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&fmt_float(*v));
            }
            s.push('\n');
        }
        if !self.summary.is_empty() {
            s.push_str("# summary\n");
            for (k, v) in &self.summary {
                let _ = writeln!(s, "# {k} = {}", fmt_float(*v));
            }
        }
        s
    }

    /// `{"records": [...], "summary": {...}}`.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"records\":[");
        for (r, row) in self.rows.iter().enumerate() {
            if r > 0 {
                s.push(',');
            }
            s.push_str("\n{");
            for (i, (c, v)) in self.columns.iter().zip(row.iter()).enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "\"{}\":{}", escape(c), json_float(*v));
            }
            s.push('}');
        }
        s.push_str("\n],\"summary\":{");
        for (i, (k, v)) in self.summary.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "\n\"{}\":{}", escape(k), json_float(*v));
        }
        s.push_str("\n}}\n");
        s
    }
}

pub fn fmt_float(v: f64) -> String {
    // Avoid "-0.0000000000000000e0" for signed zeros.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn json_float(v: f64) -> String {
    if v.is_finite() {
        fmt_float(v)
    } else {
        "null".into()
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
