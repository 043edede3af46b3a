use serde::{Deserialize, Serialize};

/// Header plus rows of already-formatted cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Shortest round-trip form, in exponent notation for very small or
    /// large magnitudes; `NaN` for missing values.
    pub fn fmt(x: f64) -> String {
        let s = format!("{x:?}");
        match s.strip_suffix(".0") {
            Some(int) => int.to_string(),
            None => s,
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn push_numeric(&mut self, row: &[f64]) {
        self.push_row(row.iter().map(|&x| Self::fmt(x)).collect());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Column parsed as numbers; unparsable cells become `NaN`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[k].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self, csv::Error> {
        let mut rd = csv::Reader::from_reader(input);
        let columns = rd.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Self { columns, rows })
    }
}
