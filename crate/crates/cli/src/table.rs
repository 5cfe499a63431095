//! Comma-separated tables with `#`-prefixed metadata lines.
//!
//! Numbers are written with 17 significant digits so that reading a table
//! back gives the same `f64` bits.

use std::io::Write;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as numbers.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let i = self.column(name).ok_or_else(|| CliError::Usage(format!("no column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().map_err(|_| CliError::Usage(format!("'{}' in column '{name}' is not a number", r[i]))))
            .collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {}", v.replace('\n', " ")).map_err(io)?;
        }
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            cw.write_record(r).map_err(csv_err)?;
        }
        cw.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn read(text: &str) -> Result<Self, CliError> {
        let meta = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l[1..].split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = rd
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(csv_err)?;
        Ok(Self { meta, header, rows })
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::read(&text)
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv: {e}"))
}
