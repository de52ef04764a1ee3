//! Writing results: CSV for sweeps, JSON for structured results, and a
//! plain-text plot recipe per figure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

pub struct CsvTable {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &'static str, header: &[&str]) -> Self {
        Self {
            name,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: Cell,
    {
        self.rows.push(row.into_iter().map(|v| v.cell()).collect());
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

/// CSV cell rendering. Floats use the shortest round-trip form, switching to
/// exponent notation outside `[1e-4, 1e15)` so tiny values stay readable.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        let a = self.abs();
        if a == 0.0 || (1e-4..1e15).contains(&a) || !self.is_finite() {
            self.to_string()
        } else {
            format!("{self:e}")
        }
    }
}

impl<T: Cell + ?Sized> Cell for &T {
    fn cell(&self) -> String {
        (**self).cell()
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
int_cell!(usize, u64, String);

pub struct Report {
    pub tables: Vec<CsvTable>,
    pub result: Value,
    pub recipe: Option<String>,
}

impl Report {
    pub fn json(result: Value) -> Self {
        Self {
            tables: Vec::new(),
            result,
            recipe: None,
        }
    }
}

/// With `out`: one CSV per table, `result.json` with config and result,
/// `plot.txt` when a recipe exists. Without: JSON document on stdout, or the
/// CSV tables preceded by `#` comment lines carrying config and result.
pub fn emit(report: &Report, config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let config_value = serde_json::to_value(config).expect("config serializes");
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut files = Vec::new();
            for t in &report.tables {
                let name = format!("{}.csv", t.name);
                std::fs::write(dir.join(&name), t.render())?;
                files.push(name);
            }
            if let Some(recipe) = &report.recipe {
                std::fs::write(dir.join("plot.txt"), recipe)?;
                files.push("plot.txt".into());
            }
            let doc = serde_json::json!({
                "config": config_value,
                "result": report.result,
                "files": files,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("json");
            text.push('\n');
            std::fs::write(dir.join("result.json"), text)?;
        }
        None if report.tables.is_empty() => {
            let doc = serde_json::json!({ "config": config_value, "result": report.result });
            let mut text = serde_json::to_string_pretty(&doc).expect("json");
            text.push('\n');
            write_stdout(&text)?;
        }
        None => {
            let mut s = String::new();
            writeln!(s, "# config: {config_value}").ok();
            if !report.result.is_null() {
                writeln!(s, "# result: {}", report.result).ok();
            }
            for (i, t) in report.tables.iter().enumerate() {
                if report.tables.len() > 1 {
                    if i > 0 {
                        s.push('\n');
                    }
                    writeln!(s, "# table: {}", t.name).ok();
                }
                s.push_str(&t.render());
            }
            write_stdout(&s)?;
        }
    }
    Ok(())
}

/// A closed pipe downstream (e.g. `| head`) is not an error.
fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells() {
        assert_eq!(0.0f64.cell(), "0");
        assert_eq!(0.25f64.cell(), "0.25");
        assert_eq!(1.5e-16f64.cell(), "1.5e-16");
        assert_eq!((-2e-5f64).cell(), "-2e-5");
        assert_eq!(7usize.cell(), "7");
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new("t", &["x", "y"]);
        t.push([1.0, 0.5]);
        t.push([2.0, 1e-9]);
        assert_eq!(t.render(), "x,y\n1,0.5\n2,1e-9\n");
    }
}
