//! Per-trial tables, aggregated series and their on-disk forms.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

/// Sample mean and standard deviation (n - 1 denominator, 0 for one value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

/// A named CSV table. Cells are stored already formatted.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.headers.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, header: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == header)
    }

    /// Values of a numeric column over rows accepted by `keep`.
    pub fn numeric(&self, header: &str, keep: impl Fn(&[String]) -> bool) -> Result<Vec<f64>> {
        let col = self
            .column(header)
            .ok_or_else(|| HarnessError::Report(format!("table {} has no column {header}", self.name)))?;
        self.rows
            .iter()
            .filter(|r| keep(r))
            .map(|r| {
                r[col]
                    .parse::<f64>()
                    .map_err(|_| HarnessError::Report(format!("{}: `{}` is not a number", self.name, r[col])))
            })
            .collect()
    }

    /// Distinct values of a column in first-seen order.
    pub fn distinct(&self, header: &str) -> Vec<String> {
        let Some(col) = self.column(header) else {
            return Vec::new();
        };
        let mut seen: Vec<String> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r[col]) {
                seen.push(r[col].clone());
            }
        }
        seen
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| HarnessError::Report(format!("{}: {e}", self.name));
        w.write_record(&self.headers).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Report(format!("{}: {e}", self.name)))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Report(e.to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Table> {
        let mut r = csv::Reader::from_path(path).map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let csv_err = |source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let headers = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
        }
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Table { name, headers, rows })
    }
}

/// Aggregated `x, mean, std` points for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: [String; 3],
    pub points: Vec<(f64, f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, x: &str, mean: &str, std: &str) -> Self {
        Series {
            name: name.into(),
            columns: [x.to_string(), mean.to_string(), std.to_string()],
            points: Vec::new(),
        }
    }

    /// Adds the mean and std of `samples` at `x`; an empty sample is skipped.
    pub fn push_samples(&mut self, x: f64, samples: &[f64]) {
        if let Some((m, s)) = mean_std(samples) {
            self.points.push((x, m, s));
        }
    }

    pub fn to_plotdata(&self) -> String {
        let mut out = format!("# {} {} {}\n", self.columns[0], self.columns[1], self.columns[2]);
        for (x, m, s) in &self.points {
            let _ = writeln!(out, "{x} {m} {s}");
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub series: Vec<Series>,
    /// Free-form text artifacts such as rendered plans.
    pub notes: Vec<(String, String)>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn series_named(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Writes `<name>.csv`, `<name>.dat` and note files into `dir`.
    /// Fails before touching the disk if any table or series is empty.
    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        if self.tables.is_empty() {
            return Err(HarnessError::Report("report has no tables".into()));
        }
        if let Some(t) = self.tables.iter().find(|t| t.rows.is_empty()) {
            return Err(HarnessError::Report(format!("table {} has no rows", t.name)));
        }
        if let Some(s) = self.series.iter().find(|s| s.points.is_empty()) {
            return Err(HarnessError::Report(format!("series {} has no points", s.name)));
        }
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |file: String, body: String| -> Result<()> {
            let path = dir.join(file);
            fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        for t in &self.tables {
            put(format!("{}.csv", t.name), t.to_csv_string()?)?;
        }
        for s in &self.series {
            put(format!("{}.dat", s.name), s.to_plotdata())?;
        }
        for (name, body) in &self.notes {
            put(name.clone(), body.clone())?;
        }
        Ok(written)
    }
}

/// Summary rows `(task, method, mean, std, n)` grouped by two key columns of
/// a per-trial table.
pub fn summarize(table: &Table, task_col: &str, method_col: &str, value_col: &str, name: &str) -> Result<Table> {
    let task_idx = table
        .column(task_col)
        .ok_or_else(|| HarnessError::Report(format!("no column {task_col}")))?;
    let method_idx = table
        .column(method_col)
        .ok_or_else(|| HarnessError::Report(format!("no column {method_col}")))?;
    let mut out = Table::new(name, &["task", "method", "mean", "std", "n"]);
    for task in table.distinct(task_col) {
        for method in table.distinct(method_col) {
            let vals = table.numeric(value_col, |r| r[task_idx] == task && r[method_idx] == method)?;
            if let Some((m, s)) = mean_std(&vals) {
                out.push([task.clone(), method.clone(), m.to_string(), s.to_string(), vals.len().to_string()]);
            }
        }
    }
    if out.rows.is_empty() {
        return Err(HarnessError::Report(format!("nothing to summarise in {}", table.name)));
    }
    Ok(out)
}
