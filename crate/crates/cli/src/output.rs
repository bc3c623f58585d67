//! CSV emission: header row, `.` decimal point, 17 significant digits, LF.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Named columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    columns: Vec<(String, Vec<f64>)>,
}

impl Series {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push((name.into(), values));
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }
}

fn format_value(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn emit_csv(series: &Series, path: &Path) -> Result<(), CliError> {
    let rows = series.rows();
    if let Some((name, _)) = series.columns.iter().find(|(_, v)| v.len() != rows) {
        return Err(CliError::Config(format!("column '{name}' has a different length")));
    }
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    writer.write_record(series.names()).map_err(|e| io_error(path, e))?;
    for i in 0..rows {
        writer
            .write_record(series.columns.iter().map(|(_, v)| format_value(v[i])))
            .map_err(|e| io_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// Writes the resolved configuration and library version beside an output.
pub fn emit_provenance(resolved_toml: &str, path: &Path) -> Result<(), CliError> {
    let mut file = File::create(path).map_err(|e| io_error(path, e))?;
    write!(
        file,
        "# Resolved scenario for this output\nqbm_version = \"{}\"\n\n{}",
        env!("CARGO_PKG_VERSION"),
        resolved_toml
    )
    .map_err(|e| io_error(path, e))
}

/// Reads a two-column `(t, F)` table with a header row.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| io_error(path, e))?;
        if record.len() != 2 {
            return Err(CliError::Config(format!("{}: expected two columns", path.display())));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        };
        times.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    Ok((times, values))
}
