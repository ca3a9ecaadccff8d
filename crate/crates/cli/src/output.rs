use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::OutputSection;
use crate::error::CliError;

/// Writes CSV files with `#` header lines and their JSON sidecars into one directory.
pub struct Output {
    dir: PathBuf,
    precision: usize,
    pub written: Vec<PathBuf>,
}

/// Column name and unit.
pub type Column = (&'static str, &'static str);

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl Output {
    pub fn new(cfg: &OutputSection) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.directory).map_err(|e| io_err(&cfg.directory, e))?;
        Ok(Self { dir: cfg.directory.clone(), precision: cfg.precision, written: Vec::new() })
    }

    pub fn number(&self, v: f64) -> String {
        format!("{:.*e}", self.precision - 1, v)
    }

    /// `<stem>.csv` with a title line, a column line and one line per row.
    pub fn csv<I>(&mut self, stem: &str, title: &str, columns: &[Column], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let path = self.dir.join(format!("{stem}.csv"));
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut out = BufWriter::new(file);
        let header: Vec<String> = columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        let mut body = format!("# {title}\n# {}\n", header.join(", "));
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            let cells: Vec<String> = row.iter().map(|&v| self.number(v)).collect();
            body.push_str(&cells.join(","));
            body.push('\n');
        }
        out.write_all(body.as_bytes()).and_then(|_| out.flush()).map_err(|e| io_err(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// `<stem>.json`, pretty-printed.
    pub fn sidecar(&mut self, stem: &str, meta: &Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(meta).expect("metadata serialises");
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = OutputSection { directory: dir.path().to_path_buf(), ..Default::default() };
        let mut out = Output::new(&cfg).unwrap();
        assert_eq!(out.number(0.1), "1.0000000000000001e-1");
        assert_eq!(out.number(-2.5e-300), "-2.5000000000000000e-300");
        let path = out.csv("t", "demo", &[("x", "w"), ("y", "1")], vec![vec![1.0, 2.0]]).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text, "# demo\n# x [w], y [1]\n1.0000000000000000e0,2.0000000000000000e0\n");
        assert_eq!(out.number(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
