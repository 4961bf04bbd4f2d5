use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits, `.` decimal separator, independent of locale.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A CSV table whose first line records the config hash and seed.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(hash: &str, seed: u64, columns: &[&str]) -> Self {
        let mut text = format!("# config_sha256={hash} seed={seed}\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_file(dir, name, &self.text)
    }
}

pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => real(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { &[$($crate::output::Cell::from($x)),*] };
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_sha256: &'a str,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, hash: &str, seed: u64, body: &T) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(&Stamped {
        config_sha256: hash,
        seed,
        body,
    })?;
    write_file(dir, name, &(text + "\n"))
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
