use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use isotropica::numerics::fmt_f64;
use serde::Serialize;

/// Files written by one run, relative to the output directory.
pub struct Outputs {
    dir: PathBuf,
    pub written: Vec<String>,
}

pub enum Cell {
    F(f64),
    U(usize),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::U(u) => u.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

impl Outputs {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: vec![],
        })
    }

    fn create(&mut self, name: &str) -> std::io::Result<BufWriter<File>> {
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<Cell>]) -> std::io::Result<()> {
        let mut w = self.create(name)?;
        writeln!(w, "{}", header.join(","))?;
        for r in rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()
    }

    /// Runs a writer closure against a new file.
    pub fn with_file<F>(&mut self, name: &str, f: F) -> std::io::Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()
    }
}

pub fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `prefix0, prefix1, ..` for an n-dimensional coordinate.
pub fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|d| format!("{prefix}{d}")).collect()
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}
