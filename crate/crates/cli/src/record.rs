use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub timestamp: String,
    pub subcommand: String,
    pub anchor: String,
    pub status: Status,
    pub tolerance: String,
    pub summary: String,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    pub environment: serde_json::Value,
    /// Files written next to the record (CSV series, snapshots).
    #[serde(default)]
    pub artifacts: Vec<String>,
}

/// A CSV cell; floats are written with 17 significant digits.
#[derive(Clone, Debug)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(n) => n.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Series {
    pub fn new(header: &[&'static str]) -> Self {
        Series { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        Ok(w.into_inner()?)
    }
}

/// Write `bytes` to `dir/name` through a temporary file and a rename.
/// Existing files are never replaced.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist_noclobber(&target).with_context(|| format!("writing {}", target.display()))?;
    Ok(target)
}

/// Like [`write_atomic`] but replaces an existing file.
pub fn write_atomic_replace(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).with_context(|| format!("writing {}", target.display()))?;
    Ok(target)
}

pub fn new_id(subcommand: &str) -> String {
    let u = uuid::Uuid::new_v4().simple().to_string();
    format!("{subcommand}-{}", &u[..12])
}

pub fn read_records(dir: &Path) -> anyhow::Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path)?;
        match serde_json::from_str::<RunRecord>(&text) {
            Ok(r) => out.push(r),
            Err(e) => eprintln!("skipping {}: {e}", path.display()),
        }
    }
    out.sort_by(|a, b| (&a.timestamp, &a.id).cmp(&(&b.timestamp, &b.id)));
    Ok(out)
}
