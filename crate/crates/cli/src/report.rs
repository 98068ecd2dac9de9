use std::path::Path;

use crate::config::config_error;
use crate::record::{read_records, write_atomic_replace, Cell, Series};

/// Aggregate every run record in `dir` into `summary.csv` and print a table.
/// Records are only read.
pub fn report(dir: &Path) -> anyhow::Result<i32> {
    if !dir.is_dir() {
        return config_error(format!("results directory {} does not exist", dir.display()));
    }
    let records = read_records(dir)?;
    if records.is_empty() {
        return config_error(format!("no run records in {}", dir.display()));
    }
    let mut series = Series::new(&["id", "timestamp", "subcommand", "anchor", "status", "tolerance", "summary"]);
    for r in &records {
        series.push(vec![
            Cell::S(r.id.clone()),
            Cell::S(r.timestamp.clone()),
            Cell::S(r.subcommand.clone()),
            Cell::S(r.anchor.clone()),
            Cell::S(r.status.as_str().into()),
            Cell::S(r.tolerance.clone()),
            Cell::S(r.summary.clone()),
        ]);
    }
    write_atomic_replace(dir, "summary.csv", &series.to_csv()?)?;

    let rows: Vec<[&str; 4]> = records
        .iter()
        .map(|r| [r.subcommand.as_str(), r.status.as_str(), r.anchor.as_str(), r.summary.as_str()])
        .collect();
    let header = ["subcommand", "status", "anchor", "summary"];
    let mut width = header.map(str::len);
    for row in &rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 4]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i < 3 {
                s.push_str(&format!("{c:<w$}  ", w = width[i]));
            } else {
                s.push_str(c);
            }
        }
        s
    };
    println!("{}", line(header));
    for row in rows {
        println!("{}", line(row));
    }
    Ok(0)
}
