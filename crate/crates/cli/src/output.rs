//! Writing reports to stdout or to an output directory.
//!
//! Files are written under temporary names and renamed once complete, so a
//! failed run never leaves a partial data file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{Experiment, Format};
use crate::ops::{Data, Report, Table};
use crate::CliError;

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

pub fn csv_bytes(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(io)
}

fn table_json(table: &Table) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|r| {
            let obj: serde_json::Map<String, serde_json::Value> =
                table.header.iter().zip(r).map(|(k, v)| (k.to_string(), json!(v))).collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    json!(rows)
}

/// The `{config, seed, verdict, statistics}` document, with the data
/// embedded when `embed` is set.
pub fn report_json(exp: &Experiment, report: &Report, embed: bool) -> Result<Vec<u8>, CliError> {
    let mut doc = json!({
        "config": exp,
        "seed": exp.seed,
        "verdict": report.verdict,
        "statistics": report.statistics,
    });
    if embed {
        doc["data"] = match &report.data {
            Data::Table(t) => table_json(t),
            Data::Text { content, .. } => json!(content),
        };
    }
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(io)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn data_bytes(report: &Report) -> Result<(String, Vec<u8>), CliError> {
    match &report.data {
        Data::Table(t) => Ok((String::new(), csv_bytes(t)?)),
        Data::Text { file, content } => Ok((file.to_string(), content.as_bytes().to_vec())),
    }
}

/// Writes all files or none.
fn write_all(files: &[(PathBuf, Vec<u8>)]) -> Result<(), CliError> {
    let mut staged = Vec::new();
    for (path, bytes) in files {
        let mut tmp = path.clone().into_os_string();
        tmp.push(".partial");
        let tmp = PathBuf::from(tmp);
        let res = fs::File::create(&tmp).and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()));
        if let Err(e) = res {
            for t in staged.iter().chain(std::iter::once(&tmp)) {
                let _ = fs::remove_file(t);
            }
            return Err(io(format!("{}: {e}", path.display())));
        }
        staged.push(tmp);
    }
    for ((path, _), tmp) in files.iter().zip(&staged) {
        fs::rename(tmp, path).map_err(|e| io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Emits a report; returns the paths written.
pub fn emit(
    exp: &Experiment,
    report: &Report,
    out_dir: Option<&Path>,
    format: Format,
) -> Result<Vec<PathBuf>, CliError> {
    let name = exp.operation.name();
    match out_dir {
        None => {
            let bytes = match format {
                Format::Csv => data_bytes(report)?.1,
                Format::Json => report_json(exp, report, true)?,
            };
            std::io::stdout().write_all(&bytes).map_err(io)?;
            Ok(Vec::new())
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io(format!("{}: {e}", dir.display())))?;
            let mut files = Vec::new();
            match format {
                Format::Csv => {
                    let (file, bytes) = data_bytes(report)?;
                    let file = if file.is_empty() { format!("{name}.csv") } else { file };
                    files.push((dir.join(file), bytes));
                    files.push((dir.join(format!("{name}.json")), report_json(exp, report, false)?));
                }
                Format::Json => files.push((dir.join(format!("{name}.json")), report_json(exp, report, true)?)),
            }
            write_all(&files)?;
            Ok(files.into_iter().map(|f| f.0).collect())
        }
    }
}
