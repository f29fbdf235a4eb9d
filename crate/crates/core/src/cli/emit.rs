//! Result files. JSON mirrors [`ResultRecord`]; CSV is long format with one
//! row per quantity and grid point and one column per parameter.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::config::{ConfigError, Format};
use super::experiments::ResultRecord;

/// Canonical JSON: wall-clock time is dropped so reruns are byte-identical.
pub fn to_json(record: &ResultRecord, with_timing: bool) -> String {
    let mut r = record.clone();
    if !with_timing {
        r.wall_clock_ms = None;
    }
    let mut s = serde_json::to_string_pretty(&r).expect("record is always serializable");
    s.push('\n');
    s
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(record: &ResultRecord) -> Result<String, ConfigError> {
    let names: BTreeSet<&str> = record
        .rows
        .iter()
        .flat_map(|r| r.params.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment", "quantity"];
    header.extend(names.iter().copied());
    header.extend(["n", "mean", "std_error", "reference", "z_score", "pass"]);
    w.write_record(&header)?;
    for row in &record.rows {
        let mut fields = vec![record.config.experiment.clone(), row.quantity.clone()];
        fields.extend(names.iter().map(|n| opt(row.params.get(*n))));
        fields.extend([
            opt(row.n),
            opt(row.mean),
            opt(row.std_error),
            opt(row.reference),
            opt(row.z_score),
            opt(row.pass),
        ]);
        w.write_record(&fields)?;
    }
    let bytes = w.into_inner().map_err(|e| ConfigError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(record: &ResultRecord, format: Format, with_timing: bool) -> Result<String, ConfigError> {
    match format {
        Format::Json => Ok(to_json(record, with_timing)),
        Format::Csv => to_csv(record),
    }
}

pub fn emit(record: &ResultRecord, format: Format, path: &Path, with_timing: bool) -> Result<(), ConfigError> {
    let body = render(record, format, with_timing)?;
    let io = |source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, body).map_err(io)
}
