//! Batch experiment runner behind the `hvsim` binary.

pub mod config;
pub mod emit;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{ConfigError, ExperimentConfig, Format, OutputSpec, ParamValue};
pub use emit::{emit, render, to_csv, to_json};
pub use experiments::{run, Experiment, ResultRecord, ResultRow, Status, EXIT_CONFIG_ERROR};

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_json(&text)
}

/// Every `*.json` config in `dir`, sorted by file name.
pub fn suite_configs(dir: &Path) -> Result<Vec<(PathBuf, ExperimentConfig)>, ConfigError> {
    let io = |source| ConfigError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| load_config(&p).map(|c| (p, c)))
        .collect()
}

/// One line per row: verdict, quantity, parameters, estimate and reference.
pub fn summary_lines(record: &ResultRecord) -> Vec<String> {
    record
        .rows
        .iter()
        .map(|r| {
            let verdict = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None if r.mean.is_none() => "UNDEF",
                None => "INFO",
            };
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let est = match (r.mean, r.std_error) {
                (Some(m), Some(se)) => format!("{m:.6} ± {se:.2e}"),
                (Some(m), None) => format!("{m:.6}"),
                _ => "undefined".to_string(),
            };
            let reference = r
                .reference
                .map(|x| format!(" ref {x:.6}"))
                .unwrap_or_default();
            let z = r.z_score.map(|z| format!(" z {z:.2}")).unwrap_or_default();
            format!(
                "{verdict:5} {} {} [{}] {est}{reference}{z}",
                record.config.experiment,
                r.quantity,
                params.join(" ")
            )
        })
        .collect()
}
