//! File formats: CSV for networks and trajectories, JSON for parameters.

use std::fs::File;
use std::path::Path;

use crate::error::{CliError, Result};

pub mod network;
pub mod params;
pub mod trajectories;

pub use network::{load_network, write_link_values, write_network, NetworkData, NetworkFormat};
pub use params::{align_phi, load_params, params_from_json, params_to_json, save_params};
pub use trajectories::{load_trajectories, load_trajectories_on, write_trajectories, LoadedTrajectories, TrajectoryLayout};

pub fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

pub fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        csv::ErrorKind::Utf8 { err, .. } => CliError::parse(path, line, format!("invalid UTF-8: {err}")),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            CliError::parse(path, line, format!("expected {expected_len} fields, found {len}"))
        }
        kind => CliError::parse(path, line, format!("{kind:?}")),
    }
}
