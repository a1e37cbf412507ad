//! Runs the twin as an HTTP service and reproduces the case-study
//! campaigns from the command line.

pub mod evaluation;
pub mod reproduce;
pub mod server;

use std::path::PathBuf;

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "TWIN_DATA_DIR";

/// Data directory: `$TWIN_DATA_DIR`, else the `data/` directory shipped
/// with this crate.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"))
}

pub fn default_scenario() -> PathBuf {
    data_dir().join("scenario.toml")
}

pub fn default_questions() -> PathBuf {
    data_dir().join("questions.tsv")
}
