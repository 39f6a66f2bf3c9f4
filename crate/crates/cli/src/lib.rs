//! Command-line companion to the core library: file IO for the pinned
//! formats, key=value run configuration, the pipeline subcommands, and the
//! latency microbenchmark.

pub mod bench;
pub mod commands;
pub mod config;
pub mod io;

use std::fmt;

use dualstream_core::autoencoder::{CorpusError, ModelCodecError};
use dualstream_core::fusion::{CalibrationError, CalibrationFormatError, HealthFormatError};
use dualstream_core::stats::StatsError;
use dualstream_core::synthgen::SynthError;
use dualstream_core::telemetry::{ParseError, TelemetryError};

/// Process exit codes, one per failure family. Usage errors raised by the
/// argument parser itself also exit with [`exit_code::USAGE`].
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const CALIBRATION: i32 = 4;
    pub const MODEL_FORMAT: i32 = 5;
}

/// Command failure tagged with its exit-code family.
///
/// `Parse` covers malformed telemetry, metadata, config, health, and
/// calibration file *content*; `Calibration` covers a missing calibration
/// file and unsatisfied calibration preconditions; `ModelFormat` covers
/// model files that fail decoding or checksum; `Other` is IO and data-volume
/// problems.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Calibration(String),
    ModelFormat(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit_code::USAGE,
            CliError::Parse(_) => exit_code::PARSE,
            CliError::Calibration(_) => exit_code::CALIBRATION,
            CliError::ModelFormat(_) => exit_code::MODEL_FORMAT,
            CliError::Other(_) => exit_code::OTHER,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg)
            | CliError::Parse(msg)
            | CliError::Calibration(msg)
            | CliError::ModelFormat(msg)
            | CliError::Other(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<TelemetryError> for CliError {
    fn from(e: TelemetryError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<HealthFormatError> for CliError {
    fn from(e: HealthFormatError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<CalibrationFormatError> for CliError {
    fn from(e: CalibrationFormatError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::Calibration(e.to_string())
    }
}

impl From<ModelCodecError> for CliError {
    fn from(e: ModelCodecError) -> Self {
        CliError::ModelFormat(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Other(e.to_string())
    }
}
