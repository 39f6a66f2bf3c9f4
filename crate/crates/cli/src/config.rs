//! Run configuration as a key=value file.
//!
//! One `key=value` per line; blank lines and `#` comments are ignored.
//! Recognized keys, all optional:
//!
//! - physics: `mass_kg` (default mission mass for generation), `c_rr`
//! - training: `learning_rate`, `beta1`, `beta2`, `epsilon`, `epochs`,
//!   `batch_size`, `clip_norm`
//! - fusion: `tau_ml`, `tau_phys`, `physics_aggregate` (`max` or `mean`)
//!
//! Unknown keys and out-of-range values are config errors; seeds come from
//! the command line, not the file, so one config can drive many runs.

use std::path::Path;

use dualstream_core::autoencoder::TrainConfig;
use dualstream_core::fusion::{FusionConfig, PhysicsAggregate};
use dualstream_core::physics::{PhysicsParams, C_RR_RANGE, DEFAULT_C_RR};
use dualstream_core::telemetry::MASS_RANGE;

use crate::{io, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Mission mass used by `generate` when `--mass` is absent.
    pub mass_kg: f64,
    pub c_rr: f64,
    pub train: TrainConfig,
    pub fusion: FusionConfig,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            mass_kg: 10900.0,
            c_rr: DEFAULT_C_RR,
            train: TrainConfig::default(),
            fusion: FusionConfig::default(),
        }
    }
}

impl RunConfig {
    /// Physics parameters for a window of the given mission mass.
    pub fn physics_for(&self, mass: f64) -> PhysicsParams {
        PhysicsParams { c_rr: self.c_rr, ..PhysicsParams::new(mass) }
    }
}

fn bad(key: &str, line: usize, why: &str) -> CliError {
    CliError::Parse(format!("config line {}: `{}` {}", line, key, why))
}

fn num(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| bad(key, line, "is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, line, "must be finite"))
    }
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("config line {}: not `key=value`", line)))?;
        let key = key.trim();
        match key {
            "mass_kg" => cfg.mass_kg = num(key, value, line)?,
            "c_rr" => cfg.c_rr = num(key, value, line)?,
            "learning_rate" => cfg.train.learning_rate = num(key, value, line)?,
            "beta1" => cfg.train.beta1 = num(key, value, line)?,
            "beta2" => cfg.train.beta2 = num(key, value, line)?,
            "epsilon" => cfg.train.epsilon = num(key, value, line)?,
            "epochs" => {
                cfg.train.epochs = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(key, line, "is not a count"))?;
            }
            "batch_size" => {
                cfg.train.batch_size = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(key, line, "is not a count"))?;
            }
            "clip_norm" => cfg.train.clip_norm = num(key, value, line)?,
            "tau_ml" => cfg.fusion.tau_ml = num(key, value, line)?,
            "tau_phys" => cfg.fusion.tau_phys = num(key, value, line)?,
            "physics_aggregate" => {
                cfg.fusion.physics_aggregate = PhysicsAggregate::parse(value.trim())
                    .ok_or_else(|| bad(key, line, "must be `max` or `mean`"))?;
            }
            _ => {
                return Err(CliError::Parse(format!(
                    "config line {}: unknown key `{}`",
                    line, key
                )))
            }
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if !(cfg.mass_kg >= MASS_RANGE.0 && cfg.mass_kg <= MASS_RANGE.1) {
        return Err(CliError::Parse(format!(
            "config: mass_kg must be within {}..{} kg",
            MASS_RANGE.0, MASS_RANGE.1
        )));
    }
    if !(cfg.c_rr >= C_RR_RANGE.0 && cfg.c_rr <= C_RR_RANGE.1) {
        return Err(CliError::Parse(format!(
            "config: c_rr must be within {}..{}",
            C_RR_RANGE.0, C_RR_RANGE.1
        )));
    }
    if !cfg.train.is_valid() {
        return Err(CliError::Parse("config: invalid training settings".into()));
    }
    if !cfg.fusion.is_valid() {
        return Err(CliError::Parse(
            "config: fusion thresholds must lie strictly inside (0, 1)".into(),
        ));
    }
    Ok(())
}

/// Load the config file, or defaults when no path is given.
pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = io::read_text(p)
                .map_err(|e| CliError::Parse(e.to_string()))?;
            parse(&text)
        }
    }
}
