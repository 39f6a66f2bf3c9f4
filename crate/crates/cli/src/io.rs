//! File IO for the pinned formats: telemetry CSV + metadata sidecar pairs,
//! binary model files, calibration text, and health CSV.
//!
//! A mission on disk is `<stem>.csv` (telemetry records) next to
//! `<stem>.meta` (key=value sidecar with mission id, mass, and the optional
//! label track). Loading follows that pairing; everything else is a single
//! file per artifact.

use std::fs;
use std::path::{Path, PathBuf};

use dualstream_core::autoencoder::{decode_model, encode_model, AutoencoderModel};
use dualstream_core::checksum64;
use dualstream_core::fusion::{calibration_from_text, Calibration};
use dualstream_core::synthgen::Mission;
use dualstream_core::telemetry::{
    format_meta, format_telemetry, parse_meta, parse_telemetry, window_stream, MissionMeta,
    Window, Windowing,
};

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {}", path.display(), e)))
}

/// Write a file, creating parent directories as needed.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Other(format!("cannot create {}: {}", parent.display(), e))
            })?;
        }
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::Other(format!("cannot write {}: {}", path.display(), e)))
}

pub fn save_model(path: &Path, model: &AutoencoderModel) -> Result<(), CliError> {
    write_file(path, &encode_model(model))
}

pub fn load_model(path: &Path) -> Result<AutoencoderModel, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {}", path.display(), e)))?;
    decode_model(&bytes).map_err(|e| {
        CliError::ModelFormat(format!("{}: {}", path.display(), e))
    })
}

/// Load a calibration file. A missing or unreadable file is a calibration
/// error (the pipeline cannot run uncalibrated); malformed content is a
/// parse error.
pub fn load_calibration(path: &Path) -> Result<Calibration, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Calibration(format!("calibration file {}: {}", path.display(), e))
    })?;
    calibration_from_text(&text)
        .map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e)))
}

/// Write a mission as a `<mission_id>.csv` + `<mission_id>.meta` pair.
pub fn write_mission(dir: &Path, mission: &Mission) -> Result<PathBuf, CliError> {
    let csv_path = dir.join(format!("{}.csv", mission.mission_id));
    let meta_path = dir.join(format!("{}.meta", mission.mission_id));
    write_file(&csv_path, format_telemetry(&mission.samples).as_bytes())?;
    write_file(&meta_path, format_meta(&mission.meta()).as_bytes())?;
    Ok(csv_path)
}

/// One mission loaded from disk: sidecar metadata plus its windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMission {
    pub meta: MissionMeta,
    pub windowing: Windowing,
}

/// Load the `<stem>.csv` + `<stem>.meta` pair behind a telemetry path.
pub fn read_mission(csv_path: &Path) -> Result<LoadedMission, CliError> {
    let samples = parse_telemetry(&read_text(csv_path)?)
        .map_err(|e| CliError::Parse(format!("{}: {}", csv_path.display(), e)))?;
    let meta_path = csv_path.with_extension("meta");
    let meta = parse_meta(&read_text(&meta_path)?)
        .map_err(|e| CliError::Parse(format!("{}: {}", meta_path.display(), e)))?;
    let windowing = window_stream(
        &samples,
        &meta.mission_id,
        meta.mass_kg,
        meta.label_track.as_deref(),
    )
    .map_err(|e| CliError::Parse(format!("{}: {}", csv_path.display(), e)))?;
    Ok(LoadedMission { meta, windowing })
}

/// Telemetry CSV paths behind `path`: the file itself, or every `.csv`
/// inside the directory in name order (deterministic load order).
pub fn telemetry_paths(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = fs::read_dir(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {}", path.display(), e)))?;
    let mut paths = Vec::new();
    for entry in entries {
        let p = entry
            .map_err(|e| CliError::Other(format!("cannot read {}: {}", path.display(), e)))?
            .path();
        if p.extension().is_some_and(|ext| ext == "csv") {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Other(format!(
            "no telemetry .csv files under {}",
            path.display()
        )));
    }
    Ok(paths)
}

/// Aggregate discard accounting across a loaded mission set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscardStats {
    pub tail_dropped: usize,
    pub gap_windows: usize,
}

impl DiscardStats {
    /// Note dropped data on stderr; silent when nothing was dropped.
    pub fn report(&self) {
        if self.tail_dropped > 0 || self.gap_windows > 0 {
            eprintln!(
                "note: dropped {} trailing samples and {} gap-broken windows",
                self.tail_dropped, self.gap_windows
            );
        }
    }
}

/// Load every mission behind `path` (file or directory) into windows.
pub fn load_windows(path: &Path) -> Result<(Vec<Window>, DiscardStats), CliError> {
    let mut windows = Vec::new();
    let mut stats = DiscardStats::default();
    for csv_path in telemetry_paths(path)? {
        let loaded = read_mission(&csv_path)?;
        stats.tail_dropped += loaded.windowing.tail_dropped;
        stats.gap_windows += loaded.windowing.gap_windows;
        windows.extend(loaded.windowing.windows);
    }
    Ok((windows, stats))
}

/// Read every `.meta` sidecar in a directory, keyed by mission id.
pub fn load_meta_dir(dir: &Path) -> Result<Vec<MissionMeta>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Other(format!("cannot read {}: {}", dir.display(), e)))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "meta"))
        .collect();
    paths.sort();
    let mut metas = Vec::new();
    for p in paths {
        metas.push(
            parse_meta(&read_text(&p)?)
                .map_err(|e| CliError::Parse(format!("{}: {}", p.display(), e)))?,
        );
    }
    Ok(metas)
}

/// Order-sensitive digest of a mission set's on-disk representation.
pub fn corpus_digest(missions: &[Mission]) -> u64 {
    let mut bytes = Vec::new();
    for m in missions {
        bytes.extend_from_slice(format_telemetry(&m.samples).as_bytes());
        bytes.extend_from_slice(format_meta(&m.meta()).as_bytes());
    }
    checksum64(&bytes)
}
