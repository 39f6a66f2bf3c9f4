//! Stream fusion: min-max calibration of the five health channels, physics
//! aggregation into `w_phys_norm`, max fusion of the two streams, and
//! quadrant classification.
//!
//! Calibration is a one-shot reduction over a mission set; everything after
//! it is pure and thread-safe.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::autoencoder::AutoencoderModel;
use crate::physics::{physics_vector, PhysicsParams, PhysicsProxies};
use crate::telemetry::Window;

/// Calibration must see at least this many windows...
pub const MIN_CALIBRATION_WINDOWS: usize = 100;
/// ...spanning at least this many distinct missions.
pub const MIN_CALIBRATION_MISSIONS: usize = 2;
/// Default decision thresholds (tau_ml, tau_phys).
pub const DEFAULT_THRESHOLDS: (f64, f64) = (0.5, 0.5);

pub const HEALTH_HEADER: &str =
    "mission_id,window_idx,a_ml_raw,e_susp,e_lat,w_drive,e_brake,a_ml_norm,w_phys_norm,score,quadrant";
pub const CALIBRATION_HEADER: &str = "channel,min,max,degenerate";

/// The five calibrated health channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Channel {
    AMl,
    ESusp,
    ELat,
    WDrive,
    EBrake,
}

impl Channel {
    pub const ALL: [Channel; 5] =
        [Channel::AMl, Channel::ESusp, Channel::ELat, Channel::WDrive, Channel::EBrake];
    /// The physics subset, in proxy order.
    pub const PHYSICS: [Channel; 4] =
        [Channel::ESusp, Channel::ELat, Channel::WDrive, Channel::EBrake];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::AMl => "a_ml",
            Channel::ESusp => "e_susp",
            Channel::ELat => "e_lat",
            Channel::WDrive => "w_drive",
            Channel::EBrake => "e_brake",
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw value of one channel for one window.
pub fn channel_value(channel: Channel, a_ml: f64, proxies: &PhysicsProxies) -> f64 {
    match channel {
        Channel::AMl => a_ml,
        Channel::ESusp => proxies.e_susp,
        Channel::ELat => proxies.e_lat,
        Channel::WDrive => proxies.w_drive,
        Channel::EBrake => proxies.e_brake,
    }
}

/// Observed range of one channel over the calibration missions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelScale {
    pub min: f64,
    pub max: f64,
    /// A flat channel cannot signal; it normalizes to 0.
    pub degenerate: bool,
}

/// Per-channel min-max scales, in `Channel::ALL` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    scales: [ChannelScale; 5],
}

impl Calibration {
    pub fn from_scales(scales: [ChannelScale; 5]) -> Calibration {
        Calibration { scales }
    }

    pub fn scale(&self, channel: Channel) -> ChannelScale {
        self.scales[channel as usize]
    }

    pub fn degenerate_channels(&self) -> Vec<Channel> {
        Channel::ALL.into_iter().filter(|&c| self.scale(c).degenerate).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationError {
    TooFewWindows { got: usize },
    TooFewMissions { got: usize },
}

impl fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibrationError::TooFewWindows { got } => write!(
                f,
                "calibration needs at least {} windows, got {}",
                MIN_CALIBRATION_WINDOWS, got
            ),
            CalibrationError::TooFewMissions { got } => write!(
                f,
                "calibration needs windows from at least {} missions, got {}",
                MIN_CALIBRATION_MISSIONS, got
            ),
        }
    }
}

/// Fusion input outside the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRangeError {
    pub name: &'static str,
    pub value: f64,
}

impl fmt::Display for UnitRangeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} is outside [0, 1]", self.name, self.value)
    }
}

/// Both streams of one window, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHealth {
    pub mission_id: String,
    pub window_idx: usize,
    pub a_ml: f64,
    pub proxies: PhysicsProxies,
}

/// Run both streams over one window without normalizing.
pub fn raw_health(window: &Window, model: &AutoencoderModel, params: &PhysicsParams) -> RawHealth {
    let (proxies, _) = physics_vector(window, params);
    RawHealth {
        mission_id: window.mission_id.clone(),
        window_idx: window.index,
        a_ml: model.score(window),
        proxies,
    }
}

/// Reduce calibration windows to per-channel min-max scales.
pub fn calibrate(rows: &[RawHealth]) -> Result<Calibration, CalibrationError> {
    if rows.len() < MIN_CALIBRATION_WINDOWS {
        return Err(CalibrationError::TooFewWindows { got: rows.len() });
    }
    let missions: BTreeSet<&str> = rows.iter().map(|r| r.mission_id.as_str()).collect();
    if missions.len() < MIN_CALIBRATION_MISSIONS {
        return Err(CalibrationError::TooFewMissions { got: missions.len() });
    }
    let scales = Channel::ALL.map(|channel| {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for row in rows {
            let v = channel_value(channel, row.a_ml, &row.proxies);
            if v < min {
                min = v;
            }
            if v > max {
                max = v;
            }
        }
        ChannelScale { min, max, degenerate: !(max > min) }
    });
    Ok(Calibration { scales })
}

/// Min-max scale one raw channel value into [0, 1].
///
/// Values beyond the calibrated range clamp; a degenerate channel always
/// yields 0 because it carries no information.
pub fn normalize(value: f64, channel: Channel, cal: &Calibration) -> f64 {
    let scale = cal.scale(channel);
    if scale.degenerate {
        return 0.0;
    }
    ((value - scale.min) / (scale.max - scale.min)).clamp(0.0, 1.0)
}

/// How the four normalized proxies collapse into `w_phys_norm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhysicsAggregate {
    /// Preserves the worst single stress channel (default).
    Max,
    /// Average, available for sensitivity studies.
    Mean,
}

impl PhysicsAggregate {
    pub fn as_str(self) -> &'static str {
        match self {
            PhysicsAggregate::Max => "max",
            PhysicsAggregate::Mean => "mean",
        }
    }

    pub fn parse(s: &str) -> Option<PhysicsAggregate> {
        match s {
            "max" => Some(PhysicsAggregate::Max),
            "mean" => Some(PhysicsAggregate::Mean),
            _ => None,
        }
    }
}

/// Collapse the normalized physics channels into one unit-interval scalar.
pub fn aggregate_physics(
    proxies: &PhysicsProxies,
    cal: &Calibration,
    aggregate: PhysicsAggregate,
) -> f64 {
    let normalized = Channel::PHYSICS.map(|c| normalize(channel_value(c, 0.0, proxies), c, cal));
    match aggregate {
        PhysicsAggregate::Max => normalized.into_iter().fold(0.0, f64::max),
        PhysicsAggregate::Mean => normalized.iter().sum::<f64>() / normalized.len() as f64,
    }
}

/// Fuse the two normalized stream scores by max-pooling.
pub fn fuse(a_ml_norm: f64, w_phys_norm: f64) -> Result<f64, UnitRangeError> {
    if !(0.0..=1.0).contains(&a_ml_norm) {
        return Err(UnitRangeError { name: "a_ml_norm", value: a_ml_norm });
    }
    if !(0.0..=1.0).contains(&w_phys_norm) {
        return Err(UnitRangeError { name: "w_phys_norm", value: w_phys_norm });
    }
    Ok(a_ml_norm.max(w_phys_norm))
}

/// Decision quadrants, ordered by escalation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quadrant {
    NormalMonitoring,
    DrivetrainFatigue,
    SuspensionChassisRisk,
    ImmediateInspection,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::NormalMonitoring,
        Quadrant::DrivetrainFatigue,
        Quadrant::SuspensionChassisRisk,
        Quadrant::ImmediateInspection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::NormalMonitoring => "NormalMonitoring",
            Quadrant::DrivetrainFatigue => "DrivetrainFatigue",
            Quadrant::SuspensionChassisRisk => "SuspensionChassisRisk",
            Quadrant::ImmediateInspection => "ImmediateInspection",
        }
    }

    pub fn parse(s: &str) -> Option<Quadrant> {
        Quadrant::ALL.into_iter().find(|q| q.as_str() == s)
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quadrant truth table over the two threshold comparisons; `>=` is high.
pub fn classify(a_ml_norm: f64, w_phys_norm: f64, thresholds: (f64, f64)) -> Quadrant {
    let (tau_ml, tau_phys) = thresholds;
    debug_assert!(tau_ml > 0.0 && tau_ml < 1.0 && tau_phys > 0.0 && tau_phys < 1.0);
    match (a_ml_norm >= tau_ml, w_phys_norm >= tau_phys) {
        (false, false) => Quadrant::NormalMonitoring,
        (false, true) => Quadrant::DrivetrainFatigue,
        (true, false) => Quadrant::SuspensionChassisRisk,
        (true, true) => Quadrant::ImmediateInspection,
    }
}

/// Thresholds and the physics aggregation switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub tau_ml: f64,
    pub tau_phys: f64,
    pub physics_aggregate: PhysicsAggregate,
}

impl Default for FusionConfig {
    fn default() -> FusionConfig {
        FusionConfig {
            tau_ml: DEFAULT_THRESHOLDS.0,
            tau_phys: DEFAULT_THRESHOLDS.1,
            physics_aggregate: PhysicsAggregate::Max,
        }
    }
}

impl FusionConfig {
    pub fn is_valid(&self) -> bool {
        self.tau_ml > 0.0 && self.tau_ml < 1.0 && self.tau_phys > 0.0 && self.tau_phys < 1.0
    }
}

/// One fused, classified window.
#[derive(Debug, Clone, PartialEq)]
pub struct HealthVector {
    pub mission_id: String,
    pub window_idx: usize,
    pub a_ml_raw: f64,
    pub proxies: PhysicsProxies,
    pub a_ml_norm: f64,
    pub w_phys_norm: f64,
    pub score: f64,
    pub quadrant: Quadrant,
}

/// Run both streams over one window, normalize, fuse, and classify.
pub fn health_pipeline(
    window: &Window,
    model: &AutoencoderModel,
    params: &PhysicsParams,
    cal: &Calibration,
    config: &FusionConfig,
) -> HealthVector {
    let raw = raw_health(window, model, params);
    fused_health(&raw, cal, config)
}

/// Normalize, fuse, and classify an already-computed raw pair.
pub fn fused_health(raw: &RawHealth, cal: &Calibration, config: &FusionConfig) -> HealthVector {
    let a_ml_norm = normalize(raw.a_ml, Channel::AMl, cal);
    let w_phys_norm = aggregate_physics(&raw.proxies, cal, config.physics_aggregate);
    let score = fuse(a_ml_norm, w_phys_norm).expect("normalized scores are clamped to [0, 1]");
    let quadrant = classify(a_ml_norm, w_phys_norm, (config.tau_ml, config.tau_phys));
    HealthVector {
        mission_id: raw.mission_id.clone(),
        window_idx: raw.window_idx,
        a_ml_raw: raw.a_ml,
        proxies: raw.proxies,
        a_ml_norm,
        w_phys_norm,
        score,
        quadrant,
    }
}

pub fn format_health(h: &HealthVector) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        h.mission_id,
        h.window_idx,
        h.a_ml_raw,
        h.proxies.e_susp,
        h.proxies.e_lat,
        h.proxies.w_drive,
        h.proxies.e_brake,
        h.a_ml_norm,
        h.w_phys_norm,
        h.score,
        h.quadrant
    )
}

/// Health records as CSV text, header line first.
pub fn health_to_csv(rows: &[HealthVector]) -> String {
    let mut out = String::from(HEALTH_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format_health(row));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalibrationFormatError {
    MissingHeader,
    BadLine { line: usize },
    UnknownChannel { line: usize },
    DuplicateChannel { line: usize },
    MissingChannel(&'static str),
    /// min/max not finite, max < min, or flag inconsistent with the range.
    BadScale { line: usize },
}

impl fmt::Display for CalibrationFormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibrationFormatError::MissingHeader => {
                write!(f, "calibration file must start with `{}`", CALIBRATION_HEADER)
            }
            CalibrationFormatError::BadLine { line } => {
                write!(f, "line {}: expected `channel,min,max,degenerate`", line)
            }
            CalibrationFormatError::UnknownChannel { line } => {
                write!(f, "line {}: unknown channel name", line)
            }
            CalibrationFormatError::DuplicateChannel { line } => {
                write!(f, "line {}: channel listed twice", line)
            }
            CalibrationFormatError::MissingChannel(name) => {
                write!(f, "channel `{}` missing from calibration file", name)
            }
            CalibrationFormatError::BadScale { line } => {
                write!(f, "line {}: invalid channel scale", line)
            }
        }
    }
}

/// Calibration as key-value text: one `channel,min,max,degenerate` line per
/// channel after the header.
pub fn calibration_to_text(cal: &Calibration) -> String {
    let mut out = String::from(CALIBRATION_HEADER);
    out.push('\n');
    for channel in Channel::ALL {
        let s = cal.scale(channel);
        out.push_str(&format!(
            "{},{},{},{}\n",
            channel,
            s.min,
            s.max,
            if s.degenerate { 1 } else { 0 }
        ));
    }
    out
}

pub fn calibration_from_text(text: &str) -> Result<Calibration, CalibrationFormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header == CALIBRATION_HEADER => {}
        _ => return Err(CalibrationFormatError::MissingHeader),
    }
    let mut scales = [None; 5];
    for (line, text) in lines {
        let mut fields = text.split(',');
        let (name, min, max, flag) =
            match (fields.next(), fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(n), Some(a), Some(b), Some(f), None) => (n, a, b, f),
                _ => return Err(CalibrationFormatError::BadLine { line }),
            };
        let channel = Channel::parse(name.trim())
            .ok_or(CalibrationFormatError::UnknownChannel { line })?;
        let min: f64 = min
            .trim()
            .parse()
            .map_err(|_| CalibrationFormatError::BadLine { line })?;
        let max: f64 = max
            .trim()
            .parse()
            .map_err(|_| CalibrationFormatError::BadLine { line })?;
        let degenerate = match flag.trim() {
            "0" => false,
            "1" => true,
            _ => return Err(CalibrationFormatError::BadLine { line }),
        };
        if !min.is_finite() || !max.is_finite() || max < min || degenerate != !(max > min) {
            return Err(CalibrationFormatError::BadScale { line });
        }
        let slot = &mut scales[channel as usize];
        if slot.is_some() {
            return Err(CalibrationFormatError::DuplicateChannel { line });
        }
        *slot = Some(ChannelScale { min, max, degenerate });
    }
    for channel in Channel::ALL {
        if scales[channel as usize].is_none() {
            return Err(CalibrationFormatError::MissingChannel(channel.as_str()));
        }
    }
    Ok(Calibration { scales: scales.map(|s| s.unwrap()) })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HealthFormatError {
    MissingHeader,
    BadLine { line: usize },
    BadQuadrant { line: usize },
}

impl fmt::Display for HealthFormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HealthFormatError::MissingHeader => {
                write!(f, "health file must start with `{}`", HEALTH_HEADER)
            }
            HealthFormatError::BadLine { line } => {
                write!(f, "line {}: expected 11 health fields", line)
            }
            HealthFormatError::BadQuadrant { line } => {
                write!(f, "line {}: unknown quadrant name", line)
            }
        }
    }
}

/// Parse health CSV text produced by [`health_to_csv`].
pub fn health_from_csv(text: &str) -> Result<Vec<HealthVector>, HealthFormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header == HEALTH_HEADER => {}
        _ => return Err(HealthFormatError::MissingHeader),
    }
    let mut rows = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 11 {
            return Err(HealthFormatError::BadLine { line });
        }
        let num = |s: &str| -> Result<f64, HealthFormatError> {
            let v: f64 = s.trim().parse().map_err(|_| HealthFormatError::BadLine { line })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(HealthFormatError::BadLine { line })
            }
        };
        let window_idx: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| HealthFormatError::BadLine { line })?;
        let quadrant = Quadrant::parse(fields[10].trim())
            .ok_or(HealthFormatError::BadQuadrant { line })?;
        rows.push(HealthVector {
            mission_id: String::from(fields[0].trim()),
            window_idx,
            a_ml_raw: num(fields[2])?,
            proxies: PhysicsProxies {
                e_susp: num(fields[3])?,
                e_lat: num(fields[4])?,
                w_drive: num(fields[5])?,
                e_brake: num(fields[6])?,
            },
            a_ml_norm: num(fields[7])?,
            w_phys_norm: num(fields[8])?,
            score: num(fields[9])?,
            quadrant,
        });
    }
    Ok(rows)
}
