//! Telemetry types, record parsing, windowing, and mission-level splitting.
//!
//! A mission is a time-ordered stream of IMU + speed samples at 10 Hz. The
//! monitoring unit is the non-overlapping 30-sample window (3 s nominal,
//! 2.9 s spanned by 29 intervals). Windows never cross missions, trailing
//! partial windows are dropped and counted, and a timestamp gap larger than
//! [`MAX_GAP_S`] inside a would-be window discards that window while the
//! stream continues.
//!
//! Text formats handled here are pure string transforms so they stay usable
//! without std: the telemetry CSV (`t,ax,ay,az,v,theta` header, `#` comments)
//! and the key=value mission sidecar.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per window.
pub const WINDOW_LEN: usize = 30;
/// Nominal sample spacing in seconds.
pub const DT: f64 = 0.1;
/// A consecutive-timestamp gap above this discards the containing window.
pub const MAX_GAP_S: f64 = 0.3;
/// Exact header line of the telemetry CSV format.
pub const TELEMETRY_HEADER: &str = "t,ax,ay,az,v,theta";

/// Inclusive vehicle mass range in kg accepted for windows.
pub const MASS_RANGE: (f64, f64) = (1000.0, 60000.0);

/// One telemetry sample. Body-frame accelerations in m/s^2 (`a_z` includes
/// gravity), speed in m/s, pitch in rad when the source provides it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub a_x: f64,
    pub a_y: f64,
    pub a_z: f64,
    pub v: f64,
    pub theta: Option<f64>,
}

/// Ground-truth window condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Normal,
    Pothole,
    Ramp,
    RoughTerrain,
}

impl Label {
    pub const ALL: [Label; 4] = [
        Label::Normal,
        Label::Pothole,
        Label::Ramp,
        Label::RoughTerrain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "Normal",
            Label::Pothole => "Pothole",
            Label::Ramp => "Ramp",
            Label::RoughTerrain => "RoughTerrain",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "Normal" => Some(Label::Normal),
            "Pothole" => Some(Label::Pothole),
            "Ramp" => Some(Label::Ramp),
            "RoughTerrain" => Some(Label::RoughTerrain),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A 30-sample monitoring window with mission provenance.
///
/// `index` is the chunk position on the mission timeline (gap-discarded
/// chunks still advance it), so it aligns with sidecar label tracks and is
/// stable across re-runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub mission_id: String,
    pub index: usize,
    pub mass: f64,
    pub label: Option<Label>,
    samples: Vec<Sample>,
}

impl Window {
    pub fn new(
        mission_id: String,
        index: usize,
        mass: f64,
        label: Option<Label>,
        samples: Vec<Sample>,
    ) -> Result<Window, TelemetryError> {
        if samples.len() != WINDOW_LEN {
            return Err(TelemetryError::BadWindowLength { got: samples.len() });
        }
        if !(mass >= MASS_RANGE.0 && mass <= MASS_RANGE.1) {
            return Err(TelemetryError::MassOutOfRange { mass });
        }
        for i in 1..samples.len() {
            if samples[i].t < samples[i - 1].t {
                return Err(TelemetryError::UnorderedSamples { index: i });
            }
        }
        Ok(Window {
            mission_id,
            index,
            mass,
            label,
            samples,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }
}

/// Record-level parse failure modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    BadHeader,
    FieldCount { got: usize },
    Malformed { field: &'static str },
    NonFinite { field: &'static str },
    NegativeSpeed,
    PitchOutOfRange,
    NonMonotonicTime,
}

/// Parse failure carrying the 1-based source line number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParseErrorKind::BadHeader => {
                write!(f, "line {}: expected header `{}`", self.line, TELEMETRY_HEADER)
            }
            ParseErrorKind::FieldCount { got } => {
                write!(f, "line {}: expected 6 fields, got {}", self.line, got)
            }
            ParseErrorKind::Malformed { field } => {
                write!(f, "line {}: malformed field `{}`", self.line, field)
            }
            ParseErrorKind::NonFinite { field } => {
                write!(f, "line {}: non-finite value in field `{}`", self.line, field)
            }
            ParseErrorKind::NegativeSpeed => write!(f, "line {}: negative speed", self.line),
            ParseErrorKind::PitchOutOfRange => {
                write!(f, "line {}: |theta| must be < pi/2", self.line)
            }
            ParseErrorKind::NonMonotonicTime => {
                write!(f, "line {}: timestamps must be non-decreasing", self.line)
            }
        }
    }
}

/// Errors from windowing, metadata, and splitting.
#[derive(Debug, Clone, PartialEq)]
pub enum TelemetryError {
    Parse(ParseError),
    BadWindowLength { got: usize },
    MassOutOfRange { mass: f64 },
    UnorderedSamples { index: usize },
    InsufficientMissions { got: usize },
    BadRatios,
    MetaMissingKey(&'static str),
    MetaMalformed { line: usize },
}

impl fmt::Display for TelemetryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TelemetryError::Parse(e) => e.fmt(f),
            TelemetryError::BadWindowLength { got } => {
                write!(f, "window must hold {} samples, got {}", WINDOW_LEN, got)
            }
            TelemetryError::MassOutOfRange { mass } => {
                write!(f, "mass {} kg outside {}..{} kg", mass, MASS_RANGE.0, MASS_RANGE.1)
            }
            TelemetryError::UnorderedSamples { index } => {
                write!(f, "samples not time-ordered at offset {}", index)
            }
            TelemetryError::InsufficientMissions { got } => {
                write!(f, "split needs at least 3 missions, got {}", got)
            }
            TelemetryError::BadRatios => write!(f, "split ratios must be >= 0 and sum to 1"),
            TelemetryError::MetaMissingKey(k) => write!(f, "metadata missing key `{}`", k),
            TelemetryError::MetaMalformed { line } => {
                write!(f, "metadata line {} is not `key=value`", line)
            }
        }
    }
}

impl From<ParseError> for TelemetryError {
    fn from(e: ParseError) -> Self {
        TelemetryError::Parse(e)
    }
}

fn parse_float(s: &str, field: &'static str, line: usize) -> Result<f64, ParseError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| ParseError { line, kind: ParseErrorKind::Malformed { field } })?;
    if !v.is_finite() {
        return Err(ParseError { line, kind: ParseErrorKind::NonFinite { field } });
    }
    Ok(v)
}

/// Parse one record line (`t,ax,ay,az,v,theta`, theta may be empty).
pub fn parse_record(line: &str, line_no: usize) -> Result<Sample, ParseError> {
    let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
    if fields.len() != 6 {
        return Err(ParseError {
            line: line_no,
            kind: ParseErrorKind::FieldCount { got: fields.len() },
        });
    }
    let t = parse_float(fields[0], "t", line_no)?;
    let a_x = parse_float(fields[1], "ax", line_no)?;
    let a_y = parse_float(fields[2], "ay", line_no)?;
    let a_z = parse_float(fields[3], "az", line_no)?;
    let v = parse_float(fields[4], "v", line_no)?;
    if v < 0.0 {
        return Err(ParseError { line: line_no, kind: ParseErrorKind::NegativeSpeed });
    }
    let theta = if fields[5].trim().is_empty() {
        None
    } else {
        let th = parse_float(fields[5], "theta", line_no)?;
        if !(th.abs() < core::f64::consts::FRAC_PI_2) {
            return Err(ParseError { line: line_no, kind: ParseErrorKind::PitchOutOfRange });
        }
        Some(th)
    };
    Ok(Sample { t, a_x, a_y, a_z, v, theta })
}

/// Format one record line; floats round-trip exactly through [`parse_record`].
pub fn format_record(s: &Sample) -> String {
    let theta = match s.theta {
        Some(th) => th.to_string(),
        None => String::new(),
    };
    format!("{},{},{},{},{},{}", s.t, s.a_x, s.a_y, s.a_z, s.v, theta)
}

/// Parse a whole telemetry text: header, `#` comments and blank lines
/// ignored, records validated, timestamps non-decreasing.
pub fn parse_telemetry(text: &str) -> Result<Vec<Sample>, ParseError> {
    let mut samples = Vec::new();
    let mut header_seen = false;
    let mut prev_t = f64::NEG_INFINITY;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != TELEMETRY_HEADER {
                return Err(ParseError { line: line_no, kind: ParseErrorKind::BadHeader });
            }
            header_seen = true;
            continue;
        }
        let s = parse_record(raw, line_no)?;
        if s.t < prev_t {
            return Err(ParseError { line: line_no, kind: ParseErrorKind::NonMonotonicTime });
        }
        prev_t = s.t;
        samples.push(s);
    }
    if !header_seen {
        return Err(ParseError { line: 1, kind: ParseErrorKind::BadHeader });
    }
    Ok(samples)
}

/// Render samples as telemetry text with header.
pub fn format_telemetry(samples: &[Sample]) -> String {
    let mut out = String::with_capacity(samples.len() * 48 + 32);
    out.push_str(TELEMETRY_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format_record(s));
        out.push('\n');
    }
    out
}

/// Mission sidecar metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionMeta {
    pub mission_id: String,
    pub mass_kg: f64,
    /// Per-chunk ground-truth labels, aligned with window `index`.
    pub label_track: Option<Vec<Label>>,
}

/// Parse a key=value sidecar (`mission_id`, `mass_kg`, optional
/// `label_track` as a comma list).
pub fn parse_meta(text: &str) -> Result<MissionMeta, TelemetryError> {
    let mut mission_id = None;
    let mut mass_kg = None;
    let mut label_track = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(TelemetryError::MetaMalformed { line: line_no })?;
        match key.trim() {
            "mission_id" => mission_id = Some(value.trim().to_string()),
            "mass_kg" => {
                let m: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| TelemetryError::MetaMalformed { line: line_no })?;
                mass_kg = Some(m);
            }
            "label_track" => {
                let mut track = Vec::new();
                for part in value.trim().split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    let l = Label::parse(part)
                        .ok_or(TelemetryError::MetaMalformed { line: line_no })?;
                    track.push(l);
                }
                label_track = Some(track);
            }
            _ => return Err(TelemetryError::MetaMalformed { line: line_no }),
        }
    }
    Ok(MissionMeta {
        mission_id: mission_id.ok_or(TelemetryError::MetaMissingKey("mission_id"))?,
        mass_kg: mass_kg.ok_or(TelemetryError::MetaMissingKey("mass_kg"))?,
        label_track,
    })
}

/// Render sidecar metadata as key=value text.
pub fn format_meta(meta: &MissionMeta) -> String {
    let mut out = format!("mission_id={}\nmass_kg={}\n", meta.mission_id, meta.mass_kg);
    if let Some(track) = &meta.label_track {
        out.push_str("label_track=");
        for (i, l) in track.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(l.as_str());
        }
        out.push('\n');
    }
    out
}

/// Windowing output: emitted windows plus discard accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Windowing {
    pub windows: Vec<Window>,
    /// Samples in the trailing partial window.
    pub tail_dropped: usize,
    /// Full chunks discarded because of an internal timestamp gap.
    pub gap_windows: usize,
}

/// Chunk a mission into non-overlapping 30-sample windows.
///
/// `labels`, when present, is indexed by chunk position (the emitted window
/// `index`), as written by the synthetic generator's label track.
pub fn window_stream(
    samples: &[Sample],
    mission_id: &str,
    mass: f64,
    labels: Option<&[Label]>,
) -> Result<Windowing, TelemetryError> {
    for i in 1..samples.len() {
        if samples[i].t < samples[i - 1].t {
            return Err(TelemetryError::UnorderedSamples { index: i });
        }
    }
    let n_chunks = samples.len() / WINDOW_LEN;
    let tail_dropped = samples.len() - n_chunks * WINDOW_LEN;
    let mut windows = Vec::with_capacity(n_chunks);
    let mut gap_windows = 0;
    for chunk_idx in 0..n_chunks {
        let chunk = &samples[chunk_idx * WINDOW_LEN..(chunk_idx + 1) * WINDOW_LEN];
        let has_gap = chunk
            .windows(2)
            .any(|pair| pair[1].t - pair[0].t > MAX_GAP_S);
        if has_gap {
            gap_windows += 1;
            continue;
        }
        let label = labels.and_then(|ls| ls.get(chunk_idx).copied());
        windows.push(Window::new(
            mission_id.to_string(),
            chunk_idx,
            mass,
            label,
            chunk.to_vec(),
        )?);
    }
    Ok(Windowing { windows, tail_dropped, gap_windows })
}

/// Mission-level split result.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Window>,
    pub val: Vec<Window>,
    pub test: Vec<Window>,
}

/// Partition windows into train/val/test by whole missions.
///
/// Mission ids are shuffled with a seeded RNG and allocated by largest
/// remainder, so the ratios are hit within one mission and the same seed
/// always reproduces the same split. A mission never spans splits.
pub fn split_by_mission(
    windows: Vec<Window>,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<Split, TelemetryError> {
    let (r_train, r_val, r_test) = ratios;
    let sum = r_train + r_val + r_test;
    if !(r_train >= 0.0 && r_val >= 0.0 && r_test >= 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(TelemetryError::BadRatios);
    }

    let mut missions: Vec<String> = Vec::new();
    for w in &windows {
        if !missions.contains(&w.mission_id) {
            missions.push(w.mission_id.clone());
        }
    }
    if missions.len() < 3 {
        return Err(TelemetryError::InsufficientMissions { got: missions.len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    missions.shuffle(&mut rng);

    let m = missions.len();
    let targets = [r_train * m as f64, r_val * m as f64, r_test * m as f64];
    let mut counts = [0usize; 3];
    let mut fracs = [0f64; 3];
    for i in 0..3 {
        counts[i] = targets[i] as usize;
        fracs[i] = targets[i] - counts[i] as f64;
    }
    let mut remaining = m - counts.iter().sum::<usize>();
    while remaining > 0 {
        let mut best = 0;
        for i in 1..3 {
            if fracs[i] > fracs[best] {
                best = i;
            }
        }
        counts[best] += 1;
        fracs[best] = -1.0;
        remaining -= 1;
    }

    let train_ids = &missions[..counts[0]];
    let val_ids = &missions[counts[0]..counts[0] + counts[1]];

    let mut split = Split { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for w in windows {
        if train_ids.contains(&w.mission_id) {
            split.train.push(w);
        } else if val_ids.contains(&w.mission_id) {
            split.val.push(w);
        } else {
            split.test.push(w);
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn sample_at(i: usize) -> Sample {
        Sample {
            t: i as f64 * DT,
            a_x: 0.1,
            a_y: -0.05,
            a_z: 9.81,
            v: 15.0,
            theta: Some(0.002),
        }
    }

    fn run(n: usize) -> Vec<Sample> {
        (0..n).map(sample_at).collect()
    }

    #[test]
    fn parses_full_record() {
        let s = parse_record("0.0,0.12,-0.05,9.81,15.2,0.002", 1).unwrap();
        assert_eq!(s.t, 0.0);
        assert_eq!(s.a_x, 0.12);
        assert_eq!(s.a_y, -0.05);
        assert_eq!(s.a_z, 9.81);
        assert_eq!(s.v, 15.2);
        assert_eq!(s.theta, Some(0.002));
    }

    #[test]
    fn empty_theta_is_none() {
        let s = parse_record("0.1,0.0,0.0,9.8,10.0,", 2).unwrap();
        assert_eq!(s.theta, None);
    }

    #[test]
    fn record_error_kinds() {
        let k = |r: Result<Sample, ParseError>| r.unwrap_err().kind;
        assert_eq!(
            k(parse_record("0,0,0,9.8,10", 5)),
            ParseErrorKind::FieldCount { got: 5 }
        );
        assert_eq!(
            k(parse_record("0,zzz,0,9.8,10,", 5)),
            ParseErrorKind::Malformed { field: "ax" }
        );
        assert_eq!(
            k(parse_record("0,NaN,0,9.8,10,", 5)),
            ParseErrorKind::NonFinite { field: "ax" }
        );
        assert_eq!(k(parse_record("0,0,0,9.8,-1,", 5)), ParseErrorKind::NegativeSpeed);
        assert_eq!(
            k(parse_record("0,0,0,9.8,10,1.6", 5)),
            ParseErrorKind::PitchOutOfRange
        );
        assert_eq!(parse_record("0,0,0,9.8,10,1.6", 7).unwrap_err().line, 7);
    }

    #[test]
    fn telemetry_text_roundtrip_and_comments() {
        let text = "# unit comment\nt,ax,ay,az,v,theta\n0,0.1,0.2,9.8,12,\n\n# mid comment\n0.1,0.2,0.3,9.9,12.1,0.01\n";
        let samples = parse_telemetry(text).unwrap();
        assert_eq!(samples.len(), 2);
        let rendered = format_telemetry(&samples);
        assert_eq!(parse_telemetry(&rendered).unwrap(), samples);
    }

    #[test]
    fn bad_header_rejected() {
        let err = parse_telemetry("time,ax,ay,az,v,theta\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadHeader);
        let err = parse_telemetry("").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadHeader);
    }

    #[test]
    fn non_monotonic_time_rejected() {
        let text = "t,ax,ay,az,v,theta\n0.2,0,0,9.8,10,\n0.1,0,0,9.8,10,\n";
        let err = parse_telemetry(text).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonMonotonicTime);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn windows_95_samples_into_3_plus_tail() {
        let w = window_stream(&run(95), "m1", 10000.0, None).unwrap();
        assert_eq!(w.windows.len(), 3);
        assert_eq!(w.tail_dropped, 5);
        assert_eq!(w.gap_windows, 0);
        assert_eq!(
            w.windows.iter().map(|w| w.index).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn gap_discards_middle_window_and_continues() {
        let mut samples = run(90);
        // open a 0.5 s hole inside chunk 1 (samples 30..59)
        for s in samples.iter_mut().skip(40) {
            s.t += 0.5;
        }
        let w = window_stream(&samples, "m1", 10000.0, None).unwrap();
        assert_eq!(w.gap_windows, 1);
        assert_eq!(
            w.windows.iter().map(|w| w.index).collect::<Vec<_>>(),
            vec![0, 2]
        );
    }

    #[test]
    fn label_track_applies_by_chunk_index() {
        let labels = vec![Label::Normal, Label::Pothole, Label::Normal];
        let w = window_stream(&run(90), "m1", 8300.0, Some(&labels)).unwrap();
        assert_eq!(w.windows[1].label, Some(Label::Pothole));
        assert_eq!(w.windows[2].label, Some(Label::Normal));
    }

    #[test]
    fn mass_outside_range_rejected() {
        let err = window_stream(&run(30), "m1", 999.0, None).unwrap_err();
        assert!(matches!(err, TelemetryError::MassOutOfRange { .. }));
    }

    fn windows_for_missions(n_missions: usize) -> Vec<Window> {
        let mut all = Vec::new();
        for m in 0..n_missions {
            let id = format!("mission_{m:03}");
            let mut w = window_stream(&run(60), &id, 10000.0, None).unwrap();
            all.append(&mut w.windows);
        }
        all
    }

    #[test]
    fn split_10_missions_is_7_2_1_and_stratified() {
        let split = split_by_mission(windows_for_missions(10), (0.70, 0.15, 0.15), 42).unwrap();
        let ids = |ws: &[Window]| {
            let mut v: Vec<&str> = ws.iter().map(|w| w.mission_id.as_str()).collect();
            v.dedup();
            v.len()
        };
        assert_eq!(ids(&split.train), 7);
        assert_eq!(ids(&split.val), 2);
        assert_eq!(ids(&split.test), 1);
        // no mission appears in two splits
        for w in &split.train {
            assert!(!split.val.iter().any(|x| x.mission_id == w.mission_id));
            assert!(!split.test.iter().any(|x| x.mission_id == w.mission_id));
        }
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let a = split_by_mission(windows_for_missions(9), (0.70, 0.15, 0.15), 7).unwrap();
        let b = split_by_mission(windows_for_missions(9), (0.70, 0.15, 0.15), 7).unwrap();
        assert_eq!(a, b);
        let c = split_by_mission(windows_for_missions(9), (0.70, 0.15, 0.15), 8).unwrap();
        assert!(a != c, "different seed should reshuffle missions");
    }

    #[test]
    fn split_needs_three_missions() {
        let err = split_by_mission(windows_for_missions(2), (0.70, 0.15, 0.15), 0).unwrap_err();
        assert_eq!(err, TelemetryError::InsufficientMissions { got: 2 });
    }

    #[test]
    fn meta_roundtrip() {
        let meta = MissionMeta {
            mission_id: "pothole_m10900_s0003".into(),
            mass_kg: 10900.0,
            label_track: Some(vec![Label::Normal, Label::Pothole]),
        };
        assert_eq!(parse_meta(&format_meta(&meta)).unwrap(), meta);
        let no_track = MissionMeta { label_track: None, ..meta };
        assert_eq!(parse_meta(&format_meta(&no_track)).unwrap(), no_track);
    }

    #[test]
    fn meta_missing_mass_rejected() {
        let err = parse_meta("mission_id=x\n").unwrap_err();
        assert_eq!(err, TelemetryError::MetaMissingKey("mass_kg"));
    }

    proptest! {
        #[test]
        fn record_format_parse_identity(
            t in 0.0f64..1e6,
            a_x in -15.0f64..15.0,
            a_y in -15.0f64..15.0,
            a_z in -15.0f64..25.0,
            v in 0.0f64..60.0,
            theta in proptest::option::of(-1.5f64..1.5),
        ) {
            let s = Sample { t, a_x, a_y, a_z, v, theta };
            let back = parse_record(&format_record(&s), 1).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn windowing_accounts_for_every_sample(n in 0usize..400) {
            let w = window_stream(&run(n), "m", 10000.0, None).unwrap();
            prop_assert_eq!(
                w.windows.len() * WINDOW_LEN + w.gap_windows * WINDOW_LEN + w.tail_dropped,
                n
            );
            prop_assert_eq!(w.windows.len() + w.gap_windows, n / WINDOW_LEN);
        }

        #[test]
        fn split_preserves_all_windows(m in 3usize..20, seed in 0u64..1000) {
            let all = windows_for_missions(m);
            let total = all.len();
            let split = split_by_mission(all, (0.70, 0.15, 0.15), seed).unwrap();
            prop_assert_eq!(split.train.len() + split.val.len() + split.test.len(), total);
        }
    }
}
