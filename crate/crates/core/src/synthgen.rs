//! Deterministic synthetic mission generator.
//!
//! Produces labeled 10 Hz telemetry for five driving contexts: steady
//! cruise, potholes, speed bumps, constant-grade ramps, and rough terrain.
//! Every signal shape is a named constant below; streams are fully
//! determined by the mission seed. Speed is built as a smooth schedule plus
//! integrated event perturbations, and `a_x` is its exact derivative plus
//! sensor noise, so the kinematics stay self-consistent.
//!
//! Speed bumps produce pothole-class labels: the label set has four classes
//! while the context grid has five, so the bump windows share the pothole
//! label at reduced amplitude.

use crate::physics::STANDARD_GRAVITY;
use crate::telemetry::{window_stream, Label, MissionMeta, Sample, Window, DT, MASS_RANGE, WINDOW_LEN};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
// backs float math in pure no_std builds; shadowed once std is linked
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal, Uniform};

/// Fractional speed modulation on cruise-family missions.
pub const SPEED_MOD_FRAC: f64 = 0.08;
pub const SPEED_MOD_PERIOD_S: f64 = 30.0;
/// Road-texture undulation on a_z at the default noise level; scales
/// linearly with `noise_std` so a noiseless spec yields a_z identically g.
/// Kept large enough that a 10 Hz sampling of a pothole spike (2-3 samples
/// at arbitrary phase) cannot dwarf the vertical channel's normal variance.
pub const ROAD_UNDULATION_AMP: f64 = 0.6;
pub const ROAD_UNDULATION_HZ: f64 = 0.4;
/// At most one braking episode per cruise-family mission.
pub const BRAKE_PULSE_PROB: f64 = 0.4;
pub const BRAKE_PULSE_PEAK: f64 = -3.0;
pub const BRAKE_PULSE_LEN_S: f64 = 1.4;
pub const BRAKE_RECOVERY_ACCEL: f64 = 0.5;
/// Pothole spike amplitude and width on a_z (biphasic full sine).
pub const SPIKE_AMP_RANGE: (f64, f64) = (6.0, 10.0);
pub const SPIKE_LEN_RANGE_S: (f64, f64) = (0.2, 0.3);
/// Lateral sway of the sprung mass after each spike. The sway is long and
/// smooth: its amplitude (set by suspension geometry, not impact size) is
/// far outside the quiet lateral noise floor, while its jerk is small, so
/// it dominates reconstruction error without lifting the integrated
/// lateral stress above sustained rough terrain.
pub const SWAY_AMP: f64 = 1.0;
/// Duration of the post-impact lateral sway.
pub const SWAY_LEN_RANGE_S: (f64, f64) = (2.5, 3.0);
/// A window takes the event label only when it holds at least this share
/// of the event's dominant-shape energy. Windows grazing the edge of an
/// event carry too little of it to be a meaningful example of the class.
pub const EVENT_LABEL_MIN_SHARE: f64 = 0.4;
/// Longitudinal dip (driver reaction) coupled to each spike.
pub const SPIKE_LONG_DIP: f64 = 0.25;
pub const SPIKE_RECOVERY_ACCEL: f64 = 0.3;
/// Speed-bump half-sine amplitude and width on a_z.
pub const BUMP_AMP_RANGE: (f64, f64) = (2.0, 5.0);
pub const BUMP_LEN_RANGE_S: (f64, f64) = (0.6, 1.0);
pub const BUMP_LAT_COUPLE: f64 = 0.15;
/// Events never arrive closer than this, keeping one per window.
pub const EVENT_MIN_GAP_S: f64 = 3.5;
/// Rough terrain multiplies the per-axis noise std by these factors.
pub const ROUGH_FACTOR_AX: f64 = 3.0;
pub const ROUGH_FACTOR_AY: f64 = 7.0;
pub const ROUGH_FACTOR_AZ: f64 = 10.0;
/// Ramp speed jitter (m/s) around the base speed; kept small so the
/// per-window drive work stays within 1% of the constant-grade closed form.
pub const RAMP_SPEED_JITTER: f64 = 0.02;
pub const RAMP_JITTER_HZ: f64 = 0.05;
/// Physical plausibility bound applied to every acceleration axis.
pub const ACCEL_BOUND: f64 = 15.0;

pub const DEFAULT_NOISE_STD: f64 = 0.05;
pub const DEFAULT_GRADE: f64 = 0.08;
pub const DEFAULT_EVENT_RATE_PER_MIN: f64 = 6.0;
/// The three reference mass levels.
pub const PAPER_MASSES: [f64; 3] = [8300.0, 10900.0, 13500.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    Cruise,
    Pothole,
    SpeedBump,
    Ramp,
    RoughTerrain,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Cruise,
        Scenario::Pothole,
        Scenario::SpeedBump,
        Scenario::Ramp,
        Scenario::RoughTerrain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Cruise => "cruise",
            Scenario::Pothole => "pothole",
            Scenario::SpeedBump => "speed_bump",
            Scenario::Ramp => "ramp",
            Scenario::RoughTerrain => "rough_terrain",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "cruise" => Some(Scenario::Cruise),
            "pothole" => Some(Scenario::Pothole),
            "speed_bump" => Some(Scenario::SpeedBump),
            "ramp" => Some(Scenario::Ramp),
            "rough_terrain" => Some(Scenario::RoughTerrain),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionSpec {
    pub scenario: Scenario,
    pub duration_s: f64,
    pub mass: f64,
    pub base_speed: f64,
    pub seed: u64,
    pub noise_std: f64,
    /// Ramp grade in radians; ignored elsewhere.
    pub grade: f64,
    /// Pothole / speed-bump arrival rate.
    pub event_rate_per_min: f64,
}

impl MissionSpec {
    pub fn new(scenario: Scenario, mass: f64, base_speed: f64, seed: u64) -> MissionSpec {
        MissionSpec {
            scenario,
            duration_s: 120.0,
            mass,
            base_speed,
            seed,
            noise_std: DEFAULT_NOISE_STD,
            grade: DEFAULT_GRADE,
            event_rate_per_min: DEFAULT_EVENT_RATE_PER_MIN,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.duration_s >= 30.0) {
            return Err(SynthError::BadSpec("duration must be at least 30 s"));
        }
        if !(self.base_speed > 0.0) {
            return Err(SynthError::BadSpec("base_speed must be positive"));
        }
        if !(self.mass >= MASS_RANGE.0 && self.mass <= MASS_RANGE.1) {
            return Err(SynthError::BadSpec("mass outside the supported range"));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(SynthError::BadSpec("noise_std must be non-negative"));
        }
        if !(self.grade.abs() < 0.5) {
            return Err(SynthError::BadSpec("grade must satisfy |grade| < 0.5 rad"));
        }
        if !(self.event_rate_per_min > 0.0 && self.event_rate_per_min <= 15.0) {
            return Err(SynthError::BadSpec("event rate must be in (0, 15] per minute"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthError {
    BadSpec(&'static str),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::BadSpec(msg) => f.write_str(msg),
        }
    }
}

/// One generated mission: the raw stream plus per-window ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub mission_id: String,
    pub mass: f64,
    pub samples: Vec<Sample>,
    /// One label per full 30-sample window. Event labels mark the windows
    /// holding the bulk of an event's energy, so a footprint window that
    /// caught only the edge of an event can stay `Normal`.
    pub labels: Vec<Label>,
    /// Sample-index spans of injected spike/bump event footprints.
    pub events: Vec<(usize, usize)>,
}

impl Mission {
    pub fn meta(&self) -> MissionMeta {
        MissionMeta {
            mission_id: self.mission_id.clone(),
            mass_kg: self.mass,
            label_track: Some(self.labels.clone()),
        }
    }

    /// Window the stream with its ground-truth labels attached.
    pub fn to_windows(&self) -> Vec<Window> {
        window_stream(&self.samples, &self.mission_id, self.mass, Some(&self.labels))
            .expect("generated missions always satisfy the windowing preconditions")
            .windows
    }

    /// Copy with pitch removed from every sample, for exercising the
    /// pitch-estimation fallback.
    pub fn strip_theta(&self) -> Mission {
        let mut m = self.clone();
        for s in m.samples.iter_mut() {
            s.theta = None;
        }
        m
    }
}

/// Add `shape(u)` over `u in [0, len)` into `track`, starting at time `t0`.
fn add_shape(track: &mut [f64], t0: f64, len: f64, shape: impl Fn(f64) -> f64) {
    let first = (t0 / DT).ceil() as usize;
    let n = track.len();
    let mut i = first;
    loop {
        let u = i as f64 * DT - t0;
        if u >= len || i >= n {
            break;
        }
        track[i] += shape(u);
        i += 1;
    }
}

/// Share of a half-sine shape's energy that falls in its first `c` seconds:
/// the normalized integral of sin^2(pi u / len) over [0, c].
fn half_sine_energy_share(c: f64, len: f64) -> f64 {
    let x = (c / len).clamp(0.0, 1.0);
    x - (core::f64::consts::TAU * x).sin() / core::f64::consts::TAU
}

/// Split an event's dominant half-sine (starting at `t0`, lasting `len`)
/// across the fixed window grid and keep the windows holding at least
/// `EVENT_LABEL_MIN_SHARE` of its energy. A shape shorter than a window
/// spans at most two of them.
fn salient_windows(t0: f64, len: f64, n_windows: usize, out: &mut Vec<usize>) {
    let w1 = ((t0 / DT).ceil() as usize) / WINDOW_LEN;
    let boundary = ((w1 + 1) * WINDOW_LEN) as f64 * DT;
    let head = half_sine_energy_share(boundary - t0, len);
    if head >= EVENT_LABEL_MIN_SHARE && w1 < n_windows {
        out.push(w1);
    }
    if 1.0 - head >= EVENT_LABEL_MIN_SHARE && w1 + 1 < n_windows {
        out.push(w1 + 1);
    }
}

/// Event arrival times: exponential gaps with a hard floor so no window
/// holds more than one event.
fn arrival_times(rng: &mut ChaCha8Rng, rate_per_min: f64, duration: f64) -> Vec<f64> {
    let mean_gap = 60.0 / rate_per_min;
    let exp_mean = (mean_gap - EVENT_MIN_GAP_S).max(0.1);
    let exp = Exp::new(1.0 / exp_mean).expect("positive rate");
    let mut times = Vec::new();
    let mut t = 5.0 + exp.sample(rng);
    while t < duration - 5.0 {
        times.push(t);
        t += EVENT_MIN_GAP_S + exp.sample(rng);
    }
    times
}

pub fn generate_mission(spec: &MissionSpec, mission_id: &str) -> Result<Mission, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = (spec.duration_s / DT).round() as usize;
    let g = STANDARD_GRAVITY;
    let noise_scale = spec.noise_std / DEFAULT_NOISE_STD;

    let rough = spec.scenario == Scenario::RoughTerrain;
    let ramp = spec.scenario == Scenario::Ramp;
    let (sx, sy, sz) = if rough {
        (
            spec.noise_std * ROUGH_FACTOR_AX,
            spec.noise_std * ROUGH_FACTOR_AY,
            spec.noise_std * ROUGH_FACTOR_AZ,
        )
    } else {
        (spec.noise_std, spec.noise_std, spec.noise_std)
    };

    // smooth speed schedule and its exact derivative
    let phase: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
    let (v_sched, a_sched): (Vec<f64>, Vec<f64>) = if ramp {
        let om = core::f64::consts::TAU * RAMP_JITTER_HZ;
        (0..n)
            .map(|i| {
                let t = i as f64 * DT;
                (
                    spec.base_speed + RAMP_SPEED_JITTER * (om * t + phase).sin(),
                    RAMP_SPEED_JITTER * om * (om * t + phase).cos(),
                )
            })
            .unzip()
    } else {
        let om = core::f64::consts::TAU / SPEED_MOD_PERIOD_S;
        (0..n)
            .map(|i| {
                let t = i as f64 * DT;
                (
                    spec.base_speed * (1.0 + SPEED_MOD_FRAC * (om * t + phase).sin()),
                    spec.base_speed * SPEED_MOD_FRAC * om * (om * t + phase).cos(),
                )
            })
            .unzip()
    };

    // event tracks: extra acceleration per axis, with longitudinal events
    // integrated into the speed
    let mut ev_x = vec![0.0; n];
    let mut ev_y = vec![0.0; n];
    let mut ev_z = vec![0.0; n];
    let mut events: Vec<(usize, usize)> = Vec::new();
    let mut salient: Vec<usize> = Vec::new();

    match spec.scenario {
        Scenario::Cruise | Scenario::RoughTerrain => {
            if rng.gen_bool(BRAKE_PULSE_PROB) {
                let t0 = rng.gen_range(5.0..spec.duration_s - 10.0);
                add_shape(&mut ev_x, t0, BRAKE_PULSE_LEN_S, |u| {
                    let s = (core::f64::consts::PI * u / BRAKE_PULSE_LEN_S).sin();
                    BRAKE_PULSE_PEAK * s * s
                });
                let dv = -BRAKE_PULSE_PEAK * BRAKE_PULSE_LEN_S / 2.0;
                add_shape(&mut ev_x, t0 + BRAKE_PULSE_LEN_S, dv / BRAKE_RECOVERY_ACCEL, |_| {
                    BRAKE_RECOVERY_ACCEL
                });
            }
        }
        Scenario::Pothole => {
            let amp = Uniform::new_inclusive(SPIKE_AMP_RANGE.0, SPIKE_AMP_RANGE.1);
            let len = Uniform::new_inclusive(SPIKE_LEN_RANGE_S.0, SPIKE_LEN_RANGE_S.1);
            let sway_len = Uniform::new_inclusive(SWAY_LEN_RANGE_S.0, SWAY_LEN_RANGE_S.1);
            for t0 in arrival_times(&mut rng, spec.event_rate_per_min, spec.duration_s) {
                let a = amp.sample(&mut rng);
                let tau = len.sample(&mut rng);
                let sway = sway_len.sample(&mut rng);
                let lat_sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                // wheel drops first: downward lobe, then rebound
                add_shape(&mut ev_z, t0, tau, |u| {
                    -a * (core::f64::consts::TAU * u / tau).sin()
                });
                add_shape(&mut ev_y, t0, sway, |u| {
                    lat_sign * SWAY_AMP * (core::f64::consts::PI * u / sway).sin()
                });
                add_shape(&mut ev_x, t0, tau, |u| {
                    -SPIKE_LONG_DIP * a * (core::f64::consts::PI * u / tau).sin()
                });
                let dv = SPIKE_LONG_DIP * a * 2.0 * tau / core::f64::consts::PI;
                add_shape(&mut ev_x, t0 + tau, dv / SPIKE_RECOVERY_ACCEL, |_| {
                    SPIKE_RECOVERY_ACCEL
                });
                let start = (t0 / DT).ceil() as usize;
                let end = ((t0 + tau + sway) / DT).floor() as usize;
                events.push((start, end.min(n - 1)));
                // the sway carries the event's anomaly energy: windows
                // holding only a sliver of it stay unlabeled
                salient_windows(t0, sway, n / WINDOW_LEN, &mut salient);
            }
        }
        Scenario::SpeedBump => {
            let amp = Uniform::new_inclusive(BUMP_AMP_RANGE.0, BUMP_AMP_RANGE.1);
            let len = Uniform::new_inclusive(BUMP_LEN_RANGE_S.0, BUMP_LEN_RANGE_S.1);
            for t0 in arrival_times(&mut rng, spec.event_rate_per_min, spec.duration_s) {
                let a = amp.sample(&mut rng);
                let tau = len.sample(&mut rng);
                let lat_sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                add_shape(&mut ev_z, t0, tau, |u| {
                    a * (core::f64::consts::PI * u / tau).sin()
                });
                add_shape(&mut ev_y, t0, tau, |u| {
                    lat_sign * BUMP_LAT_COUPLE * a * (core::f64::consts::PI * u / tau).sin()
                });
                let start = (t0 / DT).ceil() as usize;
                let end = ((t0 + tau) / DT).floor() as usize;
                events.push((start, end.min(n - 1)));
                salient_windows(t0, tau, n / WINDOW_LEN, &mut salient);
            }
        }
        Scenario::Ramp => {}
    }

    // integrate longitudinal events into the speed
    let mut v_ev = vec![0.0; n];
    for i in 1..n {
        v_ev[i] = v_ev[i - 1] + 0.5 * (ev_x[i - 1] + ev_x[i]) * DT;
    }

    let theta = if ramp { spec.grade } else { 0.0 };
    let az_base = g * theta.cos();
    let und_amp = ROAD_UNDULATION_AMP * noise_scale;
    let und_om = core::f64::consts::TAU * ROAD_UNDULATION_HZ;
    let und_phase: f64 = rng.gen_range(0.0..core::f64::consts::TAU);

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * DT;
        let nx: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let ny: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let nz: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let a_x = (a_sched[i] + ev_x[i] + sx * nx).clamp(-ACCEL_BOUND, ACCEL_BOUND);
        let a_y = (ev_y[i] + sy * ny).clamp(-ACCEL_BOUND, ACCEL_BOUND);
        let a_z = (az_base + und_amp * (und_om * t + und_phase).sin() + ev_z[i] + sz * nz)
            .clamp(-ACCEL_BOUND, ACCEL_BOUND);
        let v = (v_sched[i] + v_ev[i]).max(0.0);
        samples.push(Sample { t, a_x, a_y, a_z, v, theta: Some(theta) });
    }

    // one label per full window; event-salient windows take the pothole class
    let n_windows = n / WINDOW_LEN;
    let base_label = match spec.scenario {
        Scenario::Cruise => Label::Normal,
        Scenario::Ramp => Label::Ramp,
        Scenario::RoughTerrain => Label::RoughTerrain,
        Scenario::Pothole | Scenario::SpeedBump => Label::Normal,
    };
    let mut labels = vec![base_label; n_windows];
    for &chunk in &salient {
        labels[chunk] = Label::Pothole;
    }

    Ok(Mission {
        mission_id: String::from(mission_id),
        mass: spec.mass,
        samples,
        labels,
        events,
    })
}

/// Grid corpus: `per_cell` missions for every scenario x mass combination.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub per_cell: usize,
    pub scenarios: Vec<Scenario>,
    pub masses: Vec<f64>,
    pub duration_s: f64,
    /// Per-mission base speed drawn uniformly from this range.
    pub speed_range: (f64, f64),
    pub noise_std: f64,
    pub event_rate_per_min: f64,
    pub grade: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> CorpusConfig {
        CorpusConfig {
            per_cell: 2,
            scenarios: Scenario::ALL.to_vec(),
            masses: PAPER_MASSES.to_vec(),
            duration_s: 120.0,
            speed_range: (8.0, 20.0),
            noise_std: DEFAULT_NOISE_STD,
            event_rate_per_min: DEFAULT_EVENT_RATE_PER_MIN,
            grade: DEFAULT_GRADE,
            seed: 0,
        }
    }
}

pub fn generate_corpus(config: &CorpusConfig) -> Result<Vec<Mission>, SynthError> {
    if config.per_cell == 0 {
        return Err(SynthError::BadSpec("per_cell must be at least 1"));
    }
    if !(config.speed_range.0 > 0.0 && config.speed_range.1 >= config.speed_range.0) {
        return Err(SynthError::BadSpec("speed range must be positive and ordered"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut missions = Vec::new();
    for &scenario in &config.scenarios {
        for &mass in &config.masses {
            for k in 0..config.per_cell {
                let base_speed = if config.speed_range.1 > config.speed_range.0 {
                    rng.gen_range(config.speed_range.0..config.speed_range.1)
                } else {
                    config.speed_range.0
                };
                let spec = MissionSpec {
                    scenario,
                    duration_s: config.duration_s,
                    mass,
                    base_speed,
                    seed: rng.gen(),
                    noise_std: config.noise_std,
                    grade: config.grade,
                    event_rate_per_min: config.event_rate_per_min,
                };
                let id = format!("{}-m{}-{:03}", scenario.as_str(), mass, k);
                missions.push(generate_mission(&spec, &id)?);
            }
        }
    }
    Ok(missions)
}
